//! Parameter-dependent matrices `A(p)` and the built-in fixtures.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolved inherently when std is in the build graph
use num_traits::Float;


use crate::linalg::{CMatrix, C64, EPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParameterDomain {
    Real,
    Complex,
}

/// A smooth matrix family `p -> A(p)` of `m x m` matrices in `n` parameters.
pub trait MatrixFamily {
    fn dim(&self) -> usize;

    fn num_params(&self) -> usize;

    fn domain(&self) -> ParameterDomain {
        ParameterDomain::Complex
    }

    fn evaluate(&self, p: &[C64]) -> CMatrix;

    /// `dA/dp_j` at `p`; central differences unless overridden.
    fn derivative(&self, p: &[C64], j: usize) -> CMatrix {
        finite_difference_derivative(self, p, j, None)
    }

    fn derivatives(&self, p: &[C64]) -> Vec<CMatrix> {
        (0..self.num_params()).map(|j| self.derivative(p, j)).collect()
    }
}

/// Central difference `(A(p + h e_j) - A(p - h e_j)) / 2h`.
///
/// The default step is `sqrt(eps) (1 + |p_j|)`.
pub fn finite_difference_derivative<F: MatrixFamily + ?Sized>(
    family: &F,
    p: &[C64],
    j: usize,
    step: Option<f64>,
) -> CMatrix {
    let h = step.unwrap_or_else(|| EPS.sqrt() * (1.0 + p[j].norm()));
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[j] += h;
    minus[j] -= h;
    // Divide by the spacing actually represented.
    let width = plus[j].re - minus[j].re;
    let diff = &family.evaluate(&plus) - &family.evaluate(&minus);
    diff.scale_real(1.0 / width)
}

/// `A(p) = A_0 + sum_j p_j D_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFamily {
    a0: CMatrix,
    derivs: Vec<CMatrix>,
    domain: ParameterDomain,
}

impl AffineFamily {
    /// Panics unless every matrix is square of the same size.
    pub fn new(a0: CMatrix, derivs: Vec<CMatrix>, domain: ParameterDomain) -> Self {
        assert!(a0.is_square(), "A0 must be square");
        for d in &derivs {
            assert_eq!((d.nrows(), d.ncols()), (a0.nrows(), a0.ncols()), "derivative shape");
        }
        Self { a0, derivs, domain }
    }

    pub fn base(&self) -> &CMatrix {
        &self.a0
    }

    pub fn directions(&self) -> &[CMatrix] {
        &self.derivs
    }
}

impl MatrixFamily for AffineFamily {
    fn dim(&self) -> usize {
        self.a0.nrows()
    }

    fn num_params(&self) -> usize {
        self.derivs.len()
    }

    fn domain(&self) -> ParameterDomain {
        self.domain
    }

    fn evaluate(&self, p: &[C64]) -> CMatrix {
        assert_eq!(p.len(), self.derivs.len(), "parameter count mismatch");
        let mut a = self.a0.clone();
        for (d, &pj) in self.derivs.iter().zip(p) {
            if pj == C64::new(0.0, 0.0) {
                continue;
            }
            for (x, &y) in a.as_mut_slice().iter_mut().zip(d.as_slice()) {
                *x += pj * y;
            }
        }
        a
    }

    fn derivative(&self, _p: &[C64], j: usize) -> CMatrix {
        self.derivs[j].clone()
    }
}

type EvalFn = dyn Fn(&[C64]) -> CMatrix + Send + Sync;
type DerivFn = dyn Fn(&[C64], usize) -> CMatrix + Send + Sync;

/// Family defined by closures; derivatives fall back to finite differences.
pub struct FnFamily {
    m: usize,
    n: usize,
    domain: ParameterDomain,
    eval: Box<EvalFn>,
    deriv: Option<Box<DerivFn>>,
}

impl FnFamily {
    pub fn new(
        m: usize,
        n: usize,
        domain: ParameterDomain,
        eval: impl Fn(&[C64]) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            m,
            n,
            domain,
            eval: Box::new(eval),
            deriv: None,
        }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&[C64], usize) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Box::new(deriv));
        self
    }
}

impl MatrixFamily for FnFamily {
    fn dim(&self) -> usize {
        self.m
    }

    fn num_params(&self) -> usize {
        self.n
    }

    fn domain(&self) -> ParameterDomain {
        self.domain
    }

    fn evaluate(&self, p: &[C64]) -> CMatrix {
        (self.eval)(p)
    }

    fn derivative(&self, p: &[C64], j: usize) -> CMatrix {
        match &self.deriv {
            Some(f) => f(p, j),
            None => finite_difference_derivative(self, p, j, None),
        }
    }
}

impl core::fmt::Debug for FnFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnFamily")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// 4x4 companion-type family in three parameters with the swallow-tail
/// bifurcation diagram; `A(0)` is the nilpotent Jordan block.
pub fn family_swallow_tail() -> AffineFamily {
    let a0 = CMatrix::from_real_rows(&[
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, 0.0],
    ]);
    let derivs = (1..4).map(|i| CMatrix::unit(4, 4, i, 0)).collect();
    AffineFamily::new(a0, derivs, ParameterDomain::Real)
}

/// Two-parameter real family `[[1, 3, 0], [p1, 1, p2], [2, 3, 1]]` with a cusp at the origin.
pub fn family_cusp() -> AffineFamily {
    let a0 = CMatrix::from_real_rows(&[[1.0, 3.0, 0.0], [0.0, 1.0, 0.0], [2.0, 3.0, 1.0]]);
    let derivs = alloc::vec![CMatrix::unit(3, 3, 1, 0), CMatrix::unit(3, 3, 1, 2)];
    AffineFamily::new(a0, derivs, ParameterDomain::Real)
}

/// The versal normal form `B(p) = p_1 I + J_0 + sum_{i>=2} p_i E_i1` of size `d`,
/// whose versal functions are the parameters themselves.
pub fn family_versal_form(d: usize) -> AffineFamily {
    assert!(d >= 1, "versal form needs d >= 1");
    let mut a0 = CMatrix::zeros(d, d);
    for i in 0..d - 1 {
        a0[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    let mut derivs = alloc::vec![CMatrix::identity(d)];
    derivs.extend((1..d).map(|i| CMatrix::unit(d, d, i, 0)));
    AffineFamily::new(a0, derivs, ParameterDomain::Complex)
}

/// The perturbation direction `E` of the nearly nilpotent 3x3 test matrix.
pub fn nilpotent_perturbation() -> CMatrix {
    CMatrix::from_real_rows(&[[3.0, 4.0, 2.0], [8.0, 3.0, 6.0], [4.0, 9.0, 6.0]])
}

/// `A_1 + epsilon E` with `A_1 = [[0, 1, 0], [0, 0, delta], [0, 0, 0]]`.
pub fn matrix_perturbed_nilpotent(epsilon: f64, delta: f64) -> CMatrix {
    let a1 = CMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, delta], [0.0, 0.0, 0.0]]);
    &a1 + &nilpotent_perturbation().scale_real(epsilon)
}

/// Basis of the normal space to the triple-eigenvalue stratum at `A_1`:
/// `{x (E_21 + delta E_32) + y E_31}`.
pub fn nilpotent_normal_basis(delta: f64) -> [CMatrix; 2] {
    let mut bx = CMatrix::unit(3, 3, 1, 0);
    bx[(2, 1)] = C64::new(delta, 0.0);
    [bx, CMatrix::unit(3, 3, 2, 0)]
}

/// Frank matrix: `a_ij = n + 1 - max(i, j)` for `j >= i - 1` (one-based), zero below.
pub fn matrix_frank(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if j + 1 >= i {
            C64::new((n - i.max(j)) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::poly_from_roots;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn swallow_tail_fixture() {
        let f = family_swallow_tail();
        let a = f.evaluate(&[c(0.0); 3]);
        let mut j0 = CMatrix::zeros(4, 4);
        for i in 0..3 {
            j0[(i, i + 1)] = c(1.0);
        }
        assert_eq!(a, j0);
        assert_eq!(f.derivative(&[c(0.0); 3], 0), CMatrix::unit(4, 4, 1, 0));
    }

    #[test]
    fn swallow_tail_char_poly() {
        // char poly lambda^4 - p1 lambda^2 - p2 lambda - p3 from the eigenvalues.
        let f = family_swallow_tail();
        let p = [c(0.7), c(-0.2), c(0.4)];
        let ev = crate::invariant::eigenvalues(&f.evaluate(&p)).unwrap();
        let poly = poly_from_roots(&ev);
        let expect = [c(1.0), c(0.0), c(-0.7), c(0.2), c(-0.4)];
        for (a, b) in poly.iter().zip(expect) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn cusp_fixture() {
        let f = family_cusp();
        assert_eq!(f.derivative(&[c(0.0), c(0.0)], 1), CMatrix::unit(3, 3, 1, 2));
        let a = f.evaluate(&[c(-0.03), c(8.99)]);
        let mut ev = crate::invariant::eigenvalues(&a).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        assert!((ev[0].re + 1.995).abs() < 5e-4 && (ev[0].im.abs() - 0.183).abs() < 5e-4);
        assert!((ev[2].re - 6.990).abs() < 5e-4);
    }

    #[test]
    fn versal_form_fixture() {
        let f = family_versal_form(3);
        let a = f.evaluate(&[c(2.0), c(0.0), c(0.0)]);
        assert_eq!(a, crate::chain::jordan_block(c(2.0), 3));
    }

    #[test]
    fn nilpotent_perturbation_norm() {
        let e = nilpotent_perturbation().scale_real(2.2e-15);
        assert!((e.norm_fro() - 3.62e-14).abs() < 0.01e-14);
        assert_eq!(matrix_perturbed_nilpotent(0.0, 1.5e-9)[(1, 2)], c(1.5e-9));
    }

    #[test]
    fn frank_entries_and_structure() {
        let f = matrix_frank(12);
        assert_eq!(f[(0, 0)], c(12.0));
        assert_eq!(f[(0, 1)], c(11.0));
        assert_eq!(f[(1, 0)], c(11.0));
        assert_eq!(f[(2, 0)], c(0.0));
        for j in 0..12 {
            for i in j + 2..12 {
                assert_eq!(f[(i, j)], c(0.0));
            }
        }
    }

    #[test]
    fn finite_differences_on_affine_and_quadratic() {
        let f = family_cusp();
        let p = [c(0.3), c(-1.2)];
        for j in 0..2 {
            let fd = finite_difference_derivative(&f, &p, j, None);
            assert!((&fd - &f.derivative(&p, j)).max_abs() < 1e-9);
        }
        let q = FnFamily::new(1, 1, ParameterDomain::Real, |p: &[C64]| {
            CMatrix::from_rows(&[[p[0] * p[0]]])
        });
        let fd = q.derivative(&[c(3.0)], 0);
        assert!((fd[(0, 0)] - c(6.0)).norm() < 1e-7);
    }
}
