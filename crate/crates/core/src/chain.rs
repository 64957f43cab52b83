//! Multiple eigenvalue and Jordan chain recovery at a point of the stratum.

use alloc::vec::Vec;

use num_traits::Zero;
#[allow(unused_imports)] // resolved inherently when std is in the build graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::invariant::InvariantTriple;
use crate::linalg::{condition_number, dotc, lu_solve, norm2, CMatrix, C64, EPS};
use crate::deformation::powers;

/// Generalized eigenvectors `U = [u_1 .. u_d]` with `A U = U J_lambda`.
#[derive(Clone, Debug)]
pub struct JordanChain {
    pub lambda: C64,
    pub u: CMatrix,
    /// `|A U - U J_lambda|_F / |U|_F` against the matrix the chain came from.
    pub residual: f64,
}

impl JordanChain {
    pub fn multiplicity(&self) -> usize {
        self.u.ncols()
    }

    /// Spectral condition number of `U`.
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.u)
    }
}

pub fn multiple_eigenvalue(s: &CMatrix) -> C64 {
    s.trace() / s.nrows() as f64
}

/// `J_lambda` of size `d`.
pub fn jordan_block(lambda: C64, d: usize) -> CMatrix {
    let mut j = CMatrix::identity(d).scale(lambda);
    for i in 0..d.saturating_sub(1) {
        j[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    j
}

pub fn chain_residual(a: &CMatrix, lambda: C64, u: &CMatrix) -> f64 {
    let j = jordan_block(lambda, u.ncols());
    let num = (&(a * u) - &(u * &j)).norm_fro();
    let den = u.norm_fro();
    if den == 0.0 {
        return f64::INFINITY;
    }
    num / den
}

/// Builds `u_i = X (S - lambda I)^(d-i) k` with `k` fixed by
/// `u1_hat^H u_1 = 1`, `u1_hat^H u_i = 0` for `i >= 2`.
///
/// `u1_hat` is the unit-normalized largest column of `X (S - lambda I)^(d-1)`
/// (lowest column index on ties), with its largest entry rotated to be real
/// positive. `a` is only used for the residual.
pub fn jordan_chain(a: &CMatrix, triple: &InvariantTriple) -> Result<JordanChain> {
    let d = triple.multiplicity();
    let s = &triple.s;
    let x = &triple.x;
    let lambda = multiple_eigenvalue(s);
    let shifted = s - &CMatrix::identity(d).scale(lambda);
    let pw = powers(&shifted, d);
    // xn[p] = X N^p
    let xn: Vec<CMatrix> = pw.iter().map(|p| x * p).collect();
    let top = &xn[d - 1];

    let norms: Vec<f64> = (0..d).map(|j| norm2(top.col(j))).collect();
    let best = norms.iter().copied().fold(0.0, f64::max);
    let scale = x.norm_fro() * shifted.norm_fro().max(s.norm_fro()).max(1.0).powi(d as i32 - 1);
    if best == 0.0 || best <= 10.0 * EPS * scale {
        return Err(Error::DegenerateChain {
            norm: top.norm_fro(),
        });
    }
    let col = norms.iter().position(|&n| n == best).unwrap_or(0);
    let mut u1_hat: Vec<C64> = top.col(col).iter().map(|&z| z / best).collect();
    fix_phase(&mut u1_hat);

    // Row i-1 of G is u1_hat^H X N^(d-i).
    let g = CMatrix::from_fn(d, d, |i, j| dotc(&u1_hat, xn[d - 1 - i].col(j)));
    let mut rhs = alloc::vec![C64::zero(); d];
    rhs[0] = C64::new(1.0, 0.0);
    let k = lu_solve(&g, &rhs).map_err(|_| Error::DegenerateChain {
        norm: top.norm_fro(),
    })?;
    let mut u = CMatrix::zeros(x.nrows(), d);
    for i in 0..d {
        let ui = xn[d - 1 - i].matvec(&k);
        u.col_mut(i).copy_from_slice(&ui);
    }
    let residual = chain_residual(a, lambda, &u);
    Ok(JordanChain { lambda, u, residual })
}

/// Rotates `v` so its largest-modulus entry (first one within a relative
/// `1e-8` of the maximum) is real and positive.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let Some(pivot) = v.iter().find(|z| z.norm() >= (1.0 - 1e-8) * max).copied() else {
        return;
    };
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::ClusterSelection;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn identity_triple(s: CMatrix) -> InvariantTriple {
        let d = s.nrows();
        InvariantTriple {
            s,
            x: CMatrix::identity(d),
            y: CMatrix::identity(d),
            cluster: ClusterSelection::leading(d, d).unwrap(),
        }
    }

    #[test]
    fn mean_eigenvalue() {
        assert_eq!(multiple_eigenvalue(&jordan_block(c(-2.0), 2)), c(-2.0));
        let s = CMatrix::diag(&[C64::new(1.0, 1.0), C64::new(1.0, -1.0)]);
        assert_eq!(multiple_eigenvalue(&s), c(1.0));
    }

    #[test]
    fn nilpotent_block_chain_is_identity() {
        let j0 = jordan_block(c(0.0), 2);
        let ch = jordan_chain(&j0, &identity_triple(j0.clone())).unwrap();
        assert_eq!(ch.lambda, c(0.0));
        assert!((&ch.u - &CMatrix::identity(2)).norm_fro() < 1e-15);
        assert_eq!(ch.residual, 0.0);
    }

    #[test]
    fn exact_pair_has_zero_residual() {
        let j = jordan_block(C64::new(0.5, 2.0), 4);
        assert_eq!(chain_residual(&j, C64::new(0.5, 2.0), &CMatrix::identity(4)), 0.0);
    }

    #[test]
    fn derogatory_cluster_is_degenerate() {
        let s = CMatrix::identity(2);
        let err = jordan_chain(&s, &identity_triple(s.clone())).unwrap_err();
        assert!(matches!(err, Error::DegenerateChain { .. }));
    }

    #[test]
    fn chain_normalization_holds() {
        // Similarity-transformed Jordan block.
        let p = CMatrix::from_real_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 1.0]]);
        let pinv_cols: Vec<Vec<C64>> = (0..3)
            .map(|j| {
                let mut e = alloc::vec![c(0.0); 3];
                e[j] = c(1.0);
                lu_solve(&p, &e).unwrap()
            })
            .collect();
        let pinv = CMatrix::from_fn(3, 3, |i, j| pinv_cols[j][i]);
        let a = &(&p * &jordan_block(c(1.5), 3)) * &pinv;
        let ch = jordan_chain(&a, &identity_triple(a.clone())).unwrap();
        assert!((ch.lambda - c(1.5)).norm() < 1e-14);
        assert!(ch.residual < 1e-13);
        let u1 = ch.u.col(0);
        assert!((norm2(u1) - 1.0).abs() < 1e-13);
        for i in 1..3 {
            assert!(dotc(u1, ch.u.col(i)).norm() < 1e-13);
        }
    }
}
