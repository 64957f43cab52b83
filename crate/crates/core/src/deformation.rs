//! Values and first derivatives of the versal deformation functions
//! `q_1, ..., q_d` from an invariant triple.
//!
//! `q_1` is the mean of the cluster eigenvalues and `q_2, ..., q_d` are the
//! coefficients of `z^d - q_2 z^(d-2) - ... - q_d`, the characteristic polynomial
//! of the traceless restriction `S - q_1 I`. The surface of matrices with a
//! `d`-fold eigenvalue in a single Jordan block is `q_2 = ... = q_d = 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::invariant::InvariantTriple;
use crate::linalg::{self, CMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct VersalValues {
    q: Vec<C64>,
}

impl VersalValues {
    /// Wraps `(q_1, ..., q_d)`. Panics on an empty vector.
    pub fn new(q: Vec<C64>) -> Self {
        assert!(!q.is_empty(), "versal values need d >= 1");
        Self { q }
    }

    pub fn multiplicity(&self) -> usize {
        self.q.len()
    }

    /// All values, `q[0] = q_1`.
    pub fn as_slice(&self) -> &[C64] {
        &self.q
    }

    /// `q_i` with one-based `i`, matching the usual numbering.
    pub fn get(&self, i: usize) -> C64 {
        self.q[i - 1]
    }

    pub fn mean_eigenvalue(&self) -> C64 {
        self.q[0]
    }

    /// `(q_2, ..., q_d)`, the functions that vanish on the stratum.
    pub fn tail(&self) -> &[C64] {
        &self.q[1..]
    }

    /// Max modulus over `q_2, ..., q_d`.
    pub fn tail_max_abs(&self) -> f64 {
        self.tail().iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Coefficients `[1, 0, -q_2, ..., -q_d]` of the monic shifted polynomial,
    /// highest degree first.
    pub fn shifted_polynomial(&self) -> Vec<C64> {
        let mut p = Vec::with_capacity(self.q.len() + 1);
        p.push(C64::new(1.0, 0.0));
        p.push(C64::zero());
        p.extend(self.tail().iter().map(|&z| -z));
        p
    }
}

/// Monic polynomial with the given roots, highest degree first.
pub(crate) fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![C64::zero(); roots.len() + 1];
    c[0] = C64::new(1.0, 0.0);
    for (k, &r) in roots.iter().enumerate() {
        for i in (1..=k + 1).rev() {
            let prev = c[i - 1];
            c[i] -= r * prev;
        }
    }
    c
}

pub fn versal_values(s: &CMatrix) -> Result<VersalValues> {
    if !s.is_square() || s.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    let d = s.nrows();
    let q1 = s.trace() / d as f64;
    let eig = if s.is_upper_triangular() {
        s.diagonal()
    } else {
        linalg::schur(s)?.eigenvalues()
    };
    let shifted: Vec<C64> = eig.iter().map(|&l| l - q1).collect();
    let coeffs = poly_from_roots(&shifted);
    let mut q = Vec::with_capacity(d);
    q.push(q1);
    q.extend(coeffs[2..].iter().map(|&c| -c));
    Ok(VersalValues::new(q))
}

/// `C = J_0 + sum_i q_i E_{i1}`: ones on the superdiagonal, `(0, q_2, ..., q_d)` in
/// the first column.
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionMatrix(CMatrix);

impl CompanionMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

pub fn companion_matrix(values: &VersalValues) -> CompanionMatrix {
    let d = values.multiplicity();
    let mut c = CMatrix::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        c[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    for i in 1..d {
        c[(i, 0)] = values.q[i];
    }
    CompanionMatrix(c)
}

/// Derivatives of `q_1..q_d` either with respect to family parameters or to
/// matrix entries.
#[derive(Clone, Debug)]
pub enum VersalDerivatives {
    /// `d x n` matrix with entry `(i, j) = dq_(i+1)/dp_j`.
    Jacobian(CMatrix),
    /// One `m x m` matrix per `q_i`; entry `(j, k)` is `dq_i/da_jk`.
    Gradients(Vec<CMatrix>),
}

#[derive(Clone, Debug)]
pub struct VersalLinearization {
    pub values: VersalValues,
    pub derivatives: VersalDerivatives,
}

impl VersalLinearization {
    /// Number of unknowns: parameters, or `m^2` matrix entries.
    pub fn num_unknowns(&self) -> usize {
        match &self.derivatives {
            VersalDerivatives::Jacobian(j) => j.ncols(),
            VersalDerivatives::Gradients(g) => g[0].nrows() * g[0].ncols(),
        }
    }

    /// Coefficients of `dq_i` (one-based `i`) against the unknown vector.
    ///
    /// In matrix mode the unknowns are the entries of `dA` in column-major order.
    pub fn row(&self, i: usize) -> Vec<C64> {
        match &self.derivatives {
            VersalDerivatives::Jacobian(j) => j.row(i - 1),
            VersalDerivatives::Gradients(g) => g[i - 1].as_slice().to_vec(),
        }
    }

    pub fn jacobian(&self) -> Option<&CMatrix> {
        match &self.derivatives {
            VersalDerivatives::Jacobian(j) => Some(j),
            VersalDerivatives::Gradients(_) => None,
        }
    }

    pub fn gradients(&self) -> Option<&[CMatrix]> {
        match &self.derivatives {
            VersalDerivatives::Gradients(g) => Some(g),
            VersalDerivatives::Jacobian(_) => None,
        }
    }
}

/// Powers `M^0, ..., M^(count-1)` by repeated multiplication.
pub(crate) fn powers(m: &CMatrix, count: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(CMatrix::identity(m.nrows()));
    for k in 1..count {
        let next = &out[k - 1] * m;
        out.push(next);
    }
    out
}

/// Applies the derivative recurrence.
///
/// `base[i]` holds, for every unknown, the trace term with power `i`
/// (`trace(N^i W)` in parameter form). Row `i` of the result holds
/// `dq_(i+1)`: `dq_1 = base[0] / d` and for `i >= 2`
/// `dq_i = base[i-1] - trace(C^(i-1)) dq_1 - sum_{k=2}^{i-1} (C^(i-1))[0, k-1] dq_k`.
pub(crate) fn derivative_recurrence(values: &VersalValues, base: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let d = values.multiplicity();
    debug_assert_eq!(base.len(), d);
    let c = companion_matrix(values).into_matrix();
    let cpow = powers(&c, d);
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(d);
    let scale = 1.0 / d as f64;
    rows.push(base[0].iter().map(|&b| b * scale).collect());
    for i in 2..=d {
        let ci = &cpow[i - 1];
        let tr = ci.trace();
        let mut row: Vec<C64> = base[i - 1]
            .iter()
            .zip(&rows[0])
            .map(|(&b, &dq1)| b - tr * dq1)
            .collect();
        for k in 2..i {
            let coef = ci[(0, k - 1)];
            if coef.is_zero() {
                continue;
            }
            for (r, &dqk) in row.iter_mut().zip(&rows[k - 1]) {
                *r -= coef * dqk;
            }
        }
        rows.push(row);
    }
    rows
}

fn check_triple(triple: &InvariantTriple, values: &VersalValues) -> Result<()> {
    let d = triple.s.nrows();
    if values.multiplicity() != d || triple.x.ncols() != d || triple.y.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "triple has d = {d} but values have d = {}",
            values.multiplicity()
        )));
    }
    if triple.x.nrows() != triple.y.nrows() {
        return Err(Error::DimensionMismatch("X and Y have different row counts".into()));
    }
    Ok(())
}

/// Jacobian `[dq_i / dp_j]` from the derivative matrices `dA/dp_j` at the triple's point.
pub fn versal_jacobian(
    triple: &InvariantTriple,
    values: &VersalValues,
    d_a: &[CMatrix],
) -> Result<VersalLinearization> {
    check_triple(triple, values)?;
    let m = triple.x.nrows();
    let d = values.multiplicity();
    for (j, da) in d_a.iter().enumerate() {
        if da.nrows() != m || da.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "derivative {j} is {}x{}, expected {m}x{m}",
                da.nrows(),
                da.ncols()
            )));
        }
    }
    let n = d_a.len();
    let shifted = &triple.s - &CMatrix::identity(d).scale(values.mean_eigenvalue());
    let npow = powers(&shifted, d);
    let mut base = vec![vec![C64::zero(); n]; d];
    for (j, da) in d_a.iter().enumerate() {
        let w = triple.y.adjoint_mul(&(da * &triple.x));
        for (i, p) in npow.iter().enumerate() {
            // trace(P W) = sum_ab P[a,b] W[b,a]
            base[i][j] = p.contract(&w.transpose());
        }
    }
    let rows = derivative_recurrence(values, &base);
    let jac = CMatrix::from_fn(d, n, |i, j| rows[i][j]);
    Ok(VersalLinearization {
        values: values.clone(),
        derivatives: VersalDerivatives::Jacobian(jac),
    })
}

/// Gradients `dq_i / dA` laid out entrywise (`(j, k)` entry is `dq_i / da_jk`).
pub fn versal_matrix_gradients(
    triple: &InvariantTriple,
    values: &VersalValues,
) -> Result<VersalLinearization> {
    check_triple(triple, values)?;
    let m = triple.x.nrows();
    let d = values.multiplicity();
    let shifted = &triple.s - &CMatrix::identity(d).scale(values.mean_eigenvalue());
    let npow = powers(&shifted, d);
    let yh = triple.y.adjoint();
    let base: Vec<Vec<C64>> = npow
        .iter()
        .map(|p| (&(&triple.x * p) * &yh).transpose().into_vec())
        .collect();
    let rows = derivative_recurrence(values, &base);
    let grads = rows
        .into_iter()
        .map(|r| CMatrix::from_column_major(m, m, r))
        .collect();
    Ok(VersalLinearization {
        values: values.clone(),
        derivatives: VersalDerivatives::Gradients(grads),
    })
}
