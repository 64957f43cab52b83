//! First-order approximations from simple-eigenvalue sensitivities.
//!
//! Advisory only: the solver does not use this path since eigenvector
//! bases become ill-conditioned near a multiple eigenvalue.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::invariant::{diagonalize_cluster, ClusterSelection};
use crate::linalg::{dotc, norm2, CMatrix, C64};
use crate::deformation::{derivative_recurrence, versal_values, VersalDerivatives, VersalLinearization};

/// A simple eigenvalue with its parameter gradient `y^H (dA/dp_j) x`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSensitivity {
    pub lambda: C64,
    pub gradient: Vec<C64>,
}

pub fn eigen_sensitivities<F: MatrixFamily + ?Sized>(
    family: &F,
    p0: &[C64],
    cluster: &ClusterSelection,
) -> Result<Vec<EigenSensitivity>> {
    let a = family.evaluate(p0);
    let diag = diagonalize_cluster(&a, cluster)?;
    let derivs = family.derivatives(p0);
    Ok(diag
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let x = diag.x.col(i);
            let y = diag.y.col(i);
            let gradient = derivs.iter().map(|da| dotc(y, &da.matvec(x))).collect();
            EigenSensitivity { lambda, gradient }
        })
        .collect())
}

/// Versal Jacobian for `S = diag(lambda_1, .., lambda_d)`, using
/// `trace(N^i dS) = sum_l (lambda_l - q_1)^i grad lambda_l`.
pub fn versal_jacobian_diag(sensitivities: &[EigenSensitivity]) -> Result<VersalLinearization> {
    let d = sensitivities.len();
    if d == 0 {
        return Err(Error::InvalidCluster("no eigenvalues given".into()));
    }
    let n = sensitivities[0].gradient.len();
    if sensitivities.iter().any(|s| s.gradient.len() != n) {
        return Err(Error::DimensionMismatch("gradients differ in length".into()));
    }
    let lambdas: Vec<C64> = sensitivities.iter().map(|s| s.lambda).collect();
    let values = versal_values(&CMatrix::diag(&lambdas))?;
    let q1 = values.mean_eigenvalue();
    let mut base = alloc::vec![alloc::vec![C64::zero(); n]; d];
    for s in sensitivities {
        let mut w = C64::new(1.0, 0.0);
        for row in base.iter_mut() {
            for (b, &g) in row.iter_mut().zip(&s.gradient) {
                *b += w * g;
            }
            w *= s.lambda - q1;
        }
    }
    let rows = derivative_recurrence(&values, &base);
    let jac = CMatrix::from_fn(d, n, |i, j| rows[i][j]);
    Ok(VersalLinearization {
        values,
        derivatives: VersalDerivatives::Jacobian(jac),
    })
}

fn crossing_step(s1: &EigenSensitivity, s2: &EigenSensitivity, p0: &[C64], factor: f64) -> Result<Vec<C64>> {
    if s1.gradient.len() != p0.len() || s2.gradient.len() != p0.len() {
        return Err(Error::DimensionMismatch("gradient and point lengths differ".into()));
    }
    let delta = (s2.lambda - s1.lambda) * 0.5;
    if delta.is_zero() {
        return Ok(p0.to_vec());
    }
    let g: Vec<C64> = s2.gradient.iter().zip(&s1.gradient).map(|(a, b)| a - b).collect();
    let gn = norm2(&g);
    if gn == 0.0 {
        return Err(Error::ZeroGradientDifference);
    }
    let coef = delta * (factor / (gn * gn));
    Ok(p0.iter().zip(&g).map(|(&p, gi)| p - gi.conj() * coef).collect())
}

/// Nearest point of the double-eigenvalue surface to first order:
/// `p0 - conj(g) delta / |g|^2` with `g = grad lambda_2 - grad lambda_1`,
/// `delta = (lambda_2 - lambda_1) / 2`.
pub fn nearest_double_step(s1: &EigenSensitivity, s2: &EigenSensitivity, p0: &[C64]) -> Result<Vec<C64>> {
    crossing_step(s1, s2, p0, 1.0)
}

/// Treats the eigenvalues as smooth functions crossing linearly; lands twice as far.
pub fn naive_crossing_step(s1: &EigenSensitivity, s2: &EigenSensitivity, p0: &[C64]) -> Result<Vec<C64>> {
    crossing_step(s1, s2, p0, 2.0)
}
