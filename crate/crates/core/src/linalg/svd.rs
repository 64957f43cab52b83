use alloc::vec::Vec;

#[allow(unused_imports)] // resolved inherently when std is in the build graph
use num_traits::Float;


use super::{dotc, norm2, CMatrix, EPS};

/// Singular values in descending order, by one-sided Jacobi rotations.
///
/// One-sided Jacobi keeps small singular values accurate relative to their
/// own size, which matters for separation estimates near coalescence.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut w = if a.nrows() >= a.ncols() { a.clone() } else { a.adjoint() };
    let m = w.nrows();
    let n = w.ncols();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm2(w.col(p)).powi(2);
                let beta = norm2(w.col(q)).powi(2);
                let gamma = dotc(w.col(p), w.col(q));
                let g = gamma.norm();
                if g == 0.0 || g <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let xp = w[(i, p)];
                    let xq = w[(i, q)] * phase.conj();
                    w[(i, p)] = xp * c - xq * s;
                    w[(i, q)] = xp * s + xq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Spectral condition number `sigma_max / sigma_min`; infinite when rank deficient.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}
