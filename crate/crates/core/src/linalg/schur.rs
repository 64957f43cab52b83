use alloc::vec::Vec;

use num_traits::Zero;

use super::{norm2, CMatrix, Givens, C64, EPS};
use crate::error::{Error, Result};

/// Complex Schur factorization `A = Q T Q^H` with `Q` unitary and `T` upper triangular.
#[derive(Clone, Debug)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    /// Diagonal of `T`, i.e. the eigenvalues in their current order.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.t.diagonal()
    }

    pub fn reconstruct(&self) -> CMatrix {
        &(&self.q * &self.t) * &self.q.adjoint()
    }
}

/// Householder reduction to upper Hessenberg form, returning `(Q, H)` with `A = Q H Q^H`.
pub fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return (q, h);
    }
    let mut v: Vec<C64> = Vec::with_capacity(n);
    for k in 0..n - 2 {
        let tail = norm2(&h.col(k)[k + 2..]);
        if tail == 0.0 {
            continue;
        }
        v.clear();
        v.extend_from_slice(&h.col(k)[k + 1..]);
        let x0 = v[0];
        let alpha = norm2(&v);
        let phase = if x0.is_zero() { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let beta = -phase * alpha;
        v[0] -= beta;
        let vn = norm2(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        let off = k + 1;
        for j in k..n {
            let col = &mut h.col_mut(j)[off..];
            let w: C64 = v.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * 2.0;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= vi * w;
            }
        }
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let w: C64 = v.iter().enumerate().map(|(l, vl)| m[(i, off + l)] * vl).sum::<C64>() * 2.0;
                for (l, vl) in v.iter().enumerate() {
                    m[(i, off + l)] -= w * vl.conj();
                }
            }
        }
        h[(k + 1, k)] = beta;
        for i in k + 2..n {
            h[(i, k)] = C64::zero();
        }
    }
    (q, h)
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let r1 = mean + disc;
    let r2 = mean - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Complex Schur decomposition via Hessenberg reduction and shifted QR.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.nrows();
    let (mut q, mut h) = hessenberg(a);
    if n < 2 {
        return Ok(Schur { q, t: h });
    }
    let anorm = h.norm_fro().max(f64::MIN_POSITIVE);
    let max_its = 30 * n.max(10);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = anorm;
            }
            if sub <= EPS * s {
                h[(lo, lo - 1)] = C64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_its {
            return Err(Error::SchurNoConvergence { iterations: total });
        }
        let shift = if its.is_multiple_of(10) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (g, r) = Givens::new(x, y);
            let start = if k > lo { k - 1 } else { k };
            g.rotate_rows(&mut h, k, start..n);
            if k > lo {
                h[(k, k - 1)] = r;
                h[(k + 1, k - 1)] = C64::zero();
            }
            g.rotate_cols(&mut h, k, 0..(k + 3).min(hi + 1));
            g.rotate_cols(&mut q, k, 0..n);
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = C64::zero();
        }
    }
    Ok(Schur { q, t: h })
}

/// Swaps the diagonal entries `k` and `k + 1` of an upper triangular Schur pair in place.
pub fn swap_adjacent(s: &mut Schur, k: usize) -> Result<()> {
    let n = s.t.nrows();
    let a = s.t[(k, k)];
    let b = s.t[(k + 1, k + 1)];
    let x = s.t[(k, k + 1)];
    if a == b {
        return Ok(());
    }
    let (g, _) = Givens::new(x, b - a);
    g.rotate_rows(&mut s.t, k, k..n);
    g.rotate_cols(&mut s.t, k, 0..k + 2);
    g.rotate_cols(&mut s.q, k, 0..n);
    let scale = a.norm() + b.norm() + x.norm();
    if s.t[(k + 1, k)].norm() > 100.0 * EPS * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SwapFailed {
            first: k,
            second: k + 1,
        });
    }
    s.t[(k + 1, k)] = C64::zero();
    s.t[(k, k)] = b;
    s.t[(k + 1, k + 1)] = a;
    Ok(())
}

/// Solves `T11 Z - Z T22 = C` for upper triangular `T11` (d x d) and `T22` (r x r).
///
/// Returns `None` when some pivot `T11[i,i] - T22[j,j]` falls below `pivot_floor`.
pub fn triangular_sylvester(
    t11: &CMatrix,
    t22: &CMatrix,
    c: &CMatrix,
    pivot_floor: f64,
) -> Option<CMatrix> {
    let d = t11.nrows();
    let r = t22.nrows();
    let mut z = CMatrix::zeros(d, r);
    let mut rhs = alloc::vec![C64::zero(); d];
    for j in 0..r {
        rhs.copy_from_slice(c.col(j));
        for k in 0..j {
            let t = t22[(k, j)];
            if t.is_zero() {
                continue;
            }
            for i in 0..d {
                rhs[i] += z[(i, k)] * t;
            }
        }
        let shift = t22[(j, j)];
        for i in (0..d).rev() {
            let mut acc = rhs[i];
            for l in i + 1..d {
                acc -= t11[(i, l)] * z[(l, j)];
            }
            let pivot = t11[(i, i)] - shift;
            if pivot.norm() <= pivot_floor {
                return None;
            }
            z[(i, j)] = acc / pivot;
        }
    }
    if z.is_finite() {
        Some(z)
    } else {
        None
    }
}
