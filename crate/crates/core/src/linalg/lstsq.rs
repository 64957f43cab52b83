use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{norm2, CMatrix, C64};
use crate::error::{Error, Result};

struct PivotedQr {
    /// Thin orthonormal factor, `m x k`.
    q: CMatrix,
    /// Upper trapezoidal factor, `k x n`.
    r: CMatrix,
    perm: Vec<usize>,
}

/// Householder QR with column pivoting: `A P = Q R`.
fn pivoted_qr(a: &CMatrix) -> PivotedQr {
    let m = a.nrows();
    let n = a.ncols();
    let kmax = m.min(n);
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(kmax);
    for k in 0..kmax {
        let (mut best, mut best_norm) = (k, -1.0);
        for j in k..n {
            let nj = norm2(&r.col(j)[k..]);
            if nj > best_norm {
                best = j;
                best_norm = nj;
            }
        }
        if best != k {
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, best)];
                r[(i, best)] = t;
            }
            perm.swap(k, best);
        }
        let x = &r.col(k)[k..];
        let alpha = norm2(x);
        if alpha == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = x[0];
        let phase = if x0.is_zero() { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let beta = -phase * alpha;
        let mut v: Vec<C64> = x.to_vec();
        v[0] -= beta;
        let vn = norm2(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        for j in k..n {
            let col = &mut r.col_mut(j)[k..];
            let w: C64 = v.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * 2.0;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= vi * w;
            }
        }
        r[(k, k)] = beta;
        for i in k + 1..m {
            r[(i, k)] = C64::zero();
        }
        reflectors.push(Some(v));
    }
    let mut q = CMatrix::zeros(m, kmax);
    for i in 0..kmax {
        q[(i, i)] = C64::new(1.0, 0.0);
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        let Some(v) = v else { continue };
        for j in 0..kmax {
            let col = &mut q.col_mut(j)[k..];
            let w: C64 = v.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * 2.0;
            for (c, vi) in col.iter_mut().zip(v) {
                *c -= vi * w;
            }
        }
    }
    PivotedQr {
        q,
        r: r.submatrix(0, kmax, 0, n),
        perm,
    }
}

fn numerical_rank(r: &CMatrix, rank_tol: f64) -> usize {
    let k = r.nrows().min(r.ncols());
    let top = if k > 0 { r[(0, 0)].norm() } else { 0.0 };
    (0..k)
        .take_while(|&i| {
            let v = r[(i, i)].norm();
            v > 0.0 && v > rank_tol * top
        })
        .count()
}

/// Solves `M x = b` in the minimum-norm (underdetermined) or least-squares
/// (overdetermined) sense.
///
/// Rows are equilibrated to unit norm first. Fails with [`Error::RankDeficient`]
/// when `M` is numerically rank deficient relative to `rank_tol`.
pub fn min_norm_solve(m: &CMatrix, b: &[C64], rank_tol: f64) -> Result<Vec<C64>> {
    let rows = m.nrows();
    let n = m.ncols();
    if b.len() != rows {
        return Err(Error::DimensionMismatch(alloc::format!(
            "system has {rows} rows but right-hand side has length {}",
            b.len()
        )));
    }
    if rows == 0 {
        return Ok(vec![C64::zero(); n]);
    }
    let mut scaled = m.clone();
    let mut rhs = b.to_vec();
    for i in 0..rows {
        let s = norm2(&m.row(i));
        if s == 0.0 || !s.is_finite() {
            return Err(Error::RankDeficient {
                rank: rows - 1,
                rows,
            });
        }
        for j in 0..n {
            scaled[(i, j)] /= s;
        }
        rhs[i] /= s;
    }
    if rows <= n {
        // Underdetermined: factor M^H P = Q R, then R^H (Q^H x) = P^T b.
        let PivotedQr { q, r, perm } = pivoted_qr(&scaled.adjoint());
        let rank = numerical_rank(&r, rank_tol);
        if rank < rows {
            return Err(Error::RankDeficient { rank, rows });
        }
        let mut z = vec![C64::zero(); rows];
        for i in 0..rows {
            let mut acc = rhs[perm[i]];
            for l in 0..i {
                acc -= r[(l, i)].conj() * z[l];
            }
            z[i] = acc / r[(i, i)].conj();
        }
        Ok(q.matvec(&z))
    } else {
        // Overdetermined: least squares via M P = Q R.
        let PivotedQr { q, r, perm } = pivoted_qr(&scaled);
        let rank = numerical_rank(&r, rank_tol);
        if rank < n {
            return Err(Error::RankDeficient { rank, rows });
        }
        let qb: Vec<C64> = (0..n).map(|j| super::dotc(q.col(j), &rhs)).collect();
        let mut y = vec![C64::zero(); n];
        for i in (0..n).rev() {
            let mut acc = qb[i];
            for l in i + 1..n {
                acc -= r[(i, l)] * y[l];
            }
            y[i] = acc / r[(i, i)];
        }
        let mut x = vec![C64::zero(); n];
        for (k, &p) in perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "lu_solve expects a square system, got {}x{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().partial_cmp(&lu[(j, k)].norm()).unwrap())
            .unwrap_or(k);
        if lu[(p, k)].norm() <= f64::EPSILON * scale * 1e-2 {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
        }
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
            let t = x[k];
            x[i] -= f * t;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= lu[(i, j)] * x[j];
        }
        x[i] = acc / lu[(i, i)];
    }
    Ok(x)
}
