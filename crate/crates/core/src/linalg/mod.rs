//! Dense complex linear algebra: Schur factorization with reordering,
//! triangular Sylvester solves, singular values and minimum-norm least squares.

mod lstsq;
mod matrix;
mod schur;
mod svd;

pub use lstsq::{lu_solve, min_norm_solve};
pub use matrix::{dotc, norm2, CMatrix};
pub use schur::{hessenberg, schur, swap_adjacent, triangular_sylvester, Schur};
pub use svd::{condition_number, singular_values};

pub type C64 = num_complex::Complex<f64>;

pub const EPS: f64 = f64::EPSILON;

/// Complex plane rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Givens {
    pub c: f64,
    pub s: C64,
}

impl Givens {
    pub fn new(a: C64, b: C64) -> (Self, C64) {
        use num_traits::Zero;
        if b.is_zero() {
            return (Self { c: 1.0, s: C64::zero() }, a);
        }
        if a.is_zero() {
            let nb = b.norm();
            return (Self { c: 0.0, s: b.conj() / nb }, C64::new(nb, 0.0));
        }
        let na = a.norm();
        let nb = b.norm();
        let nrm = num_traits::Float::hypot(na, nb);
        let phase = a / na;
        (
            Self {
                c: na / nrm,
                s: phase * b.conj() / nrm,
            },
            phase * nrm,
        )
    }

    /// Left-multiplies rows `k` and `k + 1` over columns `cols`.
    pub fn rotate_rows(&self, m: &mut CMatrix, k: usize, cols: core::ops::Range<usize>) {
        for j in cols {
            let t1 = m[(k, j)];
            let t2 = m[(k + 1, j)];
            m[(k, j)] = t1 * self.c + self.s * t2;
            m[(k + 1, j)] = -self.s.conj() * t1 + t2 * self.c;
        }
    }

    /// Right-multiplies columns `k` and `k + 1` by `G^H` over rows `rows`.
    pub fn rotate_cols(&self, m: &mut CMatrix, k: usize, rows: core::ops::Range<usize>) {
        for i in rows {
            let t1 = m[(i, k)];
            let t2 = m[(i, k + 1)];
            m[(i, k)] = t1 * self.c + self.s.conj() * t2;
            m[(i, k + 1)] = -self.s * t1 + t2 * self.c;
        }
    }
}
