//! Invariant-subspace triples `(S, X, Y)` with `A X = X S`, `Y^H A = S Y^H`
//! and `Y^H X = I` for a selected cluster of eigenvalues.
//!
//! The stable route goes through the complex Schur form: the selected
//! eigenvalues are moved to the leading diagonal positions, then the
//! off-diagonal block is removed by a triangular Sylvester solve. The
//! diagonalization route builds `S = diag(lambda_i)` from normalized left and
//! right eigenvectors and is only usable for simple eigenvalues.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, dotc, norm2, singular_values, CMatrix, Schur, C64, EPS};

/// Positions of `d` eigenvalues, indexing the diagonal of the Schur form
/// returned by [`schur_decompose`] (equivalently the list from [`eigenvalues`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClusterSelection {
    indices: Vec<usize>,
}

impl ClusterSelection {
    /// Validates that indices are distinct, non-empty and address an `m x m` matrix.
    pub fn new(indices: Vec<usize>, m: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidCluster("cluster is empty".into()));
        }
        if indices.len() > m {
            return Err(Error::InvalidCluster(format!(
                "cluster of size {} exceeds matrix dimension {m}",
                indices.len()
            )));
        }
        for (k, &i) in indices.iter().enumerate() {
            if i >= m {
                return Err(Error::InvalidCluster(format!("index {i} out of range for dimension {m}")));
            }
            if indices[..k].contains(&i) {
                return Err(Error::InvalidCluster(format!("index {i} selected twice")));
            }
        }
        Ok(Self { indices })
    }

    /// The leading `d` positions `0..d`.
    pub fn leading(d: usize, m: usize) -> Result<Self> {
        Self::new((0..d).collect(), m)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn multiplicity(&self) -> usize {
        self.indices.len()
    }

    /// Complement indices in increasing order.
    pub fn complement(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|i| !self.indices.contains(i)).collect()
    }
}

/// Residuals of the three defining identities of an [`InvariantTriple`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleResiduals {
    /// `|A X - X S|_F`
    pub right: f64,
    /// `|Y^H A - S Y^H|_F`
    pub left: f64,
    /// `|Y^H X - I|_F`
    pub normalization: f64,
}

#[derive(Clone, Debug)]
pub struct InvariantTriple {
    pub s: CMatrix,
    pub x: CMatrix,
    pub y: CMatrix,
    pub cluster: ClusterSelection,
}

impl InvariantTriple {
    pub fn multiplicity(&self) -> usize {
        self.s.nrows()
    }

    pub fn residuals(&self, a: &CMatrix) -> TripleResiduals {
        let d = self.s.nrows();
        let right = (&(a * &self.x) - &(&self.x * &self.s)).norm_fro();
        let yh = self.y.adjoint();
        let left = (&(&yh * a) - &(&self.s * &yh)).norm_fro();
        let normalization = (&self.y.adjoint_mul(&self.x) - &CMatrix::identity(d)).norm_fro();
        TripleResiduals {
            right,
            left,
            normalization,
        }
    }
}

fn check_input(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

pub fn schur_decompose(a: &CMatrix) -> Result<Schur> {
    check_input(a)?;
    linalg::schur(a)
}

/// Eigenvalues in Schur-diagonal order; cluster indices refer to this list.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    Ok(schur_decompose(a)?.eigenvalues())
}

/// Moves the selected eigenvalues, in the order given, to the leading diagonal positions.
pub fn reorder_cluster(schur: &Schur, cluster: &ClusterSelection) -> Result<Schur> {
    let m = schur.t.nrows();
    if cluster.indices().iter().any(|&i| i >= m) {
        return Err(Error::InvalidCluster(format!(
            "cluster indices exceed Schur dimension {m}"
        )));
    }
    let mut out = schur.clone();
    // order[pos] = original index currently at diagonal position pos
    let mut order: Vec<usize> = (0..m).collect();
    for (target, &idx) in cluster.indices().iter().enumerate() {
        let mut pos = order.iter().position(|&o| o == idx).expect("index tracked");
        while pos > target {
            linalg::swap_adjacent(&mut out, pos - 1).map_err(|e| match e {
                Error::SwapFailed { .. } => Error::SwapFailed {
                    first: order[pos - 1],
                    second: order[pos],
                },
                other => other,
            })?;
            order.swap(pos - 1, pos);
            pos -= 1;
        }
    }
    Ok(out)
}

/// Block-diagonalizes `A` for the selected cluster.
pub fn block_diagonalize(a: &CMatrix, cluster: &ClusterSelection) -> Result<InvariantTriple> {
    check_input(a)?;
    let m = a.nrows();
    if cluster.multiplicity() == m {
        return Ok(full_triple(a, cluster));
    }
    let schur = linalg::schur(a)?;
    triple_from_schur(a, &schur, cluster)
}

/// Trivial triple `S = A`, `X = Y = I` when the cluster is the whole spectrum.
fn full_triple(a: &CMatrix, cluster: &ClusterSelection) -> InvariantTriple {
    let m = a.nrows();
    InvariantTriple {
        s: a.clone(),
        x: CMatrix::identity(m),
        y: CMatrix::identity(m),
        cluster: cluster.clone(),
    }
}

/// Block-diagonalization of `A` starting from an existing Schur form of it.
pub fn triple_from_schur(
    a: &CMatrix,
    schur: &Schur,
    cluster: &ClusterSelection,
) -> Result<InvariantTriple> {
    let m = schur.t.nrows();
    let d = cluster.multiplicity();
    if d == m {
        return Ok(full_triple(a, cluster));
    }
    let a_norm = a.norm_fro();
    let ordered = reorder_cluster(schur, cluster)?;
    let t11 = ordered.t.submatrix(0, d, 0, d);
    let t12 = ordered.t.submatrix(0, d, d, m);
    let t22 = ordered.t.submatrix(d, m, d, m);
    let floor = EPS * a_norm.max(f64::MIN_POSITIVE);
    let z = linalg::triangular_sylvester(&t11, &t22, &(-&t12), floor).ok_or_else(|| {
        Error::IllSeparated {
            separation: separation_estimate(&t11, &t22),
        }
    })?;
    let q1 = ordered.q.submatrix(0, m, 0, d);
    let q2 = ordered.q.submatrix(0, m, d, m);
    // [X, X'] = Q [[I, Z], [0, I]],  [Y, Y']^H = [[I, -Z], [0, I]] Q^H
    let y = &q1 - &(&q2 * &z.adjoint());
    Ok(InvariantTriple {
        s: t11,
        x: q1,
        y,
        cluster: cluster.clone(),
    })
}

/// Smallest singular value of the Sylvester operator `Z -> S Z - Z S'`.
///
/// Returns infinity when either block is empty.
pub fn separation_estimate(s: &CMatrix, s_complement: &CMatrix) -> f64 {
    let d = s.nrows();
    let r = s_complement.nrows();
    if d == 0 || r == 0 {
        return f64::INFINITY;
    }
    // vec(S Z - Z S') = (I_r (x) S - S'^T (x) I_d) vec(Z), column-major vec.
    let op = CMatrix::from_fn(d * r, d * r, |row, col| {
        let (i, j) = (row % d, row / d);
        let (k, l) = (col % d, col / d);
        let mut v = C64::zero();
        if j == l {
            v += s[(i, k)];
        }
        if i == k {
            v -= s_complement[(l, j)];
        }
        v
    });
    singular_values(&op).last().copied().unwrap_or(0.0)
}

/// Separation of the selected cluster from the rest of the spectrum of `A`,
/// measured on the reordered Schur form.
pub fn cluster_separation(schur: &Schur, cluster: &ClusterSelection) -> Result<f64> {
    let m = schur.t.nrows();
    let d = cluster.multiplicity();
    if d == m {
        return Ok(f64::INFINITY);
    }
    let ordered = reorder_cluster(schur, cluster)?;
    Ok(separation_estimate(
        &ordered.t.submatrix(0, d, 0, d),
        &ordered.t.submatrix(d, m, d, m),
    ))
}

/// Eigenvalues with normalized right/left eigenvectors: `A x_i = lambda_i x_i`,
/// `y_i^H A = lambda_i y_i^H`, `y_i^H x_i = 1`, `|x_i| = 1`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub eigenvalues: Vec<C64>,
    pub x: CMatrix,
    pub y: CMatrix,
    pub cluster: ClusterSelection,
}

impl Diagonalization {
    /// The triple `S = diag(lambda)`, `X`, `Y`.
    pub fn triple(&self) -> InvariantTriple {
        InvariantTriple {
            s: CMatrix::diag(&self.eigenvalues),
            x: self.x.clone(),
            y: self.y.clone(),
            cluster: self.cluster.clone(),
        }
    }
}

pub fn diagonalize_cluster(a: &CMatrix, cluster: &ClusterSelection) -> Result<Diagonalization> {
    check_input(a)?;
    let m = a.nrows();
    let schur = linalg::schur(a)?;
    let t = &schur.t;
    let diag = t.diagonal();
    let tol = 10.0 * EPS * a.norm_fro().max(f64::MIN_POSITIVE);
    let d = cluster.multiplicity();
    let mut x = CMatrix::zeros(m, d);
    let mut y = CMatrix::zeros(m, d);
    let mut lambdas = Vec::with_capacity(d);
    for (col, &k) in cluster.indices().iter().enumerate() {
        let lambda = diag[k];
        if diag
            .iter()
            .enumerate()
            .any(|(i, &mu)| i != k && (mu - lambda).norm() <= tol)
        {
            return Err(Error::RepeatedEigenvalue { index: k });
        }
        // Right eigenvector of T: v_k = 1, back substitution above k.
        let mut v = alloc::vec![C64::zero(); m];
        v[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::zero();
            for l in i + 1..=k {
                acc -= t[(i, l)] * v[l];
            }
            v[i] = acc / (t[(i, i)] - lambda);
        }
        // Left eigenvector of T: w_k = 1, forward substitution below k.
        let mut w = alloc::vec![C64::zero(); m];
        w[k] = C64::new(1.0, 0.0);
        for j in k + 1..m {
            let mut acc = C64::zero();
            for i in k..j {
                acc -= w[i].conj() * t[(i, j)];
            }
            w[j] = (acc / (t[(j, j)] - lambda)).conj();
        }
        let mut xv = schur.q.matvec(&v);
        let mut yv = schur.q.matvec(&w);
        let nx = norm2(&xv);
        for z in xv.iter_mut() {
            *z /= nx;
        }
        let s = dotc(&yv, &xv);
        if s.norm() == 0.0 || !s.norm().is_finite() {
            return Err(Error::RepeatedEigenvalue { index: k });
        }
        let sc = s.conj();
        for z in yv.iter_mut() {
            *z /= sc;
        }
        x.col_mut(col).copy_from_slice(&xv);
        y.col_mut(col).copy_from_slice(&yv);
        lambdas.push(lambda);
    }
    Ok(Diagonalization {
        eigenvalues: lambdas,
        x,
        y,
        cluster: cluster.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn cluster_validation() {
        assert!(ClusterSelection::new(alloc::vec![0, 0], 3).is_err());
        assert!(ClusterSelection::new(alloc::vec![3], 3).is_err());
        assert!(ClusterSelection::new(alloc::vec![], 3).is_err());
        assert!(ClusterSelection::new(alloc::vec![0, 1, 2, 3], 3).is_err());
        let c = ClusterSelection::new(alloc::vec![2, 0], 4).unwrap();
        assert_eq!(c.complement(4), alloc::vec![1, 3]);
    }

    #[test]
    fn reorder_diagonal_swap() {
        let t = CMatrix::diag(&[c(5.0), c(7.0)]);
        let s = Schur {
            q: CMatrix::identity(2),
            t: t.clone(),
        };
        let cl = ClusterSelection::new(alloc::vec![1], 2).unwrap();
        let r = reorder_cluster(&s, &cl).unwrap();
        assert_eq!(r.t.diagonal(), alloc::vec![c(7.0), c(5.0)]);
        assert!((&r.reconstruct() - &t).norm_fro() < 1e-14);
    }

    #[test]
    fn reorder_leading_is_identity() {
        let t = CMatrix::from_real_rows(&[[1.0, 4.0, 2.0], [0.0, 2.0, 1.0], [0.0, 0.0, 3.0]]);
        let s = Schur {
            q: CMatrix::identity(3),
            t: t.clone(),
        };
        let r = reorder_cluster(&s, &ClusterSelection::leading(2, 3).unwrap()).unwrap();
        assert_eq!(r.t, t);
        assert_eq!(r.q, CMatrix::identity(3));
    }

    #[test]
    fn reorder_brings_selection_forward_in_order() {
        let t = CMatrix::from_real_rows(&[[1.0, 4.0, 2.0], [0.0, 2.0, 1.0], [0.0, 0.0, 3.0]]);
        let s = Schur {
            q: CMatrix::identity(3),
            t: t.clone(),
        };
        let cl = ClusterSelection::new(alloc::vec![2, 1], 3).unwrap();
        let r = reorder_cluster(&s, &cl).unwrap();
        let diag = r.t.diagonal();
        assert!((diag[0] - c(3.0)).norm() < 1e-14);
        assert!((diag[1] - c(2.0)).norm() < 1e-14);
        assert!((diag[2] - c(1.0)).norm() < 1e-14);
        assert!((&r.reconstruct() - &t).norm_fro() < 1e-13);
        assert!(r.t.is_upper_triangular());
    }

    #[test]
    fn block_diagonal_input_needs_no_coupling() {
        let a = CMatrix::from_real_rows(&[
            [1.0, 2.0, 0.0, 0.0],
            [0.5, -1.0, 0.0, 0.0],
            [0.0, 0.0, 5.0, 1.0],
            [0.0, 0.0, 0.0, 6.0],
        ]);
        let ev = eigenvalues(&a).unwrap();
        let idx: Vec<usize> = (0..4).filter(|&i| ev[i].re.abs() < 3.0).collect();
        let cl = ClusterSelection::new(idx, 4).unwrap();
        let tr = block_diagonalize(&a, &cl).unwrap();
        let r = tr.residuals(&a);
        assert!(r.right < 1e-12 && r.left < 1e-12 && r.normalization < 1e-12);
        // X spans the leading coordinate plane.
        for j in 0..2 {
            assert!(tr.x[(2, j)].norm() < 1e-12 && tr.x[(3, j)].norm() < 1e-12);
        }
        let s0 = a.submatrix(0, 2, 0, 2);
        assert!((tr.s.trace() - s0.trace()).norm() < 1e-12);
    }

    #[test]
    fn separation_trivial_cases() {
        let one = CMatrix::diag(&[c(1.0)]);
        let three = CMatrix::diag(&[c(3.0)]);
        assert!((separation_estimate(&one, &three) - 2.0).abs() < 1e-15);
        assert_eq!(separation_estimate(&one, &one), 0.0);
        assert_eq!(separation_estimate(&one, &CMatrix::zeros(0, 0)), f64::INFINITY);
    }

    #[test]
    fn overlapping_cluster_is_rejected_with_separation() {
        let a = CMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        let cl = ClusterSelection::new(alloc::vec![0], 2).unwrap();
        match block_diagonalize(&a, &cl) {
            Err(Error::IllSeparated { separation }) => assert!(separation < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagonalize_simple_cases() {
        let a = CMatrix::diag(&[c(4.0), c(5.0)]);
        let dg = diagonalize_cluster(&a, &ClusterSelection::leading(2, 2).unwrap()).unwrap();
        assert_eq!(dg.x, CMatrix::identity(2));
        assert_eq!(dg.y, CMatrix::identity(2));

        let a = CMatrix::from_real_rows(&[[2.0, 1.0], [0.0, 3.0]]);
        let ev = eigenvalues(&a).unwrap();
        let k = ev.iter().position(|z| (z - c(2.0)).norm() < 1e-12).unwrap();
        let dg = diagonalize_cluster(&a, &ClusterSelection::new(alloc::vec![k], 2).unwrap()).unwrap();
        let (x, y) = (dg.x.col(0), dg.y.col(0));
        assert!((x[0].norm() - 1.0).abs() < 1e-14 && x[1].norm() < 1e-14);
        // y proportional to (1, -1) with y^H x = 1 and x = (1, 0) up to phase.
        assert!((dotc(y, x) - c(1.0)).norm() < 1e-14);
        assert!((y[0] + y[1]).norm() < 1e-14);
        assert!((y[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonalize_rejects_repeated() {
        let a = CMatrix::identity(3);
        let err = diagonalize_cluster(&a, &ClusterSelection::leading(2, 3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::RepeatedEigenvalue { .. }));
    }
}
