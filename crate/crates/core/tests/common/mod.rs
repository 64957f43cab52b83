#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use versal::{eigenvalues, CMatrix, MatrixFamily, C64};

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut StdRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut StdRng, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| random_complex(rng))
}

/// Monic polynomial coefficients, highest degree first.
pub fn poly(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![c(1.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (k, &a) in c.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= a * r;
        }
        c = next;
    }
    c
}

/// q-values straight from the cluster eigenvalues:
/// `q_1` is their mean and `-q_i` the coefficients of the shifted characteristic polynomial.
pub fn q_from_eigenvalues(eigs: &[C64]) -> Vec<C64> {
    let d = eigs.len();
    let mean = eigs.iter().sum::<C64>() / d as f64;
    let shifted: Vec<C64> = eigs.iter().map(|&l| l - mean).collect();
    let coef = poly(&shifted);
    let mut q = vec![mean];
    q.extend((2..=d).map(|i| -coef[i]));
    q
}

/// Eigenvalues of `a` matched one-to-one (greedily) to `targets`.
pub fn matched_eigenvalues(a: &CMatrix, targets: &[C64]) -> Vec<C64> {
    let mut ev = eigenvalues(a).unwrap();
    targets
        .iter()
        .map(|&t| {
            let (k, _) = ev
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - t).norm().partial_cmp(&(y.1 - t).norm()).unwrap())
                .unwrap();
            ev.remove(k)
        })
        .collect()
}

/// Central-difference Jacobian of the cluster q-values.
pub fn fd_q_jacobian<F: MatrixFamily>(family: &F, p: &[C64], cluster_eigs: &[C64], h: f64) -> CMatrix {
    let d = cluster_eigs.len();
    let n = p.len();
    let mut jac = CMatrix::zeros(d, n);
    for j in 0..n {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let qp = q_from_eigenvalues(&matched_eigenvalues(&family.evaluate(&plus), cluster_eigs));
        let qm = q_from_eigenvalues(&matched_eigenvalues(&family.evaluate(&minus), cluster_eigs));
        for i in 0..d {
            jac[(i, j)] = (qp[i] - qm[i]) / (2.0 * h);
        }
    }
    jac
}

pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm_fro() / b.norm_fro().max(1.0)
}
