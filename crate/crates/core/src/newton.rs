//! Newton iteration on the versal functions `q_2 = .. = q_d = 0`.

use alloc::vec::Vec;

use num_traits::Zero;
#[allow(unused_imports)] // resolved inherently when std is in the build graph
use num_traits::Float;

use crate::chain::{jordan_chain, JordanChain};
use crate::error::{Error, Result};
use crate::family::{MatrixFamily, ParameterDomain};
use crate::invariant::{cluster_separation, schur_decompose, triple_from_schur, ClusterSelection, InvariantTriple};
use crate::linalg::{min_norm_solve, norm2, CMatrix, Schur, C64, EPS};
use crate::deformation::{versal_jacobian, versal_matrix_gradients, versal_values, VersalLinearization, VersalValues};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStrategy {
    /// Minimum-norm step from the current point.
    LeastSquaresMinNorm,
    /// Step to the point of the linearized surface nearest the starting point.
    NearestToReference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonConfig {
    pub max_iterations: usize,
    /// Relative to `max(1, |p0|)`.
    pub step_tolerance: f64,
    /// Bound on `|q_i|`, `i >= 2`, relative to `max(1, |A|_F)`.
    pub q_tolerance: f64,
    pub solve_strategy: SolveStrategy,
    pub real_parameters: bool,
    pub target_eigenvalue: Option<C64>,
    /// Warn when the cluster separation drops below this times `|A|_F`.
    pub separation_warning_threshold: f64,
    pub step_halving: bool,
    /// Relative rank cutoff for the linearized system.
    pub rank_tolerance: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            step_tolerance: 1e-12,
            q_tolerance: 1e-10,
            solve_strategy: SolveStrategy::NearestToReference,
            real_parameters: false,
            target_eigenvalue: None,
            separation_warning_threshold: 1e3 * EPS,
            step_halving: false,
            rank_tolerance: 1e-13,
        }
    }
}

impl NewtonConfig {
    fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if self.max_iterations == 0
            || !ok(self.step_tolerance)
            || !ok(self.q_tolerance)
            || !ok(self.separation_warning_threshold)
            || !ok(self.rank_tolerance)
        {
            return Err(Error::InvalidConfig);
        }
        if let Some(t) = self.target_eigenvalue {
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(())
    }
}

/// Initial cluster: explicit indices, or chosen automatically for multiplicity `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialCluster {
    Auto(usize),
    Given(ClusterSelection),
}

impl InitialCluster {
    pub fn multiplicity(&self) -> usize {
        match self {
            InitialCluster::Auto(d) => *d,
            InitialCluster::Given(c) => c.multiplicity(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverWarning {
    IllSeparated { iteration: usize, separation: f64 },
    /// The final Jordan chain could not be formed.
    ChainUnavailable(Error),
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// Point at which the linearization was taken.
    pub point: Vec<C64>,
    pub q: Vec<C64>,
    pub step_norm: f64,
    pub cluster: Vec<usize>,
    pub separation: f64,
    pub lambda_app: C64,
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub converged: bool,
    /// Parameters, or the column-major entries of `A*` in matrix mode.
    pub p_star: Vec<C64>,
    /// Matrix size in matrix mode.
    pub matrix_dim: Option<usize>,
    pub iterations: Vec<IterationRecord>,
    pub distance: f64,
    pub chain: Option<JordanChain>,
    pub final_values: Option<VersalValues>,
    pub warnings: Vec<SolverWarning>,
}

impl NewtonResult {
    pub fn matrix(&self) -> Option<CMatrix> {
        self.matrix_dim
            .map(|m| CMatrix::from_column_major(m, m, self.p_star.clone()))
    }

    /// Distance after the first step.
    pub fn one_step_distance(&self, p0: &[C64]) -> Option<f64> {
        let second = match self.iterations.get(1) {
            Some(r) => r.point.clone(),
            None if self.converged => self.p_star.clone(),
            None => return None,
        };
        Some(distance(&second, p0))
    }
}

/// The linearized system `M dp = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub matrix: CMatrix,
    pub rhs: Vec<C64>,
    /// Rows are real and the unknowns are to be kept real.
    pub real: bool,
}

/// Rows `q_i + <dq_i, dp> = 0` for `i = 2..d`, plus the target row when set.
///
/// With `real_parameters`, a row with a non-negligible imaginary part becomes
/// two real rows; otherwise its real part is kept.
pub fn assemble_linear_system(lin: &VersalLinearization, config: &NewtonConfig) -> LinearSystem {
    let d = lin.values.multiplicity();
    let mut rows: Vec<(Vec<C64>, C64)> = Vec::with_capacity(d);
    for i in 2..=d {
        rows.push((lin.row(i), -lin.values.get(i)));
    }
    if let Some(t) = config.target_eigenvalue {
        rows.push((lin.row(1), t - lin.values.get(1)));
    }
    if !config.real_parameters {
        let n = lin.num_unknowns();
        let matrix = CMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
        let rhs = rows.into_iter().map(|r| r.1).collect();
        return LinearSystem { matrix, rhs, real: false };
    }
    let mut real_rows: Vec<(Vec<C64>, C64)> = Vec::with_capacity(2 * rows.len());
    for (coef, rhs) in rows {
        let re: Vec<C64> = coef.iter().map(|z| C64::new(z.re, 0.0)).collect();
        let im: Vec<C64> = coef.iter().map(|z| C64::new(z.im, 0.0)).collect();
        let size = (norm2(&coef).powi(2) + rhs.norm_sqr()).sqrt();
        let imag = (norm2(&im).powi(2) + rhs.im * rhs.im).sqrt();
        real_rows.push((re, C64::new(rhs.re, 0.0)));
        if imag > 1e-8 * size {
            real_rows.push((im, C64::new(rhs.im, 0.0)));
        }
    }
    let n = lin.num_unknowns();
    let matrix = CMatrix::from_fn(real_rows.len(), n, |i, j| real_rows[i].0[j]);
    let rhs = real_rows.into_iter().map(|r| r.1).collect();
    LinearSystem { matrix, rhs, real: true }
}

/// Newton step `dp` from `current`.
///
/// `NearestToReference` solves `M (p - reference) = rhs + M (current - reference)`
/// in minimum norm, so the new point is the one on the linearized surface
/// closest to `reference`. With `reference == current` both strategies agree.
pub fn solve_step(
    system: &LinearSystem,
    current: &[C64],
    reference: &[C64],
    strategy: SolveStrategy,
    rank_tolerance: f64,
) -> Result<Vec<C64>> {
    let n = system.matrix.ncols();
    if current.len() != n || reference.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "system has {n} unknowns, points have {} and {}",
            current.len(),
            reference.len()
        )));
    }
    let project = |v: Vec<C64>| -> Vec<C64> {
        if system.real {
            v.into_iter().map(|z| C64::new(z.re, 0.0)).collect()
        } else {
            v
        }
    };
    match strategy {
        SolveStrategy::LeastSquaresMinNorm => {
            Ok(project(min_norm_solve(&system.matrix, &system.rhs, rank_tolerance)?))
        }
        SolveStrategy::NearestToReference => {
            let offset: Vec<C64> = project(current.iter().zip(reference).map(|(a, b)| a - b).collect());
            let shift = system.matrix.matvec(&offset);
            let rhs: Vec<C64> = system.rhs.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let target = project(min_norm_solve(&system.matrix, &rhs, rank_tolerance)?);
            Ok(target.iter().zip(&offset).map(|(t, o)| t - o).collect())
        }
    }
}

/// `q_1 + <dq_1, dp>`.
pub fn approximate_eigenvalue(lin: &VersalLinearization, dp: &[C64]) -> C64 {
    let row = lin.row(1);
    lin.values.get(1) + row.iter().zip(dp).fold(C64::zero(), |acc, (a, b)| acc + a * b)
}

fn by_distance(eigenvalues: &[C64], center: C64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (eigenvalues[a] - center).norm();
        let db = (eigenvalues[b] - center).norm();
        da.partial_cmp(&db).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    order
}

/// Index of the conjugate partner of `i` among `eigenvalues`, if any.
fn conjugate_partner(eigenvalues: &[C64], i: usize, taken: &[bool], tol: f64) -> Option<usize> {
    let target = eigenvalues[i].conj();
    let mut best: Option<(usize, f64)> = None;
    for (j, &mu) in eigenvalues.iter().enumerate() {
        if j == i || taken[j] {
            continue;
        }
        let dist = (mu - target).norm();
        if dist <= tol && best.is_none_or(|(_, b)| dist < b) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// The `d` eigenvalues nearest `lambda_app` (lower index on ties).
///
/// With `conjugate_pairs`, non-real eigenvalues are only taken together with
/// their conjugate partner.
pub fn select_cluster(
    eigenvalues: &[C64],
    lambda_app: C64,
    d: usize,
    conjugate_pairs: bool,
) -> Result<ClusterSelection> {
    let m = eigenvalues.len();
    if d == 0 || d > m {
        return Err(Error::InvalidCluster(alloc::format!(
            "cannot select {d} of {m} eigenvalues"
        )));
    }
    let order = by_distance(eigenvalues, lambda_app);
    if !conjugate_pairs {
        return ClusterSelection::new(order[..d].to_vec(), m);
    }
    let scale = eigenvalues.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    let tol = 1e-8 * scale;
    let mut taken = alloc::vec![false; m];
    let mut picked = Vec::with_capacity(d);
    for &i in &order {
        if picked.len() == d {
            break;
        }
        if taken[i] {
            continue;
        }
        if eigenvalues[i].im.abs() <= tol {
            taken[i] = true;
            picked.push(i);
            continue;
        }
        if picked.len() + 2 > d {
            continue;
        }
        let Some(j) = conjugate_partner(eigenvalues, i, &taken, tol) else {
            continue;
        };
        taken[i] = true;
        taken[j] = true;
        picked.push(i);
        picked.push(j);
    }
    if picked.len() != d {
        return Err(Error::ConjugatePairing { d });
    }
    ClusterSelection::new(picked, m)
}

/// The d-subset with the smallest diameter among "d nearest to each eigenvalue".
pub fn minimal_spread_cluster(eigenvalues: &[C64], d: usize) -> Result<ClusterSelection> {
    let m = eigenvalues.len();
    if d == 0 || d > m {
        return Err(Error::InvalidCluster(alloc::format!(
            "cannot select {d} of {m} eigenvalues"
        )));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &center in eigenvalues {
        let idx: Vec<usize> = by_distance(eigenvalues, center)[..d].to_vec();
        let mut spread = 0.0f64;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                spread = spread.max((eigenvalues[i] - eigenvalues[j]).norm());
            }
        }
        if best.as_ref().is_none_or(|(s, _)| spread < *s) {
            best = Some((spread, idx));
        }
    }
    let (_, idx) = best.expect("m >= 1");
    ClusterSelection::new(idx, m)
}

/// Largest number of subsets tried by the exhaustive initial-cluster search.
const MAX_SUBSETS: usize = 512;

fn subsets(m: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    if d == 0 || d > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        if out.len() > MAX_SUBSETS {
            return Vec::new();
        }
        let mut i = d;
        while i > 0 && cur[i - 1] == m - d + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for k in i..d {
            cur[k] = cur[k - 1] + 1;
        }
    }
}

/// How unknowns map to matrices and how a linearization is formed.
trait Problem {
    fn num_unknowns(&self) -> usize;
    fn matrix_at(&self, p: &[C64]) -> CMatrix;
    fn linearize(
        &self,
        p: &[C64],
        triple: &InvariantTriple,
        values: &VersalValues,
    ) -> Result<VersalLinearization>;
    fn matrix_dim(&self) -> Option<usize>;
}

struct FamilyProblem<'a, F: MatrixFamily + ?Sized>(&'a F);

impl<F: MatrixFamily + ?Sized> Problem for FamilyProblem<'_, F> {
    fn num_unknowns(&self) -> usize {
        self.0.num_params()
    }

    fn matrix_at(&self, p: &[C64]) -> CMatrix {
        self.0.evaluate(p)
    }

    fn linearize(&self, p: &[C64], triple: &InvariantTriple, values: &VersalValues) -> Result<VersalLinearization> {
        versal_jacobian(triple, values, &self.0.derivatives(p))
    }

    fn matrix_dim(&self) -> Option<usize> {
        None
    }
}

struct EntryProblem(usize);

impl Problem for EntryProblem {
    fn num_unknowns(&self) -> usize {
        self.0 * self.0
    }

    fn matrix_at(&self, p: &[C64]) -> CMatrix {
        CMatrix::from_column_major(self.0, self.0, p.to_vec())
    }

    fn linearize(&self, _p: &[C64], triple: &InvariantTriple, values: &VersalValues) -> Result<VersalLinearization> {
        versal_matrix_gradients(triple, values)
    }

    fn matrix_dim(&self) -> Option<usize> {
        Some(self.0)
    }
}

struct Local {
    a: CMatrix,
    schur: Schur,
    cluster: ClusterSelection,
    triple: InvariantTriple,
    values: VersalValues,
}

fn pairing(config: &NewtonConfig, a: &CMatrix, lambda: C64) -> bool {
    config.real_parameters && a.is_real() && lambda.im.abs() <= 1e-8 * lambda.norm().max(1.0)
}

fn check_matrix(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn local_at<P: Problem>(
    problem: &P,
    p: &[C64],
    cluster: Option<&ClusterSelection>,
    lambda_app: Option<C64>,
    d: usize,
    config: &NewtonConfig,
) -> Result<Local> {
    let a = problem.matrix_at(p);
    check_matrix(&a)?;
    let schur = schur_decompose(&a)?;
    let cluster = match (lambda_app, cluster) {
        (Some(l), _) => select_cluster(&schur.eigenvalues(), l, d, pairing(config, &a, l))?,
        (None, Some(c)) => c.clone(),
        (None, None) => unreachable!("cluster or lambda_app is always set"),
    };
    let triple = triple_from_schur(&a, &schur, &cluster)?;
    let values = versal_values(&triple.s)?;
    Ok(Local { a, schur, cluster, triple, values })
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    let diff: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff)
}

fn tail_norm(values: &VersalValues) -> f64 {
    norm2(values.tail())
}

fn one_step_norm<P: Problem>(
    problem: &P,
    p0: &[C64],
    cluster: &ClusterSelection,
    config: &NewtonConfig,
) -> Result<f64> {
    let d = cluster.multiplicity();
    let local = local_at(problem, p0, Some(cluster), None, d, config)?;
    let lin = problem.linearize(p0, &local.triple, &local.values)?;
    let system = assemble_linear_system(&lin, config);
    let dp = solve_step(&system, p0, p0, SolveStrategy::LeastSquaresMinNorm, config.rank_tolerance)?;
    Ok(norm2(&dp))
}

fn choose_initial<P: Problem>(
    problem: &P,
    p0: &[C64],
    d: usize,
    config: &NewtonConfig,
) -> Result<ClusterSelection> {
    let a = problem.matrix_at(p0);
    check_matrix(&a)?;
    let eig = schur_decompose(&a)?.eigenvalues();
    let m = eig.len();
    if d > m {
        return Err(Error::InvalidCluster(alloc::format!(
            "multiplicity {d} exceeds matrix size {m}"
        )));
    }
    if let Some(t) = config.target_eigenvalue {
        return select_cluster(&eig, t, d, pairing(config, &a, t));
    }
    if m <= 8 {
        let mut best: Option<(f64, ClusterSelection)> = None;
        for idx in subsets(m, d) {
            let cluster = ClusterSelection::new(idx, m)?;
            if let Ok(step) = one_step_norm(problem, p0, &cluster, config) {
                if step.is_finite() && best.as_ref().is_none_or(|(s, _)| step < *s) {
                    best = Some((step, cluster));
                }
            }
        }
        if let Some((_, c)) = best {
            return Ok(c);
        }
    }
    minimal_spread_cluster(&eig, d)
}

fn drive<P: Problem>(
    problem: &P,
    p0: &[C64],
    initial: &InitialCluster,
    config: &NewtonConfig,
) -> Result<NewtonResult> {
    config.validate()?;
    let d = initial.multiplicity();
    if d < 2 {
        return Err(Error::InvalidMultiplicity(d));
    }
    if p0.len() != problem.num_unknowns() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "expected {} parameters, got {}",
            problem.num_unknowns(),
            p0.len()
        )));
    }
    if p0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let reference: Vec<C64> = if config.real_parameters {
        p0.iter().map(|z| C64::new(z.re, 0.0)).collect()
    } else {
        p0.to_vec()
    };
    let mut cluster = match initial {
        InitialCluster::Given(c) => c.clone(),
        InitialCluster::Auto(d) => choose_initial(problem, &reference, *d, config)?,
    };
    let tol = config.step_tolerance * norm2(&reference).max(1.0);

    let mut p = reference.clone();
    let mut lambda_app: Option<C64> = None;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut warnings = Vec::new();
    let mut converged = false;

    for it in 0..config.max_iterations {
        let local = local_at(problem, &p, Some(&cluster), lambda_app, d, config).map_err(|e| e.at_iteration(it))?;
        cluster = local.cluster.clone();
        let a_norm = local.a.norm_fro();
        let separation = cluster_separation(&local.schur, &cluster).map_err(|e| e.at_iteration(it))?;
        if separation < config.separation_warning_threshold * a_norm {
            warnings.push(SolverWarning::IllSeparated { iteration: it, separation });
        }
        let lin = problem
            .linearize(&p, &local.triple, &local.values)
            .map_err(|e| e.at_iteration(it))?;
        let system = assemble_linear_system(&lin, config);
        let mut dp = solve_step(&system, &p, &reference, config.solve_strategy, config.rank_tolerance)
            .map_err(|e| e.at_iteration(it))?;
        let lambda = approximate_eigenvalue(&lin, &dp);

        if config.step_halving {
            let before = tail_norm(&local.values);
            for _ in 0..8 {
                let trial: Vec<C64> = p.iter().zip(&dp).map(|(a, b)| a + b).collect();
                let after = local_at(problem, &trial, None, Some(lambda), d, config)
                    .map(|l| tail_norm(&l.values))
                    .unwrap_or(f64::INFINITY);
                if after <= before {
                    break;
                }
                dp.iter_mut().for_each(|z| *z *= 0.5);
            }
        }

        let step_norm = norm2(&dp);
        let q_ok = local.values.tail_max_abs() <= config.q_tolerance * a_norm.max(1.0);
        records.push(IterationRecord {
            point: p.clone(),
            q: local.values.as_slice().to_vec(),
            step_norm,
            cluster: cluster.indices().to_vec(),
            separation,
            lambda_app: lambda,
        });
        for (x, s) in p.iter_mut().zip(&dp) {
            *x += s;
        }
        lambda_app = Some(lambda);
        if step_norm <= tol && q_ok {
            converged = true;
            break;
        }
    }

    let (chain, final_values) = match local_at(problem, &p, Some(&cluster), lambda_app, d, config) {
        Ok(local) => match jordan_chain(&local.a, &local.triple) {
            Ok(ch) => (Some(ch), Some(local.values)),
            Err(e) => {
                warnings.push(SolverWarning::ChainUnavailable(e));
                (None, Some(local.values))
            }
        },
        Err(e) => {
            warnings.push(SolverWarning::ChainUnavailable(e));
            (None, None)
        }
    };
    Ok(NewtonResult {
        converged,
        distance: distance(&p, &reference),
        p_star: p,
        matrix_dim: problem.matrix_dim(),
        iterations: records,
        chain,
        final_values,
        warnings,
    })
}

/// Newton iteration for the nearest point of the `d`-fold stratum of a family.
///
/// In real-parameter mode (also implied by a real family domain) the
/// iterates stay real.
pub fn newton_iterate<F: MatrixFamily + ?Sized>(
    family: &F,
    p0: &[C64],
    initial_cluster: &InitialCluster,
    config: &NewtonConfig,
) -> Result<NewtonResult> {
    let mut config = config.clone();
    if family.domain() == ParameterDomain::Real {
        config.real_parameters = true;
    }
    drive(&FamilyProblem(family), p0, initial_cluster, &config)
}

/// Nearest matrix (in Frobenius norm, to first order per step) with a
/// nonderogatory `d`-fold eigenvalue. Unknowns are the entries of `A`.
pub fn nearest_defective_matrix(
    a0: &CMatrix,
    initial_cluster: &InitialCluster,
    config: &NewtonConfig,
) -> Result<NewtonResult> {
    check_matrix(a0)?;
    let mut config = config.clone();
    config.solve_strategy = SolveStrategy::NearestToReference;
    let p0 = a0.as_slice().to_vec();
    drive(&EntryProblem(a0.nrows()), &p0, initial_cluster, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{family_cusp, family_swallow_tail, family_versal_form};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn select_nearest_with_ties() {
        let ev = [c(0.0), c(1.0), c(10.0)];
        assert_eq!(select_cluster(&ev, c(0.4), 2, false).unwrap().indices(), &[0, 1]);
        let ev = [c(1.0), c(-1.0), c(5.0)];
        assert_eq!(select_cluster(&ev, c(0.0), 1, false).unwrap().indices(), &[0]);
    }

    #[test]
    fn conjugate_pairing() {
        let ev = [C64::new(0.1, 1.0), c(0.5), C64::new(0.1, -1.0), c(3.0)];
        let sel = select_cluster(&ev, c(0.0), 2, true).unwrap();
        assert_eq!(sel.indices(), &[1, 3]);
        let sel = select_cluster(&ev, c(0.0), 3, true).unwrap();
        assert_eq!(sel.indices(), &[1, 0, 2]);
        let ev = [C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        assert!(matches!(
            select_cluster(&ev, c(0.0), 1, true),
            Err(Error::ConjugatePairing { d: 1 })
        ));
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), alloc::vec![alloc::vec![0, 1, 2]]);
        assert_eq!(subsets(5, 2)[4], alloc::vec![1, 2]);
    }

    #[test]
    fn versal_form_system_and_lambda() {
        let f = family_versal_form(3);
        let p = [c(1.0), c(0.2), c(-0.1)];
        let a = f.evaluate(&p);
        let tr = crate::invariant::block_diagonalize(&a, &ClusterSelection::leading(3, 3).unwrap()).unwrap();
        let v = versal_values(&tr.s).unwrap();
        let lin = versal_jacobian(&tr, &v, &f.derivatives(&p)).unwrap();
        let sys = assemble_linear_system(&lin, &NewtonConfig::default());
        assert_eq!((sys.matrix.nrows(), sys.matrix.ncols()), (2, 3));
        let dp = [c(0.3), c(0.0), c(0.0)];
        assert!((approximate_eigenvalue(&lin, &dp) - c(1.3)).norm() < 1e-13);
        assert!((approximate_eigenvalue(&lin, &[c(0.0); 3]) - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn zero_rhs_gives_zero_step() {
        let sys = LinearSystem {
            matrix: CMatrix::from_real_rows(&[[1.0, 2.0]]),
            rhs: alloc::vec![c(0.0)],
            real: false,
        };
        let p = [c(0.5), c(0.5)];
        let dp = solve_step(&sys, &p, &p, SolveStrategy::LeastSquaresMinNorm, 1e-13).unwrap();
        assert!(norm2(&dp) == 0.0);
    }

    #[test]
    fn real_split_rows() {
        // Complex row in real mode becomes two rows.
        let lin = VersalLinearization {
            values: VersalValues::new(alloc::vec![c(0.0), C64::new(0.1, 0.2)]),
            derivatives: crate::deformation::VersalDerivatives::Jacobian(CMatrix::from_rows(&[
                [c(1.0), c(0.0)],
                [C64::new(1.0, 1.0), c(2.0)],
            ])),
        };
        let cfg = NewtonConfig { real_parameters: true, ..NewtonConfig::default() };
        let sys = assemble_linear_system(&lin, &cfg);
        assert_eq!(sys.matrix.nrows(), 2);
        assert_eq!(sys.rhs, alloc::vec![c(-0.1), c(-0.2)]);
    }

    #[test]
    fn swallow_tail_origin_is_fixed() {
        let f = family_swallow_tail();
        let r = newton_iterate(&f, &[c(0.0); 3], &InitialCluster::Auto(4), &NewtonConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations.len(), 1);
        assert_eq!(r.iterations[0].step_norm, 0.0);
        assert!(r.chain.unwrap().residual < 1e-15);
    }

    #[test]
    fn cusp_on_stratum() {
        let f = family_cusp();
        let r = newton_iterate(&f, &[c(0.0), c(9.0)], &InitialCluster::Auto(2), &NewtonConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations.len() <= 2);
        assert!(r.distance < 1e-10);
    }

    #[test]
    fn rejects_d_one() {
        let f = family_cusp();
        let e = newton_iterate(&f, &[c(0.0), c(9.0)], &InitialCluster::Auto(1), &NewtonConfig::default()).unwrap_err();
        assert_eq!(e, Error::InvalidMultiplicity(1));
    }
}
