mod common;

use common::*;
use versal::{
    approximate_eigenvalue, assemble_linear_system, block_diagonalize, eigenvalues, nilpotent_perturbation,
    nilpotent_normal_basis, family_cusp, family_swallow_tail, jordan_block, matrix_perturbed_nilpotent, matrix_frank,
    nearest_defective_matrix, newton_iterate, select_cluster, versal_jacobian, versal_values, AffineFamily, CMatrix,
    ClusterSelection, Error, InitialCluster, MatrixFamily, NewtonConfig, ParameterDomain, SolveStrategy, C64,
};

fn cusp_run(config: &NewtonConfig) -> versal::NewtonResult {
    newton_iterate(&family_cusp(), &[c(-0.03), c(8.99)], &InitialCluster::Auto(2), config).unwrap()
}

#[test]
fn cusp_converges_to_cusp_neighbour() {
    let r = cusp_run(&NewtonConfig::default());
    assert!(r.converged);
    assert!(r.iterations.len() <= 5);
    assert!(((r.p_star[0] - c(0.0)).norm().hypot((r.p_star[1] - c(9.0)).norm())) <= 1e-10);
    let chain = r.chain.unwrap();
    assert!((chain.lambda - c(-2.0)).norm() <= 1e-12);
    assert!(chain.residual <= 1e-14);
    let s19 = 19f64.sqrt();
    let expect = [
        [3.0 / s19, (-1.0 + 30.0 / 19.0) / s19],
        [-3.0 / s19, (2.0 - 30.0 / 19.0) / s19],
        [1.0 / s19, (-1.0 + 10.0 / 19.0) / s19],
    ];
    for i in 0..3 {
        for j in 0..2 {
            assert!((chain.u[(i, j)] - c(expect[i][j])).norm() <= 1e-10, "U[{i},{j}]");
        }
    }
}

#[test]
fn cusp_first_step() {
    let f = family_cusp();
    let p0 = [c(-0.03), c(8.99)];
    let a = f.evaluate(&p0);
    let ev = eigenvalues(&a).unwrap();
    let pair: Vec<usize> = (0..3).filter(|&k| ev[k].im.abs() > 0.1).collect();
    let triple = block_diagonalize(&a, &ClusterSelection::new(pair, 3).unwrap()).unwrap();
    let values = versal_values(&triple.s).unwrap();
    let lin = versal_jacobian(&triple, &values, &f.derivatives(&p0)).unwrap();
    let cfg = NewtonConfig { real_parameters: true, ..NewtonConfig::default() };
    let sys = assemble_linear_system(&lin, &cfg);
    assert_eq!(sys.matrix.nrows(), 1);
    assert!((sys.matrix[(0, 0)].re - 1.001).abs() < 5e-4);
    assert!((sys.matrix[(0, 1)].re - 0.333).abs() < 5e-4);
    assert!((sys.rhs[0].re - 0.033).abs() < 5e-4);

    // Closed form for one real row: dp = rhs (a, b) / (a^2 + b^2).
    let (ra, rb, rhs) = (sys.matrix[(0, 0)].re, sys.matrix[(0, 1)].re, sys.rhs[0].re);
    let k = rhs / (ra * ra + rb * rb);
    let dp = versal::solve_step(&sys, &p0, &p0, SolveStrategy::LeastSquaresMinNorm, 1e-13).unwrap();
    assert!((dp[0].re - k * ra).abs() < 1e-15 && (dp[1].re - k * rb).abs() < 1e-14);
    let p1 = [p0[0].re + dp[0].re, p0[1].re + dp[1].re];
    assert_eq!(((p1[0] * 1e5).round(), (p1[1] * 1e5).round()), (-1.0, 899999.0));
    let lam = approximate_eigenvalue(&lin, &dp);
    assert!((lam - c(-2.0)).norm() < 5e-3);
}

#[test]
fn cusp_pure_newton_is_quadratic() {
    let cfg = NewtonConfig { solve_strategy: SolveStrategy::LeastSquaresMinNorm, ..NewtonConfig::default() };
    let r = cusp_run(&cfg);
    assert!(r.converged);
    let steps: Vec<f64> = r.iterations.iter().map(|it| it.step_norm).filter(|&s| s > 0.0).collect();
    let n = steps.len();
    assert!(n >= 3, "{steps:?}");
    for k in n - 3..n - 1 {
        if steps[k + 1] < 1e-14 {
            continue;
        }
        assert!(steps[k + 1] / (steps[k] * steps[k]) < 10.0, "{steps:?}");
    }
}

#[test]
fn starting_on_the_stratum() {
    let r = newton_iterate(&family_cusp(), &[c(0.0), c(9.0)], &InitialCluster::Auto(2), &NewtonConfig::default())
        .unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations.len(), 1);
    assert!(r.iterations[0].step_norm < 1e-12);
    assert!((r.chain.unwrap().lambda - c(-2.0)).norm() < 1e-7);
}

#[test]
fn converged_points_satisfy_tail_and_tangent_plane() {
    let cfg = NewtonConfig::default();
    let f = family_cusp();
    let r = cusp_run(&cfg);
    let a = f.evaluate(&r.p_star);
    let tail = r.final_values.as_ref().unwrap().tail_max_abs();
    assert!(tail <= 1e-10 * a.norm_fro().max(1.0));
    let again = newton_iterate(&f, &r.p_star, &InitialCluster::Auto(2), &NewtonConfig { max_iterations: 1, ..cfg })
        .unwrap();
    assert!(again.iterations[0].step_norm <= cfg.step_tolerance * 9.0);
}

#[test]
fn swallow_tail_target_eigenvalue() {
    // The pair nearest 0 starts far from coalescing; undamped steps cycle.
    let cfg = NewtonConfig { target_eigenvalue: Some(c(0.0)), ..NewtonConfig::default() };
    let r = newton_iterate(&family_swallow_tail(), &[c(0.1); 3], &InitialCluster::Auto(2), &cfg).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations.len(), 20);
    let cfg = NewtonConfig { step_halving: true, ..cfg };
    let r = newton_iterate(&family_swallow_tail(), &[c(0.1); 3], &InitialCluster::Auto(2), &cfg).unwrap();
    assert!(r.converged);
    assert!((r.p_star[0] - c(0.1)).norm() < 1e-10);
    let q = r.final_values.unwrap();
    assert!(q.get(1).norm() <= 1e-8);
    assert!(q.get(2).norm() <= 1e-10);
    // A double zero eigenvalue means p3 = 0 and p2 = 0.
    assert!(r.p_star[1].norm() < 1e-8 && r.p_star[2].norm() < 1e-8);
}

#[test]
fn exact_jordan_block_has_distance_zero() {
    let mut a = CMatrix::identity(5).scale(c(3.0));
    a.set_block(0, 0, &jordan_block(c(-1.0), 3));
    let r = nearest_defective_matrix(&a, &InitialCluster::Auto(3), &NewtonConfig::default()).unwrap();
    assert!(r.converged);
    assert!(r.distance < 1e-15);
    assert!((r.chain.unwrap().lambda - c(-1.0)).norm() < 1e-10);
}

#[test]
fn nilpotent_small_perturbation_one_step() {
    let a = matrix_perturbed_nilpotent(2.2e-15, 1.5e-9);
    let cfg = NewtonConfig { max_iterations: 1, ..NewtonConfig::default() };
    let r = nearest_defective_matrix(&a, &InitialCluster::Given(ClusterSelection::leading(3, 3).unwrap()), &cfg)
        .unwrap();
    assert!((r.distance - 1.97e-14).abs() <= 0.1 * 1.97e-14);
    let da = &r.matrix().unwrap() - &a;
    for i in 0..3 {
        for j in 0..3 {
            if (i, j) == (1, 0) || (i, j) == (2, 0) {
                continue;
            }
            assert!(da[(i, j)].norm() <= 1e-16, "({i},{j}) = {}", da[(i, j)]);
        }
    }
    assert!((da[(1, 0)] - c(-1.76e-14)).norm() < 0.01e-14);
    assert!((da[(2, 0)] - c(-0.88e-14)).norm() < 0.01e-14);
    let chain = r.chain.unwrap();
    assert!((chain.lambda.re - 8.8e-15).abs() < 0.01e-15);
    assert!((chain.u[(2, 2)].re - 6.667e8).abs() < 1e5);
    assert!((chain.u[(0, 0)] - c(1.0)).norm() < 1e-6 && (chain.u[(1, 1)] - c(1.0)).norm() < 1e-6);
}

/// Least-squares projection of `m` onto `span(basis)` via the 2x2 normal equations.
fn project(m: &CMatrix, basis: &[CMatrix; 2]) -> CMatrix {
    let ip = |a: &CMatrix, b: &CMatrix| -> f64 { a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x.conj() * y).re).sum() };
    let g = [[ip(&basis[0], &basis[0]), ip(&basis[0], &basis[1])], [ip(&basis[1], &basis[0]), ip(&basis[1], &basis[1])]];
    let rhs = [ip(&basis[0], m), ip(&basis[1], m)];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let x = (rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det;
    let y = (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det;
    &basis[0].scale(c(x)) + &basis[1].scale(c(y))
}

#[test]
fn nilpotent_scaled_matches_normal_projection() {
    let (eps, delta) = (1e-8, 1.5e-9);
    let a = matrix_perturbed_nilpotent(eps, delta);
    let r = nearest_defective_matrix(&a, &InitialCluster::Auto(3), &NewtonConfig::default()).unwrap();
    assert!(r.converged);
    let da = &r.matrix().unwrap() - &a;
    let target = project(&nilpotent_perturbation().scale(c(-eps)), &nilpotent_normal_basis(delta));
    let rel = (&da - &target).norm_fro() / target.norm_fro();
    assert!(rel <= 1e-6, "relative difference {rel:e}");
}

#[test]
fn frank_cluster_is_the_smallest_eigenvalues() {
    let a = matrix_frank(12);
    let ev = eigenvalues(&a).unwrap();
    let sel = select_cluster(&ev, c(0.0), 6, false).unwrap();
    let mut mags: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    mags.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for &k in sel.indices() {
        assert!(ev[k].norm() <= mags[5]);
    }
}

#[test]
fn frank_double_eigenvalue() {
    let a = matrix_frank(12);
    let cfg = NewtonConfig { step_tolerance: 1e-15, ..NewtonConfig::default() };
    let r = nearest_defective_matrix(&a, &InitialCluster::Auto(2), &cfg).unwrap();
    assert!(r.converged);
    assert!((r.one_step_distance(a.as_slice()).unwrap() - 1.619e-10).abs() < 0.02 * 1.619e-10);
    assert!((r.distance - 1.850e-10).abs() < 0.02 * 1.850e-10);
    assert!(r.chain.unwrap().residual <= 1e-9);
}

#[test]
fn identity_terminates_gracefully() {
    let r = nearest_defective_matrix(&CMatrix::identity(3), &InitialCluster::Auto(2), &NewtonConfig::default());
    match r {
        Ok(res) => assert!(res.iterations.len() <= 20),
        Err(e) => assert!(matches!(
            e.root(),
            Error::RankDeficient { .. } | Error::IllSeparated { .. } | Error::SwapFailed { .. }
        )),
    }
}

#[test]
fn rank_deficient_family_is_reported() {
    // The parameter does not touch the 2x2 block carrying the pair.
    let a0 = CMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [0.1, 0.0, 0.0], [0.0, 0.0, 4.0]]);
    let f = AffineFamily::new(a0, vec![CMatrix::unit(3, 3, 2, 2)], ParameterDomain::Complex);
    let e = newton_iterate(&f, &[c(0.0)], &InitialCluster::Given(ClusterSelection::new(vec![0, 1], 3).unwrap()),
        &NewtonConfig::default()).unwrap_err();
    assert!(matches!(e.root(), Error::RankDeficient { .. }), "{e:?}");
    assert!(matches!(e, Error::AtIteration { iteration: 0, .. }));
}

#[test]
fn iteration_cap_gives_history() {
    let cfg = NewtonConfig { max_iterations: 2, ..NewtonConfig::default() };
    let r = cusp_run(&cfg);
    assert!(!r.converged);
    assert_eq!(r.iterations.len(), 2);
    assert!(r.chain.is_some());
}

#[test]
fn nonfinite_and_bad_config() {
    let f = family_cusp();
    let e = newton_iterate(&f, &[c(f64::NAN), c(9.0)], &InitialCluster::Auto(2), &NewtonConfig::default());
    assert_eq!(e.unwrap_err(), Error::NonFinite);
    let cfg = NewtonConfig { step_tolerance: -1.0, ..NewtonConfig::default() };
    let e = newton_iterate(&f, &[c(0.0), c(9.0)], &InitialCluster::Auto(2), &cfg);
    assert_eq!(e.unwrap_err(), Error::InvalidConfig);
    let e = newton_iterate(&f, &[c(0.0)], &InitialCluster::Auto(2), &NewtonConfig::default());
    assert!(matches!(e.unwrap_err(), Error::DimensionMismatch(_)));
    let _ = C64::new(0.0, 0.0);
}
