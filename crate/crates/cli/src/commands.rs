use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::Value;
use versal::{
    eigenvalues, nearest_defective_matrix, newton_iterate, select_cluster, AffineFamily, CMatrix, ClusterSelection,
    Error, InitialCluster, MatrixFamily, NewtonConfig, NewtonResult, ParameterDomain, SolveStrategy, SolverWarning,
    C64,
};

use crate::io::{self, Source};
use crate::report::{self, cell, cell_opt, num, object};
use crate::CliError;

pub struct Output {
    pub stdout: String,
    pub exit: u8,
    /// Diagnostic printed to stderr alongside the report.
    pub message: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Nearest point of the linearized stratum to the starting point.
    Nearest,
    /// Minimum-norm correction from the current iterate.
    MinNorm,
}

impl Strategy {
    fn to_core(self) -> SolveStrategy {
        match self {
            Strategy::Nearest => SolveStrategy::NearestToReference,
            Strategy::MinNorm => SolveStrategy::LeastSquaresMinNorm,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Strategy::Nearest => "nearest",
            Strategy::MinNorm => "min-norm",
        }
    }
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    /// Multiplicity d of the sought eigenvalue (at least 2).
    #[arg(long, short = 'd')]
    pub multiplicity: usize,
    /// "auto" or comma-separated 0-based indices into the initial eigenvalue list.
    #[arg(long, default_value = "auto")]
    pub cluster: String,
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    /// Step tolerance relative to max(1, |p0|).
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Bound on |q_i|, i >= 2, relative to max(1, |A|_F).
    #[arg(long, default_value_t = 1e-10)]
    pub q_tol: f64,
    /// Prescribe the multiple eigenvalue: `re`, `re,im` or `[re, im]`.
    #[arg(long, allow_hyphen_values = true)]
    pub target_eigenvalue: Option<String>,
    /// Halve steps that increase the residual of the versal functions.
    #[arg(long)]
    pub step_halving: bool,
}

#[derive(Args, Debug)]
#[group(id = "family_source", required = true, multiple = false)]
pub struct FamilySource {
    /// Affine family JSON file.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Built-in family: cusp, swallow-tail, versal-form:<d>.
    #[arg(long)]
    pub builtin: Option<String>,
}

impl FamilySource {
    fn source(&self) -> Source<'_> {
        match (&self.family, &self.builtin) {
            (Some(p), _) => Source::File(p),
            (None, Some(n)) => Source::Builtin(n),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Args, Debug)]
#[group(id = "matrix_source", required = true, multiple = false)]
pub struct MatrixSource {
    /// Matrix JSON file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Built-in matrix: frank[:n], nilpotent[:eps:delta], identity:<m>.
    #[arg(long)]
    pub builtin: Option<String>,
}

impl MatrixSource {
    fn source(&self) -> Source<'_> {
        match (&self.matrix, &self.builtin) {
            (Some(p), _) => Source::File(p),
            (None, Some(n)) => Source::Builtin(n),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveFamilyArgs {
    #[command(flatten)]
    pub source: FamilySource,
    /// Starting parameters: comma-separated reals or a JSON array. Defaults to zeros.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Keep parameters real (implied by a real family domain).
    #[arg(long)]
    pub real: bool,
    #[arg(long, value_enum, default_value = "nearest")]
    pub strategy: Strategy,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SolveMatrixArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DistanceTableArgs {
    /// Matrix JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value = "frank:12")]
    pub builtin: String,
    /// Comma-separated multiplicities.
    #[arg(long, default_value = "2,3,4,5,6")]
    pub multiplicities: String,
    /// Clusters are the d eigenvalues nearest this point.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub center: String,
    #[arg(long, default_value_t = 30)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub q_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OnestepFieldArgs {
    /// Affine family JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub family: Option<PathBuf>,
    #[arg(long, default_value = "cusp")]
    pub builtin: String,
    /// Grid along the first parameter: min,max,count.
    #[arg(long, allow_hyphen_values = true)]
    pub p1: String,
    /// Grid along the second parameter: min,max,count.
    #[arg(long, allow_hyphen_values = true)]
    pub p2: String,
    /// Values of the remaining parameters, comma-separated or a JSON array. Defaults to zeros.
    #[arg(long, allow_hyphen_values = true)]
    pub rest: Option<String>,
    /// Comma-separated multiplicities; each grid point gets one record per entry.
    #[arg(long, default_value = "2")]
    pub multiplicities: String,
    #[arg(long, allow_hyphen_values = true)]
    pub target_eigenvalue: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    /// Built-in family or matrix name.
    pub name: String,
}

fn tool() -> Value {
    object([
        ("name", Value::from("versal")),
        ("version", Value::from(env!("CARGO_PKG_VERSION"))),
    ])
}

fn error_kind(e: &Error) -> &'static str {
    match e.root() {
        Error::NotSquare { .. } => "not_square",
        Error::NonFinite => "non_finite",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::SchurNoConvergence { .. } => "schur_no_convergence",
        Error::SwapFailed { .. } => "swap_failed",
        Error::InvalidCluster(_) => "invalid_cluster",
        Error::InvalidMultiplicity(_) => "invalid_multiplicity",
        Error::IllSeparated { .. } => "ill_separated",
        Error::RepeatedEigenvalue { .. } => "repeated_eigenvalue",
        Error::DegenerateChain { .. } => "degenerate_chain",
        Error::RankDeficient { .. } => "rank_deficient",
        Error::ConjugatePairing { .. } => "conjugate_pairing",
        Error::ZeroGradientDifference => "zero_gradient_difference",
        Error::InvalidConfig => "invalid_config",
        Error::Singular => "singular",
        Error::AtIteration { .. } => unreachable!("root strips iteration context"),
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::NotSquare { .. }
            | Error::NonFinite
            | Error::DimensionMismatch(_)
            | Error::InvalidCluster(_)
            | Error::InvalidMultiplicity(_)
            | Error::InvalidConfig
    )
}

fn error_value(e: &Error) -> Value {
    let iteration = match e {
        Error::AtIteration { iteration, .. } => Value::from(*iteration),
        _ => Value::Null,
    };
    object([
        ("iteration", iteration),
        ("kind", Value::from(error_kind(e))),
        ("message", Value::from(e.root().to_string())),
    ])
}

/// Input-class library errors become `CliError::Input`; the rest are reported.
fn triage(e: Error) -> Result<Error, CliError> {
    if is_input_error(&e) {
        Err(CliError::Input(e.root().to_string()))
    } else {
        Ok(e)
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("{what}: not a non-negative integer: {x:?}")))
        })
        .collect()
}

fn check_multiplicity(d: usize) -> Result<(), CliError> {
    if d < 2 {
        return Err(CliError::Input(Error::InvalidMultiplicity(d).to_string()));
    }
    Ok(())
}

fn config_from(s: &SolverArgs) -> Result<NewtonConfig, CliError> {
    check_multiplicity(s.multiplicity)?;
    let config = NewtonConfig {
        max_iterations: s.max_iter,
        step_tolerance: s.tol,
        q_tolerance: s.q_tol,
        target_eigenvalue: s
            .target_eigenvalue
            .as_deref()
            .map(|t| io::scalar_arg(t, "--target-eigenvalue"))
            .transpose()?,
        step_halving: s.step_halving,
        ..NewtonConfig::default()
    };
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if config.max_iterations == 0 || !positive(config.step_tolerance) || !positive(config.q_tolerance) {
        return Err(CliError::Input(Error::InvalidConfig.to_string()));
    }
    Ok(config)
}

fn initial_cluster(spec: &str, d: usize, m: usize) -> Result<InitialCluster, CliError> {
    if spec.trim() == "auto" {
        return Ok(InitialCluster::Auto(d));
    }
    let idx = io::indices_arg(spec)?;
    if idx.len() != d {
        return Err(CliError::Input(format!(
            "cluster has {} indices but multiplicity is {d}",
            idx.len()
        )));
    }
    ClusterSelection::new(idx, m)
        .map(InitialCluster::Given)
        .map_err(|e| CliError::Input(e.to_string()))
}

fn config_echo(config: &NewtonConfig, cluster: &str, d: usize, strategy: &str) -> Value {
    object([
        ("cluster", Value::from(cluster.trim())),
        ("max_iterations", Value::from(config.max_iterations)),
        ("multiplicity", Value::from(d)),
        ("q_tolerance", num(config.q_tolerance)),
        ("real_parameters", Value::from(config.real_parameters)),
        ("step_halving", Value::from(config.step_halving)),
        ("step_tolerance", num(config.step_tolerance)),
        ("strategy", Value::from(strategy)),
        ("target_eigenvalue", config.target_eigenvalue.map_or(Value::Null, report::complex)),
    ])
}

fn warning_value(w: &SolverWarning) -> Value {
    match w {
        SolverWarning::IllSeparated { iteration, separation } => object([
            ("iteration", Value::from(*iteration)),
            ("kind", Value::from("ill_separated")),
            ("separation", num(*separation)),
        ]),
        SolverWarning::ChainUnavailable(e) => object([
            ("kind", Value::from("chain_unavailable")),
            ("message", Value::from(e.root().to_string())),
        ]),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Family,
    Matrix,
}

fn result_value(r: &NewtonResult, p0: &[C64], mode: Mode) -> Value {
    let iterations: Vec<Value> = r
        .iterations
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            let mut fields = vec![
                ("cluster", Value::from(rec.cluster.clone())),
                ("iteration", Value::from(k)),
                ("lambda_app", report::complex(rec.lambda_app)),
                ("q", report::complex_vec(&rec.q)),
                ("separation", num(rec.separation)),
                ("step_norm", num(rec.step_norm)),
            ];
            if mode == Mode::Family {
                fields.push(("point", report::complex_vec(&rec.point)));
            }
            object(fields)
        })
        .collect();
    let chain = r.chain.as_ref().map_or(Value::Null, |ch| {
        object([
            ("condition_number", num(ch.condition_number())),
            ("lambda", report::complex(ch.lambda)),
            ("residual", num(ch.residual)),
            ("u", report::matrix(&ch.u)),
        ])
    });
    let mut fields = vec![
        ("chain", chain),
        ("converged", Value::from(r.converged)),
        ("distance", num(r.distance)),
        ("final_q", r.final_values.as_ref().map_or(Value::Null, |v| report::complex_vec(v.as_slice()))),
        ("iteration_count", Value::from(r.iterations.len())),
        ("iterations", Value::Array(iterations)),
        ("one_step_distance", r.one_step_distance(p0).map_or(Value::Null, num)),
        ("warnings", Value::Array(r.warnings.iter().map(warning_value).collect())),
    ];
    match mode {
        Mode::Family => fields.push(("p_star", report::complex_vec(&r.p_star))),
        Mode::Matrix => {
            let m = r.matrix_dim.unwrap_or(0);
            let a_star = CMatrix::from_column_major(m, m, r.p_star.clone());
            let a0 = CMatrix::from_column_major(m, m, p0.to_vec());
            let delta = CMatrix::from_fn(m, m, |i, j| a_star[(i, j)] - a0[(i, j)]);
            fields.push(("a_star", report::matrix(&a_star)));
            fields.push(("delta_a", report::matrix(&delta)));
            fields.push(("delta_a_fro", num(delta.norm_fro())));
        }
    }
    object(fields)
}

fn summary_csv(r: &NewtonResult, p0: &[C64], mode: Mode) -> String {
    let mut header = vec![
        "converged",
        "iterations",
        "distance",
        "one_step_distance",
        "lambda_re",
        "lambda_im",
        "chain_residual",
        "condition_number",
    ];
    let ch = r.chain.as_ref();
    let mut row = vec![
        r.converged.to_string(),
        r.iterations.len().to_string(),
        cell(r.distance),
        cell_opt(r.one_step_distance(p0)),
        cell_opt(ch.map(|c| c.lambda.re)),
        cell_opt(ch.map(|c| c.lambda.im)),
        cell_opt(ch.map(|c| c.residual)),
        cell_opt(ch.map(|c| c.condition_number())),
    ];
    let names: Vec<String>;
    if mode == Mode::Family {
        names = (0..r.p_star.len())
            .flat_map(|j| [format!("p{}_re", j + 1), format!("p{}_im", j + 1)])
            .collect();
        header.extend(names.iter().map(String::as_str));
        for z in &r.p_star {
            row.push(cell(z.re));
            row.push(cell(z.im));
        }
    }
    report::to_csv(&header, &[row])
}

fn with_timings(mut v: Value, enabled: bool, start: Instant) -> Value {
    if enabled {
        if let Value::Object(map) = &mut v {
            map.insert(
                "timings".into(),
                object([("total_seconds", num(start.elapsed().as_secs_f64()))]),
            );
        }
    }
    v
}

fn finish_solve(
    outcome: Result<NewtonResult, Error>,
    p0: &[C64],
    mode: Mode,
    header: Vec<(&'static str, Value)>,
    output: &OutputArgs,
    start: Instant,
) -> Result<Output, CliError> {
    let mut fields = header;
    fields.push(("tool", tool()));
    match outcome {
        Ok(r) => {
            let exit = if r.converged { 0 } else { 2 };
            let message = (!r.converged).then(|| format!("not converged after {} iterations", r.iterations.len()));
            let stdout = match output.format {
                Format::Csv => summary_csv(&r, p0, mode),
                Format::Json => {
                    fields.push(("result", result_value(&r, p0, mode)));
                    report::to_json_string(&with_timings(object(fields), output.timings, start))
                }
            };
            Ok(Output { stdout, exit, message })
        }
        Err(e) => {
            let e = triage(e)?;
            let message = Some(e.to_string());
            let stdout = match output.format {
                Format::Csv => report::to_csv(&["error_kind", "message"], &[vec![error_kind(&e).into(), e.to_string()]]),
                Format::Json => {
                    fields.push(("error", error_value(&e)));
                    report::to_json_string(&with_timings(object(fields), output.timings, start))
                }
            };
            Ok(Output { stdout, exit: 2, message })
        }
    }
}

fn domain_name(f: &AffineFamily) -> &'static str {
    match f.domain() {
        ParameterDomain::Real => "real",
        ParameterDomain::Complex => "complex",
    }
}

fn parameters(arg: Option<&str>, n: usize, what: &str) -> Result<Vec<C64>, CliError> {
    let p = match arg {
        Some(s) => io::vector_arg(s, what)?,
        None => vec![C64::new(0.0, 0.0); n],
    };
    if p.len() != n {
        return Err(CliError::Input(format!("{what}: expected {n} parameters, got {}", p.len())));
    }
    Ok(p)
}

pub fn solve_family(args: &SolveFamilyArgs) -> Result<Output, CliError> {
    let start = Instant::now();
    let src = args.source.source();
    let family = io::load_family(&src)?;
    let mut config = config_from(&args.solver)?;
    config.solve_strategy = args.strategy.to_core();
    config.real_parameters = args.real || family.domain() == ParameterDomain::Real;
    let p0 = parameters(args.p0.as_deref(), family.num_params(), "--p0")?;
    if config.real_parameters && p0.iter().any(|z| z.im != 0.0) {
        return Err(CliError::Input("--p0: complex parameters given in real mode".into()));
    }
    let m = family.dim();
    let initial = initial_cluster(&args.solver.cluster, args.solver.multiplicity, m)?;
    let a0 = family.evaluate(&p0);
    let outcome = eigenvalues(&a0).and_then(|ev| {
        newton_iterate(&family, &p0, &initial, &config).map(|r| (ev, r))
    });
    let eig = outcome.as_ref().ok().map(|(ev, _)| ev.clone());
    let input = object([
        ("config", config_echo(&config, &args.solver.cluster, args.solver.multiplicity, args.strategy.name())),
        ("domain", Value::from(domain_name(&family))),
        ("initial_eigenvalues", eig.as_deref().map_or(Value::Null, report::complex_vec)),
        ("m", Value::from(m)),
        ("n", Value::from(family.num_params())),
        ("p0", report::complex_vec(&p0)),
        ("source", src.describe()),
    ]);
    let header = vec![("input", input), ("mode", Value::from("family"))];
    finish_solve(outcome.map(|(_, r)| r), &p0, Mode::Family, header, &args.output, start)
}

pub fn solve_matrix(args: &SolveMatrixArgs) -> Result<Output, CliError> {
    let start = Instant::now();
    let src = args.source.source();
    let a0 = io::load_matrix(&src)?;
    let config = config_from(&args.solver)?;
    let m = a0.nrows();
    let initial = initial_cluster(&args.solver.cluster, args.solver.multiplicity, m)?;
    let outcome = eigenvalues(&a0).and_then(|ev| nearest_defective_matrix(&a0, &initial, &config).map(|r| (ev, r)));
    let eig = outcome.as_ref().ok().map(|(ev, _)| ev.clone());
    let input = object([
        ("a0", report::matrix(&a0)),
        ("config", config_echo(&config, &args.solver.cluster, args.solver.multiplicity, "nearest")),
        ("initial_eigenvalues", eig.as_deref().map_or(Value::Null, report::complex_vec)),
        ("m", Value::from(m)),
        ("source", src.describe()),
    ]);
    let header = vec![("input", input), ("mode", Value::from("matrix"))];
    let p0 = a0.as_slice().to_vec();
    finish_solve(outcome.map(|(_, r)| r), &p0, Mode::Matrix, header, &args.output, start)
}

struct TableRow {
    d: usize,
    outcome: Result<NewtonResult, Error>,
}

pub fn distance_table(args: &DistanceTableArgs) -> Result<Output, CliError> {
    let start = Instant::now();
    let src = match &args.matrix {
        Some(p) => Source::File(p),
        None => Source::Builtin(&args.builtin),
    };
    let a0 = io::load_matrix(&src)?;
    let ds = parse_list(&args.multiplicities, "--multiplicities")?;
    for &d in &ds {
        check_multiplicity(d)?;
        if d > a0.nrows() {
            return Err(CliError::Input(format!("multiplicity {d} exceeds matrix size {}", a0.nrows())));
        }
    }
    let center = io::scalar_arg(&args.center, "--center")?;
    let config = NewtonConfig {
        max_iterations: args.max_iter,
        step_tolerance: args.tol,
        q_tolerance: args.q_tol,
        ..NewtonConfig::default()
    };
    if config.max_iterations == 0 || !(args.tol > 0.0 && args.tol.is_finite()) || !(args.q_tol > 0.0 && args.q_tol.is_finite()) {
        return Err(CliError::Input(Error::InvalidConfig.to_string()));
    }
    let eig = eigenvalues(&a0).map_err(|e| CliError::Input(e.to_string()))?;
    let p0 = a0.as_slice().to_vec();
    let rows: Vec<TableRow> = ds
        .par_iter()
        .map(|&d| {
            let outcome = select_cluster(&eig, center, d, false)
                .and_then(|c| nearest_defective_matrix(&a0, &InitialCluster::Given(c), &config));
            TableRow { d, outcome }
        })
        .collect();

    let all_converged = rows.iter().all(|r| r.outcome.as_ref().is_ok_and(|x| x.converged));
    let exit = if all_converged { 0 } else { 2 };
    let message = (!all_converged).then(|| "some rows did not converge".to_string());
    let stdout = match args.output.format {
        Format::Csv => {
            let header = [
                "d",
                "converged",
                "iterations",
                "one_step_distance",
                "distance",
                "condition_number",
                "chain_residual",
                "lambda_re",
                "lambda_im",
                "error",
            ];
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|row| match &row.outcome {
                    Ok(r) => {
                        let ch = r.chain.as_ref();
                        vec![
                            row.d.to_string(),
                            r.converged.to_string(),
                            r.iterations.len().to_string(),
                            cell_opt(r.one_step_distance(&p0)),
                            cell(r.distance),
                            cell_opt(ch.map(|c| c.condition_number())),
                            cell_opt(ch.map(|c| c.residual)),
                            cell_opt(ch.map(|c| c.lambda.re)),
                            cell_opt(ch.map(|c| c.lambda.im)),
                            String::new(),
                        ]
                    }
                    Err(e) => {
                        let mut v = vec![row.d.to_string(), "false".into()];
                        v.extend(std::iter::repeat_n(String::new(), 7));
                        v.push(e.to_string());
                        v
                    }
                })
                .collect();
            report::to_csv(&header, &body)
        }
        Format::Json => {
            let rows_json: Vec<Value> = rows
                .iter()
                .map(|row| match &row.outcome {
                    Ok(r) => {
                        let ch = r.chain.as_ref();
                        object([
                            ("chain_residual", ch.map_or(Value::Null, |c| num(c.residual))),
                            ("condition_number", ch.map_or(Value::Null, |c| num(c.condition_number()))),
                            ("converged", Value::from(r.converged)),
                            ("d", Value::from(row.d)),
                            ("distance", num(r.distance)),
                            ("iterations", Value::from(r.iterations.len())),
                            ("lambda", ch.map_or(Value::Null, |c| report::complex(c.lambda))),
                            ("one_step_distance", r.one_step_distance(&p0).map_or(Value::Null, num)),
                        ])
                    }
                    Err(e) => object([
                        ("converged", Value::from(false)),
                        ("d", Value::from(row.d)),
                        ("error", error_value(e)),
                    ]),
                })
                .collect();
            let input = object([
                ("center", report::complex(center)),
                ("m", Value::from(a0.nrows())),
                ("max_iterations", Value::from(config.max_iterations)),
                ("multiplicities", Value::from(ds.clone())),
                ("norm_fro", num(a0.norm_fro())),
                ("q_tolerance", num(config.q_tolerance)),
                ("source", src.describe()),
                ("step_tolerance", num(config.step_tolerance)),
            ]);
            let v = object([
                ("input", input),
                ("mode", Value::from("matrix")),
                ("rows", Value::Array(rows_json)),
                ("tool", tool()),
            ]);
            report::to_json_string(&with_timings(v, args.output.timings, start))
        }
    };
    Ok(Output { stdout, exit, message })
}

struct FieldRecord {
    p0: Vec<C64>,
    d: usize,
    outcome: Result<NewtonResult, Error>,
}

pub fn onestep_field(args: &OnestepFieldArgs) -> Result<Output, CliError> {
    let start = Instant::now();
    let src = match &args.family {
        Some(p) => Source::File(p),
        None => Source::Builtin(&args.builtin),
    };
    let family = io::load_family(&src)?;
    let n = family.num_params();
    if n < 2 {
        return Err(CliError::Input("onestep-field needs a family with at least two parameters".into()));
    }
    let p1 = io::range_arg(&args.p1, "--p1")?;
    let p2 = io::range_arg(&args.p2, "--p2")?;
    let rest = parameters(args.rest.as_deref(), n - 2, "--rest")?;
    let ds = parse_list(&args.multiplicities, "--multiplicities")?;
    for &d in &ds {
        check_multiplicity(d)?;
    }
    let config = NewtonConfig {
        max_iterations: 1,
        target_eigenvalue: args
            .target_eigenvalue
            .as_deref()
            .map(|t| io::scalar_arg(t, "--target-eigenvalue"))
            .transpose()?,
        ..NewtonConfig::default()
    };

    let mut jobs = Vec::with_capacity(p1.len() * p2.len() * ds.len());
    for &x in &p1 {
        for &y in &p2 {
            let mut p = vec![C64::new(x, 0.0), C64::new(y, 0.0)];
            p.extend_from_slice(&rest);
            for &d in &ds {
                jobs.push((p.clone(), d));
            }
        }
    }
    let records: Vec<FieldRecord> = jobs
        .into_par_iter()
        .map(|(p0, d)| {
            let outcome = newton_iterate(&family, &p0, &InitialCluster::Auto(d), &config);
            FieldRecord { p0, d, outcome }
        })
        .collect();

    let stdout = match args.output.format {
        Format::Csv => {
            let mut header: Vec<String> = vec!["d".into()];
            for j in 1..=n {
                header.push(format!("p0_{j}"));
            }
            for j in 1..=n {
                header.push(format!("p1_{j}"));
            }
            header.extend(["step_norm", "cluster", "error"].map(String::from));
            let body: Vec<Vec<String>> = records
                .iter()
                .map(|rec| {
                    let mut row = vec![rec.d.to_string()];
                    row.extend(rec.p0.iter().map(|z| cell(z.re)));
                    match &rec.outcome {
                        Ok(r) => {
                            row.extend(r.p_star.iter().map(|z| cell(z.re)));
                            let first = r.iterations.first();
                            row.push(cell_opt(first.map(|f| f.step_norm)));
                            row.push(first.map_or(String::new(), |f| {
                                f.cluster.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
                            }));
                            row.push(String::new());
                        }
                        Err(e) => {
                            row.extend(std::iter::repeat_n(String::new(), n + 2));
                            row.push(e.to_string());
                        }
                    }
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            report::to_csv(&header, &body)
        }
        Format::Json => {
            let recs: Vec<Value> = records
                .iter()
                .map(|rec| {
                    let mut fields = vec![("d", Value::from(rec.d)), ("p0", report::complex_vec(&rec.p0))];
                    match &rec.outcome {
                        Ok(r) => {
                            let first = r.iterations.first();
                            fields.push(("cluster", first.map_or(Value::Null, |f| Value::from(f.cluster.clone()))));
                            fields.push(("lambda_app", first.map_or(Value::Null, |f| report::complex(f.lambda_app))));
                            fields.push(("p_one_step", report::complex_vec(&r.p_star)));
                            fields.push(("q", first.map_or(Value::Null, |f| report::complex_vec(&f.q))));
                            fields.push(("step_norm", first.map_or(Value::Null, |f| num(f.step_norm))));
                        }
                        Err(e) => fields.push(("error", error_value(e))),
                    }
                    object(fields)
                })
                .collect();
            let input = object([
                ("multiplicities", Value::from(ds.clone())),
                ("p1", Value::Array(p1.iter().copied().map(num).collect())),
                ("p2", Value::Array(p2.iter().copied().map(num).collect())),
                ("rest", report::complex_vec(&rest)),
                ("source", src.describe()),
                ("target_eigenvalue", config.target_eigenvalue.map_or(Value::Null, report::complex)),
            ]);
            let v = object([
                ("input", input),
                ("mode", Value::from("family")),
                ("records", Value::Array(recs)),
                ("tool", tool()),
            ]);
            report::to_json_string(&with_timings(v, args.output.timings, start))
        }
    };
    Ok(Output { stdout, exit: 0, message: None })
}

pub fn fixture(args: &FixtureArgs) -> Result<Output, CliError> {
    let v = match io::builtin_family(&args.name) {
        Ok(f) => io::family_to_json(&f),
        Err(_) => match io::builtin_matrix(&args.name) {
            Ok(a) => io::matrix_to_json(&a),
            Err(_) => {
                return Err(CliError::Input(format!(
                    "unknown fixture {:?}; expected cusp, swallow-tail, versal-form:<d>, frank[:n], \
                     nilpotent[:eps:delta] or identity:<m>",
                    args.name
                )))
            }
        },
    };
    Ok(Output { stdout: report::to_json_string(&v), exit: 0, message: None })
}
