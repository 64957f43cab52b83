//! `versal`: nearest parameter point or matrix with a nonderogatory multiple eigenvalue.
//!
//! Exit codes: 0 converged, 2 not converged or numerical failure (the report
//! carries an `error` field), 1 invalid input.

mod commands;
mod io;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{DistanceTableArgs, FixtureArgs, OnestepFieldArgs, Output, SolveFamilyArgs, SolveMatrixArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

#[derive(Parser, Debug)]
#[command(name = "versal", version, about = "Nearest matrices with a multiple eigenvalue of prescribed multiplicity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton iteration on a parameter family.
    SolveFamily(SolveFamilyArgs),
    /// Nearest matrix in the Frobenius norm.
    SolveMatrix(SolveMatrixArgs),
    /// One-step and converged distances for a range of multiplicities.
    DistanceTable(DistanceTableArgs),
    /// One-step approximations over a grid of the first two parameters.
    OnestepField(OnestepFieldArgs),
    /// Print a built-in family or matrix as JSON.
    Fixture(FixtureArgs),
}

/// Worker count for grid commands from `VERSAL_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("VERSAL_THREADS") else {
        return Ok(());
    };
    let n = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("VERSAL_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::SolveFamily(a) => commands::solve_family(a),
        Command::SolveMatrix(a) => commands::solve_matrix(a),
        Command::DistanceTable(a) => {
            configure_threads()?;
            commands::distance_table(a)
        }
        Command::OnestepField(a) => {
            configure_threads()?;
            commands::onestep_field(a)
        }
        Command::Fixture(a) => commands::fixture(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            let _ = stdout.flush();
            if let Some(msg) = out.message {
                eprintln!("versal: {msg}");
            }
            ExitCode::from(out.exit)
        }
        Err(e) => {
            eprintln!("versal: error: {e}");
            ExitCode::from(1)
        }
    }
}
