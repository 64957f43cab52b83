use alloc::boxed::Box;
use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Schur iteration did not converge within {iterations} sweeps")]
    SchurNoConvergence { iterations: usize },

    #[error("cannot swap diagonal entries {first} and {second}: eigenvalues are numerically inseparable")]
    SwapFailed { first: usize, second: usize },

    #[error("invalid cluster selection: {0}")]
    InvalidCluster(String),

    #[error("multiplicity must be ≥ 2 (got {0})")]
    InvalidMultiplicity(usize),

    #[error(
        "block-diagonalization failed: cluster spectrum overlaps the remaining spectrum \
         (separation estimate {separation:e})"
    )]
    IllSeparated { separation: f64 },

    #[error("selected eigenvalue at index {index} is repeated; use the Schur-based triple instead")]
    RepeatedEigenvalue { index: usize },

    #[error("Jordan chain is degenerate: |X (S - lambda I)^(d-1)| = {norm:e}")]
    DegenerateChain { norm: f64 },

    #[error(
        "linearized system is rank deficient (rank {rank} < {rows} rows); \
         look for an eigenvalue with a more degenerate Jordan structure (higher multiplicity)"
    )]
    RankDeficient { rank: usize, rows: usize },

    #[error("cannot select {d} eigenvalues closed under complex conjugation")]
    ConjugatePairing { d: usize },

    #[error("eigenvalue gradients coincide; step direction is undefined")]
    ZeroGradientDifference,

    #[error("solver configuration has a non-positive or non-finite tolerance, or zero iterations")]
    InvalidConfig,

    #[error("linear system is singular")]
    Singular,

    #[error("iteration {iteration}: {source}")]
    AtIteration { iteration: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        match self {
            e @ Error::AtIteration { .. } => e,
            e => Error::AtIteration {
                iteration,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any iteration context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
