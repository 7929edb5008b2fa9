use std::path::PathBuf;

use crate::allocation::AllocationResult;
use crate::equilibrium::FixedPointReport;
use crate::game::SupermodularityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("game is not supermodular under this allocation ({} negative interaction terms)", .0.violations.len())]
    SupermodularityViolation(SupermodularityReport),

    #[error("fixed-point iteration did not converge after {} iterations (last step {:e})", .0.iterations, .0.step)]
    NonConvergence(Box<FixedPointReport>),

    #[error("greedy allocation aborted after {} rounds: {cause}", .partial.trace.len())]
    Aborted {
        partial: Box<AllocationResult>,
        cause: Box<Error>,
    },

    #[error("unit {0} is already treated")]
    AlreadyTreated(usize),

    #[error("search needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("optimizer stopped after {iterations} iterations with gradient norm {gradient_norm:e}")]
    OptimizerNonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("degenerate network: {0}")]
    DegenerateNetwork(String),

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that stem from numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonConvergence(_) | Error::OptimizerNonConvergence { .. } => true,
            Error::Aborted { cause, .. } => cause.is_numeric(),
            _ => false,
        }
    }
}
