use std::path::PathBuf;

use crate::problem::Trace;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A non-finite objective value was produced. The trace recorded up to
    /// (and excluding) the offending iteration is kept for inspection.
    #[error("objective became non-finite at outer iteration {outer_index}")]
    Diverged {
        outer_index: usize,
        partial: Box<Trace>,
    },

    #[error(
        "planned schedule exhausted: requested outer iteration {requested}, plan has {planned}"
    )]
    PlanExhausted { requested: usize, planned: usize },

    #[error("no feasible number of outer iterations: {reason}")]
    Infeasible { reason: String },

    /// Case-1 planning found an empty integer feasibility interval.
    #[error("empty feasibility interval [{lower}, {upper}] for an all-ones schedule")]
    EmptyInterval { lower: f64, upper: f64 },

    #[error("cannot fit error model: {0}")]
    DegenerateFit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed input: {reason}")]
    Parse { path: PathBuf, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
