//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by solvers, data validation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of two related quantities disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A domain type invariant was violated at construction time.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A solver configuration value is out of range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A dense operation was requested above its materialization guard.
    #[error("{what} requires {quantity} <= {limit}, got {actual}")]
    SizeGuard {
        what: &'static str,
        quantity: &'static str,
        limit: usize,
        actual: usize,
    },

    /// Bisection was invoked on a bracket without a sign change.
    #[error("bisection bracket [{a}, {b}] has no sign change")]
    NoSignChange { a: f64, b: f64 },

    /// The objective left the representable range during a fit.
    #[error("objective became non-finite at iteration {iter}")]
    NonFiniteObjective { iter: usize },

    /// A dense factorization or linear solve failed.
    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),

    /// A data file could not be parsed.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
