use thiserror::Error;

use crate::optimizer::StateDump;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid data file: {0}")]
    Format(String),

    #[error("numeric abort at iteration {iteration}: {reason}")]
    NumericAbort {
        iteration: usize,
        reason: String,
        dump: Box<StateDump>,
    },

    #[error("audit unavailable: {0}")]
    AuditUnavailable(String),

    #[error("invariant `{invariant}` violated at iteration {iteration} (margin {margin:e})")]
    InvariantViolation {
        invariant: String,
        iteration: usize,
        margin: f64,
    },

    #[error("comparison refused: {0}")]
    Comparison(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
