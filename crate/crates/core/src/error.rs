use thiserror::Error;

/// Errors raised by operators, solvers and certifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("divergence detected at iteration {iteration}")]
    DivergenceDetected { iteration: usize },
    #[error("method `{method}` is not applicable: {reason}")]
    Inapplicable { method: String, reason: String },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("trace was recorded without full iterates")]
    MissingIterates,
    #[error("oracle failed: {0}")]
    OracleFailed(String),
    #[error("unsupported operator kind: {0}")]
    UnsupportedKind(String),
}

pub type Result<T> = std::result::Result<T, Error>;
