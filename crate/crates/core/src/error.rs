use thiserror::Error;

/// Errors raised by the qentropy operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} is outside the function domain: {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("q-exponential undefined: 1 + (1 - q) x = {base} <= 0")]
    Undefined { base: f64 },

    #[error("entropic index must be finite and non-negative, got {0}")]
    InvalidIndex(f64),

    #[error("weight {index} is not strictly positive: {value}")]
    Positivity { index: usize, value: f64 },

    #[error("weights sum to {sum}, not 1")]
    Normalization { sum: f64 },

    #[error("empty weight vector")]
    Empty,

    #[error("malformed partition: {0}")]
    Partition(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid generator {label}: {reason}")]
    InvalidGenerator { label: String, reason: String },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid axes: {0}")]
    Axes(String),

    #[error("degenerate second-derivative range: {0}")]
    DegenerateRange(String),

    #[error("unknown case id {0:?}")]
    UnknownCase(String),
}

pub type Result<T> = std::result::Result<T, Error>;
