use thiserror::Error;

/// Errors raised by the flow, observable and estimator layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShearError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("negative time {0} for a semi-flow")]
    NegativeTime(f64),

    #[error("time {0} is not an integer; this system is a map")]
    NonIntegerTime(f64),

    #[error("time must be finite, got {0}")]
    NonFiniteTime(f64),

    #[error("argument outside its domain: {0}")]
    OutOfDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("base density does not normalize: integral = {integral}")]
    Unnormalizable { integral: f64 },

    #[error("quadrature did not converge: |I(N) - I(2N)| = {difference:e} > {tolerance:e} at N = {nodes}")]
    QuadratureNotConverged { difference: f64, tolerance: f64, nodes: usize },

    #[error("observable is not a pure torus observable: {0}")]
    NotPureTorus(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("series is fully decayed (every envelope value below {threshold:e})")]
    FullyDecayed { threshold: f64 },

    #[error("not enough points for a fit: {found} < {required}")]
    TooFewPoints { found: usize, required: usize },

    #[error("mismatched p-adic operands: {0}")]
    PAdicMismatch(String),
}

pub type Result<T> = std::result::Result<T, ShearError>;

pub(crate) fn dim_err(expected: impl ToString, found: impl ToString) -> ShearError {
    ShearError::DimensionMismatch { expected: expected.to_string(), found: found.to_string() }
}
