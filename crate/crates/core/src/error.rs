use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} outside the domain (-{b0}, {b0}) of phi")]
    Domain { value: f64, b0: f64 },

    #[error("phi({s}) = {value} is not positive")]
    NonPositive { s: f64, value: f64 },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("zero covector has no preimage")]
    ZeroCovector,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("degenerate axis: {0}")]
    DegenerateAxis(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point lies outside the chart domain")]
    OutOfDomain,

    #[error("fundamental tensor is singular")]
    SingularTensor,

    #[error("no geodesic shot landed within {tolerance:e} of the target")]
    NotFound { tolerance: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
