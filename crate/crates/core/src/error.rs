use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Error, Debug)]
pub enum McdError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "Cholesky factorization failed at pivot {index} (value {pivot:.3e}); \
         the support may not be Zariski dense or the quadrature is under-resolved"
    )]
    CholeskyFailure { index: usize, pivot: f64 },

    #[error(
        "moment matrix too ill-conditioned: pivot ratio {ratio:.3e} exceeds {limit:.1e}"
    )]
    ConditionOverflow { ratio: f64, limit: f64 },

    #[error("non-finite value encountered while integrating at node {index}")]
    NonFiniteIntegrand { index: usize },

    #[error("mollifier sub-rule did not converge: refinement changed the result by {delta:.3e}")]
    UnresolvedMollifier { delta: f64 },

    #[error("dichotomy bound inapplicable: epsilon {epsilon} is not below delta/2 = {half_delta}")]
    BoundInapplicable { epsilon: f64, half_delta: f64 },

    #[error("degenerate estimate: g_hat = {g_hat:.3e} is not positive")]
    DegenerateEstimate { g_hat: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, McdError>;
