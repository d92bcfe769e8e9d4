use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid frequency: tangential frequency must be nonzero")]
    InvalidFrequency,

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("singular transmission system (|det T| = {abs_det:e})")]
    SingularSystem { abs_det: f64 },

    #[error("pseudoconvexity failed: {reason} at xi = {xi:?}, tau = {tau}")]
    PseudoconvexityFailed { reason: String, xi: Vec<f64>, tau: f64 },

    #[error("unsupported derivative order {0} (at most 2)")]
    UnsupportedOrder(usize),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("support violation: field extends to radius {radius} but at most {limit} is allowed")]
    Support { radius: f64, limit: f64 },

    #[error("overflow budget exceeded: tau = {tau} exceeds admissible tau_max = {tau_max}")]
    OverflowBudget { tau: f64, tau_max: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
