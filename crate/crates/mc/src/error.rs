use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Core(#[from] feller_core::CoreError),

    #[error("invalid path configuration: {0}")]
    InvalidConfig(String),

    #[error("geometry not supported by this engine: {0}")]
    UnsupportedGeometry(String),

    /// The estimator's validity condition (separated supports away from the
    /// diagonal) is not met.
    #[error("estimator invalid: {0}")]
    EstimatorInvalid(String),

    /// A step moved further past the boundary than the scheme tolerates.
    #[error("numerical instability: step left the domain by {overshoot:.3e} (limit {limit:.3e})")]
    Instability { overshoot: f64, limit: f64 },

    /// The analytic bound on the truncated starting-measure tail is too large
    /// relative to the estimate.
    #[error("truncation dominates the estimate: {0}")]
    TruncationDominated(String),
}

pub type Result<T> = std::result::Result<T, McError>;
