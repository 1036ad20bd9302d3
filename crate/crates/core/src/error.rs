use thiserror::Error;

/// Errors raised by kernel evaluation, spectral machinery and energy forms.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A kernel was evaluated on the diagonal, where it is singular.
    #[error("kernel is singular on the diagonal: {0}")]
    DiagonalSingularity(String),

    /// A point lies on the boundary where an interior/exterior formula is undefined.
    #[error("point lies on the boundary: {0}")]
    BoundaryPoint(String),

    /// The requested dimension is outside the supported range.
    #[error("unsupported dimension d = {d}: {reason}")]
    UnsupportedDimension { d: usize, reason: String },

    /// Geometry and operation (or boundary data) do not match.
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    /// A structural precondition on the inputs failed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Quantities guaranteed monotone/consistent in exact arithmetic disagree
    /// beyond tolerance, pointing at a numerical defect.
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    /// A standing hypothesis of the operation (finite interior volume,
    /// boundary not charged by the energy measure) fails for the geometry.
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    /// Quadrature refinement did not settle and no divergence was identified.
    #[error("quadrature failed to converge: {0}")]
    QuadratureNonConvergence(String),

    /// The analytic tail bound of a truncated integral dominates the estimate.
    #[error("truncation dominates the estimate: {0}")]
    TruncationDominated(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
