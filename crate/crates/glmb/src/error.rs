use thiserror::Error;

/// Errors surfaced by filter operations.
#[derive(Debug, Error)]
pub enum GlmbError {
    /// Every component weight is zero (all log-weights are -inf).
    #[error("degenerate density: all component weights are zero")]
    DegenerateDensity,

    /// Truncation was asked to keep zero components.
    #[error("truncation cap must be at least 1")]
    ZeroCap,

    /// Matrix or vector dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The innovation covariance of a Kalman update could not be inverted.
    #[error("singular innovation covariance")]
    SingularInnovation,

    /// An assignment-problem row has no finite-cost column.
    #[error("assignment row {0} has no finite-cost entry")]
    InfeasibleRow(usize),

    /// No finite-cost assignment exists.
    #[error("no finite-cost assignment exists")]
    InfeasibleAssignment,

    /// The Gibbs conditional for a track has empty support.
    #[error("degenerate row: Gibbs conditional for track {0} has no support")]
    DegenerateRow(usize),

    /// The joint step produced no components.
    #[error("empty posterior after joint step")]
    EmptyPosterior,

    /// Invalid model or configuration parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
