use thiserror::Error;

/// Errors produced by oracles, decompositions, kernels and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not in the interior of the body")]
    NotInterior,

    #[error("point is within {margin:e} of the boundary, below the oracle precision")]
    TooCloseToBoundary { margin: f64 },

    #[error("unsupported capability: {0}")]
    Unsupported(String),

    #[error("point lies on a dyadic cube boundary at level {level}")]
    BoundaryPoint { level: u32 },

    #[error("no candidate level passed the subdivision checks")]
    LocateFailed,

    #[error("step failed after {attempts} attempts: {reason}")]
    StepFailure { attempts: u32, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid body field `{field}`: {reason}")]
    InvalidBody { field: String, reason: String },

    #[error("inconsistent volume: body volume {volume} but enumerated cubes cover {covered}")]
    InconsistentVolume { volume: f64, covered: f64 },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("decomposition is missing a neighbor of cube at level {level}")]
    DecompositionGap { level: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_body(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidBody {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Failures that a kernel may retry with a fresh random draw.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::BoundaryPoint { .. } | Error::TooCloseToBoundary { .. } | Error::LocateFailed
        )
    }
}
