use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid blade: index {index} exceeds dimension {dim}")]
    InvalidBlade { index: u32, dim: u32 },
    #[error("blade indices must be strictly increasing")]
    UnsortedBlade,
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: u32, right: u32 },
    #[error("grade {grade} out of range for dimension {dim}")]
    GradeOutOfRange { grade: u32, dim: u32 },
    #[error("operand is not homogeneous of a single grade")]
    NotHomogeneous,
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: u32, dim: u32 },
    #[error("dimension {dim} unsupported: {reason}")]
    UnsupportedDimension { dim: u32, reason: &'static str },
    #[error("kernel evaluated at the singular point x = 0")]
    Singularity,
    #[error("evaluation point within {dist:.3e} of the boundary (guard band {guard:.3e}); enable near-boundary mode")]
    NearSingularity { dist: f64, guard: f64 },
    #[error("volume grid is empty")]
    EmptyGrid,
    #[error("frame is not orthonormal")]
    NotOrthonormal,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
