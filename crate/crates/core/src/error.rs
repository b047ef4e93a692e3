use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid field dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("field data has length {actual}, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("cannot upsample {from:?} to the smaller size {to:?}")]
    Shrinking { from: (usize, usize), to: (usize, usize) },
    #[error("downsampling factor must lie in (0, 1), got {0}")]
    InvalidFactor(f64),
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("non-positive depth {value} at index {index}")]
    NonPositiveDepth { index: usize, value: f64 },
    #[error("non-positive irradiance {value} at index {index}")]
    NonPositiveIrradiance { index: usize, value: f64 },
    #[error("degenerate tangent: denominator vanishes")]
    DegenerateTangent,
    #[error("degenerate brightness model: W vanishes")]
    DegenerateModel,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("confidence must lie in [0, 1], got {value} at index {index}")]
    InvalidConfidence { index: usize, value: f64 },
    #[error("non-finite depth at level {level}, iteration {iteration}")]
    Diverged { level: usize, iteration: usize },
    #[error("ground truth has zero mass")]
    ZeroMass,
}
