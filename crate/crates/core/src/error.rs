use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),
    #[error("zero vector cannot be normalised")]
    ZeroVector,
    #[error("invalid angular set: {0}")]
    InvalidAngularSet(String),
    #[error("direction is not on the boundary of the angular set")]
    NotOnBoundary,
    #[error("invalid phantom: {0}")]
    InvalidPhantom(String),
    #[error("too few boundary samples: {got} (minimum {min})")]
    TooFewSamples { got: usize, min: usize },
    #[error("phantom has no primitive with a singular boundary")]
    NoSingularPrimitive,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("offset range [{start}, {end}] does not cover [{lo}, {hi}]")]
    OffsetCoverage { start: f64, end: f64, lo: f64, hi: f64 },
    #[error("weight is not positive: value {value} at direction {direction:?}, point {point:?}")]
    NonPositiveWeight { value: f64, direction: Vec<f64>, point: Vec<f64> },
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("zero covector")]
    ZeroCovector,
    #[error("non-cancellation violated: {0}")]
    NonCancellation(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("invalid detector configuration: {0}")]
    InvalidDetector(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
