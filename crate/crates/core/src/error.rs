use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("point is not on the zero set (|p(x)| = {value:e}, tolerance {tol:e})")]
    NotOnZeroSet { value: f64, tol: f64 },

    #[error("polynomial vanishes identically near the point")]
    VanishesIdentically,

    #[error("frequency undefined: H(r, x0, p) = {0:e}")]
    UndefinedFrequency(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined distance: both sets are empty in the ball")]
    UndefinedDistance,

    #[error("empty point cloud in the ball")]
    EmptyCloud,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("all-zero sign field")]
    AllZeroField,

    #[error("normalization failure: p is constant on the sphere")]
    NormalizationFailure,

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("calibration: {0}")]
    Calibration(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
