use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape {index} extends outside the bounding box")]
    ShapeOutsideBox { index: usize },

    #[error("domain mask is empty")]
    EmptyMask,

    #[error("grid mismatch between {0} and {1}")]
    GridMismatch(&'static str, &'static str),

    #[error("potential must be finite and nonnegative (value {value} at lattice index {index})")]
    InvalidPotential { index: usize, value: f64 },

    #[error("submask is not contained in the operator's mask")]
    NotASubmask,

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("requested {requested} eigenpairs but the operator has dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },

    #[error("t = {t} lies above the certified cutoff {cutoff}")]
    AboveCutoff { t: f64, cutoff: f64 },

    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,

    #[error("vector length {got} does not match operator dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("t = {t} is below the kernel resolution limit {t_min}")]
    BelowResolution { t: f64, t_min: f64 },

    #[error("spectral tail bound {bound:e} exceeds tolerance {tol:e}")]
    UncertifiedTail { bound: f64, tol: f64 },

    #[error("padding margin {margin} is below the required {required}")]
    InsufficientPadding { margin: f64, required: f64 },

    #[error("weight |xi| h = {value} exceeds the validity window 0.1")]
    WeightWindow { value: f64 },

    #[error("point {0:?} is not an occupied cell")]
    NotOccupied(Vec<f64>),

    #[error("unsupported set family: {0}")]
    UnsupportedSetFamily(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed to reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("radius {r} is too small for grid spacing {h}")]
    RadiusTooSmall { r: f64, h: f64 },

    #[error("cutoff support condition violated at {cells} cells")]
    SupportViolated { cells: usize },

    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
