use thiserror::Error;

/// Errors raised by model construction, propagation and the experiment layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("unsupported donor count ({n_left}, {n_right}); each dot holds 1 or 2 donors")]
    UnsupportedDonorCount { n_left: usize, n_right: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |H - H^†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("generator contains non-finite entries")]
    NonFinite,

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("{0}")]
    OutOfDomain(String),

    #[error("no normalizable steady state found (trace of null vector = {trace:e})")]
    NoSteadyState { trace: f64 },

    #[error("empty stage list")]
    EmptyStages,

    #[error("grid point ({ix}, {iy}) at ({x}, {y}) failed: {source}")]
    GridPoint {
        ix: usize,
        iy: usize,
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("unit mismatch for `{found}`: expected `{expected}`")]
    UnitMismatch { found: String, expected: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
