use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid group element {coords:?}: {reason}")]
    InvalidElement { coords: Vec<f64>, reason: String },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("non-finite sample at grid index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("point set is not dense for the window: grid point {point:?} is uncovered")]
    NotDense { point: Vec<f64> },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("weight is not integrable on ball B({center:?}, {radius})")]
    NonIntegrable { center: Vec<f64>, radius: f64 },

    #[error("window is not relatively compact: {0}")]
    UnboundedWindow(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
