use thiserror::Error;

/// Errors produced by the matrix algebra, the spectral functionals, the chain
/// catalog and the formula parser.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    Dimension {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "invalid matrix entry {value} at ({row}, {col}): entries must be finite and non-negative"
    )]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("spectral constraint violated: lambda = {lambda} must exceed rho = {rho}")]
    SpectralConstraint { lambda: f64, rho: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("formula `{formula}` is not finite and non-negative at {point}: value {value}")]
    FormulaDomain {
        formula: String,
        point: String,
        value: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
