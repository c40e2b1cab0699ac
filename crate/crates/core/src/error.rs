use std::path::PathBuf;

use crate::geometry::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no symbol entry for label {0}")]
    MissingEntry(Label),

    #[error("symbol for label {label} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        label: Label,
        expected: usize,
        found: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error at {label}: {message}")]
    Numeric { label: String, message: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("truncation needs dimension {required}, cap is {cap}")]
    SizeExceeded { required: u128, cap: usize },

    #[error("range error: requested {requested} singular values, only {available} available")]
    Range { requested: usize, available: usize },

    #[error("operator does not look elliptic: zero symbol value at index {0}")]
    Ellipticity(i64),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("symbol/oracle mismatch at rank {rank}: |{symbol} - {oracle}| > {tolerance}")]
    Mismatch {
        rank: usize,
        symbol: f64,
        oracle: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
