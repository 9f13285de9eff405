use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the gallery, calibration, protocol and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("vector contains a non-finite component at position {0}")]
    NonFinite(usize),
    #[error("vector must have at least one component")]
    EmptyVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("identity label must not be empty")]
    EmptyLabel,
    #[error("no gallery entry with registration index {0}")]
    UnknownIndex(usize),
    #[error("threshold {0} is outside [-1, 1]")]
    ThresholdOutOfRange(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported snapshot format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for violations of an operation's preconditions, as opposed to
    /// malformed input. The CLI maps these to a distinct exit code.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::UnknownIndex(_)
                | Error::InsufficientData(_)
                | Error::InvalidConfig(_)
                | Error::EmptyDataset
                | Error::ThresholdOutOfRange(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
