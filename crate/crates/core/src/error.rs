use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("malformed tree in {doc_id}:{segment_index}: {message}")]
    MalformedTree {
        doc_id: String,
        segment_index: usize,
        message: String,
    },

    #[error("pattern error at {location}: {message}")]
    Pattern { location: String, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("leakage: {0}")]
    Leakage(String),

    #[error("missing resolution for disagreeing instances: {}", .0.join(", "))]
    MissingResolution(Vec<String>),

    #[error("duplicate annotation for instance {instance_id} by {annotator}")]
    DuplicateAnnotation {
        instance_id: String,
        annotator: String,
    },

    #[error("unknown instance id {0}")]
    UnknownInstance(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
