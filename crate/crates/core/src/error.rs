use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {what} expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("empty sequence has no change fraction")]
    EmptySequence,

    #[error("empty batch: {0}")]
    EmptyBatch(&'static str),

    #[error("token id {id} out of range for vocabulary of size {size}")]
    TokenOutOfRange { id: u32, size: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A malformed input record; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Data {
        path: String,
        line: usize,
        message: String,
    },

    #[error("seen pool too small: need {required} kept examples, have {available}")]
    InsufficientSeenPool { required: usize, available: usize },

    #[error("vocabulary mismatch: checkpoint {expected}, data {found}")]
    VocabMismatch { expected: String, found: String },

    #[error("diverged at step {step}")]
    Diverged { step: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data (as opposed to bad usage or divergence).
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Data { .. }
                | Error::Json(_)
                | Error::Io { .. }
                | Error::VocabMismatch { .. }
                | Error::InsufficientSeenPool { .. }
                | Error::LengthMismatch { .. }
                | Error::EmptySequence
                | Error::EmptyBatch(_)
                | Error::TokenOutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
