//! Error types shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by data handling, training, and the experiment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor or vector dimensions do not match.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A non-finite value (NaN or infinity) was produced or supplied.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Invalid argument or malformed input data.
    #[error("validation error: {0}")]
    Validation(String),

    /// Invalid configuration value or file.
    #[error("config error: {0}")]
    Config(String),

    /// An operation was invoked before its prerequisite state was established.
    #[error("state error: {0}")]
    State(String),

    /// Not enough data to compute the requested quantity.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A checkpoint or dataset is incompatible with the requested operation.
    #[error("incompatible: {0}")]
    Incompatible(String),

    /// Training aborted because a loss became non-finite.
    #[error("training diverged at iteration {iteration}: {detail}")]
    Diverged { iteration: usize, detail: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
