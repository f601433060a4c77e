use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two operands had incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Training diverged or produced non-finite values.
    #[error("training error: {0}")]
    Training(String),

    /// A persisted file was malformed or had the wrong version.
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    /// A file the operation depends on does not exist.
    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    /// A training set has no model file yet.
    #[error("no model for training set {set} of range {range}: {path} not found (run `train` first)")]
    MissingModel { set: String, range: String, path: PathBuf },

    /// Configuration parsing or validation failed.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
