use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model was evaluated outside the range where its formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Regression or fit input carries no information (e.g. all speeds equal).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("{file}: key `{key}`: {message}")]
    Config {
        file: String,
        key: String,
        message: String,
    },

    #[error("time step failed at t = {t:.6} s: {message}")]
    StepFailure { t: f64, message: String },

    #[error("no bundle segments in the requested region")]
    EmptyRegion,

    #[error("stack generation did not reach the target volume fraction after {0} attempts")]
    TargetUnreachable(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(file: impl Into<String>, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            file: file.into(),
            key: key.into(),
            message: message.into(),
        }
    }
}
