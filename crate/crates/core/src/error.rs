use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value. `field` is a dotted path into the config file.
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A dataset file disagrees with its manifest or is malformed.
    #[error("integrity error in `{file}`: {message}")]
    Integrity { file: String, message: String },

    #[error("encoder `{encoder}` produced invalid output: {message}")]
    Encoding { encoder: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("training diverged: {0}")]
    Divergence(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn integrity(file: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Integrity {
            file: file.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category used by the CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
            Error::Integrity { .. } => "integrity",
            Error::Encoding { .. } => "encoding",
            Error::Usage(_) => "usage",
            Error::Data(_) => "data",
            Error::Divergence(_) => "divergence",
        }
    }
}
