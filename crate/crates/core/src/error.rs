use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
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

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: missing column `{column}` in header")]
    MissingColumn { path: PathBuf, column: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown standardization rule `{id}`; valid rules: {}", valid.join(", "))]
    UnknownRule { id: String, valid: Vec<&'static str> },

    #[error("cannot merge an empty cluster")]
    EmptyCluster,

    #[error("soundex requires a name starting with an ASCII letter, got {0:?}")]
    SoundexInput(String),

    #[error("profiles cover different fields: {before:?} vs {after:?}")]
    SchemaMismatch { before: Vec<String>, after: Vec<String> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }

    /// Configuration problems are reported before any artifact is written.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::UnknownRule { .. })
    }
}
