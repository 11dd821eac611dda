use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("row {id:?} has {found} values, expected {expected}")]
    Dimension { id: String, expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no features for ids: {}", .0.join(","))]
    MissingFeatures(Vec<String>),

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("operation requires both classes, found only {0}")]
    SingleClass(&'static str),

    #[error("record {0:?} has no label")]
    Unlabeled(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown config key {key:?}{}", suggestion_suffix(.suggestion))]
    UnknownKey { key: String, suggestion: Option<String> },

    #[error("config: {0}")]
    Config(String),

    #[error("missing input: {0}")]
    MissingInput(String),
}

fn suggestion_suffix(suggestion: &Option<String>) -> String {
    match suggestion {
        Some(s) => format!(" (did you mean {s:?}?)"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Stable short tag used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } | Error::Format(_) => "parse",
            Error::DuplicateId(_) | Error::Unlabeled(_) | Error::SingleClass(_) => "validation",
            Error::Dimension { .. } | Error::DimensionMismatch { .. } => "dimension",
            Error::MissingFeatures(_) => "missing_features",
            Error::EmptyVocabulary => "empty_vocabulary",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnknownKey { .. } | Error::Config(_) => "config",
            Error::MissingInput(_) => "missing_input",
        }
    }
}
