use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transmission log corrupted: {0}")]
    LogCorruption(String),

    #[error("average path length undefined: no reachable node pair")]
    UndefinedPathLength,

    #[error("correlation undefined: rank vector has zero variance")]
    UndefinedCorrelation,

    #[error("no connected layout after {attempts} attempts")]
    Disconnected { attempts: u32 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
