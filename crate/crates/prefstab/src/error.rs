use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("solver limit: {0}")]
    SolverLimit(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("share-sum violation: {0}")]
    ShareSum(String),
    #[error("bound error: {0}")]
    Bound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Structural(msg.into()))
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
