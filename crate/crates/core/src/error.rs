use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("parse error at {position}: {message} (expected {expected})")]
    Parse {
        position: usize,
        message: String,
        expected: String,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("field construction failed: {0}")]
    Construction(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("class outside window: {0}")]
    OutOfWindow(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision(_) => 3,
            Error::Internal(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
