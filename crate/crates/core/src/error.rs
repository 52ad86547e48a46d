use thiserror::Error;

/// Errors produced by the analysis pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum SynsqError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no ridge present: the plane is identically zero")]
    NoRidge,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SynsqError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SynsqError::InvalidArgument(msg.into()))
}
