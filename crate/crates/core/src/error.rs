use thiserror::Error;

pub type Result<T> = std::result::Result<T, MrtaError>;

#[derive(Debug, Error)]
pub enum MrtaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// No grid path connects locations `from` and `to`.
    #[error("no path between locations {from} and {to}")]
    InfeasiblePair { from: usize, to: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{members} members exceed the exhaustive-search limit of {limit}")]
    SizeLimit { members: usize, limit: usize },

    #[error("scenario generation failed: {0}")]
    GenerationFailure(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MrtaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MrtaError::InvalidInput(msg.into())
    }
}
