use thiserror::Error;

#[derive(Debug, Error)]
pub enum CopeError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid COPE matrix: {0}")]
    Invalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular transform: {0}")]
    Singular(String),

    #[error("computation guard exceeded: {0}")]
    Guard(String),

    #[error("unknown theory `{0}`")]
    UnknownTheory(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = CopeError> = std::result::Result<T, E>;
