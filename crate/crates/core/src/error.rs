use thiserror::Error;

#[derive(Debug, Error)]
pub enum GaussError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular state: {0}")]
    SingularState(String),
    #[error("root not found: {0}")]
    RootNotFound(String),
}

pub type Result<T> = std::result::Result<T, GaussError>;
