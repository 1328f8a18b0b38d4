use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("action has {got} entries, expected {expected}")]
    ActionLength { expected: usize, got: usize },
    #[error("action contains a non-finite value")]
    NonFiniteAction,
    #[error("state snapshot rejected: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, EnvError>;
