use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("series is empty")]
    EmptySeries,
    #[error("replay buffer is empty")]
    EmptyBuffer,
    #[error("transition {0} carries no simulator snapshot")]
    MissingSnapshot(usize),
    #[error("curve needs at least 2 samples, got {0}")]
    CurveTooShort(usize),
    #[error("no complete gait")]
    NoCompleteGait,
    #[error("reference table: {0}")]
    Reference(String),
    #[error(transparent)]
    Learner(#[from] atd3::Atd3Error),
    #[error(transparent)]
    Nn(#[from] atd3_nn::NnError),
    #[error(transparent)]
    Env(#[from] atd3_env::EnvError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;
