use thiserror::Error;

#[derive(Debug, Error)]
pub enum Atd3Error {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("state sequence has {got} values, expected {expected}")]
    SequenceShape { expected: usize, got: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("environment provides no gait signals but gait rewards are enabled")]
    NoGaitSignals,
    #[error(transparent)]
    Nn(#[from] atd3_nn::NnError),
    #[error(transparent)]
    Env(#[from] atd3_env::EnvError),
    #[error(transparent)]
    Gait(#[from] atd3_gait::GaitError),
}

pub type Result<T> = std::result::Result<T, Atd3Error>;
