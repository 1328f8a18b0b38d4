use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot write `{path}`: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Learner(#[from] atd3::Atd3Error),
    #[error(transparent)]
    Eval(#[from] atd3_eval::EvalError),
    #[error(transparent)]
    Env(#[from] atd3_env::EnvError),
    #[error(transparent)]
    Nn(#[from] atd3_nn::NnError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
