use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("backward called without a cached forward pass")]
    NoForwardPass,
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;

pub(crate) fn check_shape(
    context: &'static str,
    expected: (usize, usize),
    got: (usize, usize),
) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(NnError::ShapeMismatch {
            context,
            expected,
            got,
        })
    }
}
