//! Small differentiable building blocks for actor-critic networks.
//!
//! Everything here works on mini-batches stored as row-major [`Tensor2`]
//! values (one sample per row). Layers expose a pure `forward` and a
//! `forward_cached` / `backward` pair that computes exact parameter and input
//! gradients by hand-written reverse-mode differentiation.

mod activation;
mod adam;
mod checkpoint;
mod dense;
mod error;
mod gru;
mod loss;
mod params;
mod tensor;

pub use activation::Activation;
pub use adam::{sgd_step, Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CheckpointMeta, TensorRecord};
pub use dense::{DenseCache, DenseLayer};
pub use error::{NnError, Result};
pub use gru::{GruCache, GruCell, GruSeqCache};
pub use loss::{mse, mse_grad};
pub use params::{params_max_abs_diff, Parameters};
pub use tensor::Tensor2;
