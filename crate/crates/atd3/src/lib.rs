//! TD3 and adversarial twin-critic (ATD3, ATD3 with a GRU encoder) learners.
//!
//! [`Learner`] holds the actor, both critics, their target copies and
//! optimizers. [`Trainer`] drives an [`atd3_env::Environment`], finalizes
//! each episode's rewards (optionally with gait terms), stores transitions
//! and runs one update per collected step.

mod buffer;
mod error;
mod hyperparams;
mod learner;
mod networks;
mod sequence;
mod trainer;

pub use buffer::{ReplayBuffer, Transition};
pub use error::{Atd3Error, Result};
pub use hyperparams::{Hyperparams, Variant};
pub use learner::{
    add_exploration_noise, compute_target, critic_loss_grads, load_actor, random_action,
    smooth_target_action, soft_update, Batch, CriticLossGrads, CriticStats, Learner, TrainStats,
};
pub use networks::{Actor, ActorCache, Critic, CriticCache, Encoder, EncoderCache, SeqBatch};
pub use sequence::SequenceWindow;
pub use trainer::{stream_rng, EpisodeSummary, Trainer, TrainerConfig};
