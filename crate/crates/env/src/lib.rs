//! Control tasks with full-state snapshots.
//!
//! [`Walker`] is a planar seven-link biped (torso, thighs, shanks, feet) with
//! six actuated joints and penalty-based ground contact. [`PointMass`] is a
//! one-dimensional double integrator used for quick learner checks. Both
//! implement [`Environment`], whose snapshots restore a bit-identical
//! continuation.

mod config;
mod environment;
mod error;
mod pointmass;
mod trajectory;
pub mod walker;

pub use config::{ActionMode, JointLimits, RewardCoefficients, RobotConfig};
pub use environment::{Environment, GaitSample, StepOutcome, Termination};
pub use error::{EnvError, Result};
pub use pointmass::{PointMass, PointMassConfig, PointMassState};
pub use trajectory::TrajectoryWriter;
pub use walker::{DefaultRewardBreakdown, Observation, SimState, Walker, OBS_DIM, ACTION_DIM};
