use crate::error::Result;

/// Why an episode stopped, if it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Termination {
    Running,
    /// The task failed (robot fell); no value beyond this step.
    Fallen,
    /// Step cap reached; the state itself is not terminal.
    TimeLimit,
    /// Integration produced a non-finite value.
    NumericalError,
}

impl Termination {
    pub fn is_done(self) -> bool {
        self != Termination::Running
    }

    /// Whether bootstrapping must stop at this transition.
    pub fn is_absorbing(self) -> bool {
        matches!(self, Termination::Fallen | Termination::NumericalError)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    /// Task-default reward for the step.
    pub reward: f64,
    pub termination: Termination,
}

/// Per-step signals consumed by gait segmentation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaitSample {
    pub right_contact: bool,
    pub left_contact: bool,
    /// Right hip, knee, ankle, then left hip, knee, ankle (rad).
    pub joint_angles: [f64; 6],
}

/// Gym-style episodic task with exact save/restore.
pub trait Environment: Send {
    type Snapshot: Clone + Send + Sync + std::fmt::Debug;

    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Steps after which an episode reports [`Termination::TimeLimit`].
    fn episode_cap(&self) -> usize;

    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<StepOutcome>;
    fn observe(&self) -> Vec<f64>;

    fn snapshot(&self) -> Self::Snapshot;
    fn restore(&mut self, snapshot: &Self::Snapshot);

    /// Contact flags and joint angles of the current state, for tasks that
    /// have legs.
    fn gait_sample(&self) -> Option<GaitSample> {
        None
    }

    /// Forward distance covered since reset.
    fn forward_displacement(&self) -> f64 {
        0.0
    }
}
