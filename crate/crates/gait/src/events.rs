use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GaitError {
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Per-step contact flags and joint angles
/// `[rh, rk, ra, lh, lk, la]`, recorded after each step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactTrace {
    pub right: Vec<bool>,
    pub left: Vec<bool>,
    pub angles: Vec<[f64; 6]>,
}

impl ContactTrace {
    pub fn push(&mut self, right: bool, left: bool, angles: [f64; 6]) {
        self.right.push(right);
        self.left.push(left);
        self.angles.push(angles);
    }

    pub fn len(&self) -> usize {
        self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.right.is_empty()
    }

    /// Angles of `joint` over the inclusive step range `[from, to]`.
    pub fn joint_curve(&self, joint: usize, from: usize, to: usize) -> Vec<f64> {
        self.angles[from..=to].iter().map(|a| a[joint]).collect()
    }
}

/// Rising edges of a contact flag. Index 0 never counts, even when the
/// foot starts on the ground.
pub fn detect_heel_strikes(contacts: &[bool]) -> Vec<usize> {
    contacts
        .windows(2)
        .enumerate()
        .filter(|(_, w)| !w[0] && w[1])
        .map(|(i, _)| i + 1)
        .collect()
}

/// Lengths of maximal runs where both feet are down.
pub fn double_support_runs(right: &[bool], left: &[bool]) -> Result<Vec<usize>, GaitError> {
    if right.len() != left.len() {
        return Err(GaitError::LengthMismatch(right.len(), left.len()));
    }
    let mut runs = Vec::new();
    let mut run = 0;
    for (&r, &l) in right.iter().zip(left) {
        if r && l {
            run += 1;
        } else if run > 0 {
            runs.push(run);
            run = 0;
        }
    }
    if run > 0 {
        runs.push(run);
    }
    Ok(runs)
}

/// Tracks the current double-support run while an episode is running.
#[derive(Clone, Debug, Default)]
pub struct DoubleSupportMonitor {
    limit: usize,
    run: usize,
}

impl DoubleSupportMonitor {
    pub fn new(limit: usize) -> Self {
        Self { limit, run: 0 }
    }

    /// Feeds one step; true once the run exceeds the limit.
    pub fn update(&mut self, right: bool, left: bool) -> bool {
        self.run = if right && left { self.run + 1 } else { 0 };
        self.run > self.limit
    }

    pub fn current_run(&self) -> usize {
        self.run
    }
}
