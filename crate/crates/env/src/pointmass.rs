//! One-dimensional double integrator: push a unit mass to the origin.
//!
//! Observation `[x, v]`, action a force in `[-1, 1]` scaled by
//! `force_limit`, reward `-x^2 - control_cost * a^2`. Leaving the track
//! costs `exit_penalty` once and ends the episode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{Environment, StepOutcome, Termination};
use crate::error::{EnvError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointMassConfig {
    pub dt: f64,
    pub mass: f64,
    pub force_limit: f64,
    pub control_cost: f64,
    /// Initial position is uniform in `[-start_range, start_range]`.
    pub start_range: f64,
    pub start_velocity_range: f64,
    /// Leaving `[-bound, bound]` ends the episode as a failure.
    pub bound: f64,
    pub exit_penalty: f64,
    pub episode_cap: usize,
}

impl Default for PointMassConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            mass: 1.0,
            force_limit: 1.0,
            control_cost: 0.01,
            start_range: 2.0,
            start_velocity_range: 0.5,
            bound: 5.0,
            exit_penalty: 100.0,
            episode_cap: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMassState {
    pub x: f64,
    pub v: f64,
    pub step: usize,
}

#[derive(Clone, Debug)]
pub struct PointMass {
    config: PointMassConfig,
    state: PointMassState,
}

impl PointMass {
    pub fn new(config: PointMassConfig) -> Result<Self> {
        let positive = [
            config.dt,
            config.mass,
            config.force_limit,
            config.bound,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(EnvError::InvalidConfig(
                "dt, mass, force_limit and bound must be positive".into(),
            ));
        }
        if config.episode_cap == 0 || config.start_range >= config.bound {
            return Err(EnvError::InvalidConfig(
                "episode_cap must be positive and start_range inside bound".into(),
            ));
        }
        Ok(Self {
            config,
            state: PointMassState {
                x: 0.0,
                v: 0.0,
                step: 0,
            },
        })
    }

    pub fn config(&self) -> &PointMassConfig {
        &self.config
    }
}

impl Environment for PointMass {
    type Snapshot = PointMassState;

    fn obs_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn episode_cap(&self) -> usize {
        self.config.episode_cap
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xr = self.config.start_range;
        let vr = self.config.start_velocity_range;
        self.state = PointMassState {
            x: if xr > 0.0 { rng.random_range(-xr..=xr) } else { 0.0 },
            v: if vr > 0.0 { rng.random_range(-vr..=vr) } else { 0.0 },
            step: 0,
        };
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        if action.len() != 1 {
            return Err(EnvError::ActionLength {
                expected: 1,
                got: action.len(),
            });
        }
        if !action[0].is_finite() {
            return Err(EnvError::NonFiniteAction);
        }
        let c = &self.config;
        let a = action[0].clamp(-1.0, 1.0);
        let s = &mut self.state;
        s.v += c.dt * a * c.force_limit / c.mass;
        s.x += c.dt * s.v;
        s.step += 1;
        let mut reward = -s.x * s.x - c.control_cost * a * a;
        let termination = if s.x.abs() > c.bound {
            reward -= c.exit_penalty;
            Termination::Fallen
        } else if s.step >= c.episode_cap {
            Termination::TimeLimit
        } else {
            Termination::Running
        };
        Ok(StepOutcome {
            observation: self.observe(),
            reward,
            termination,
        })
    }

    fn observe(&self) -> Vec<f64> {
        vec![self.state.x, self.state.v]
    }

    fn snapshot(&self) -> PointMassState {
        self.state.clone()
    }

    fn restore(&mut self, snapshot: &PointMassState) {
        self.state = snapshot.clone();
    }
}
