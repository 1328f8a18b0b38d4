use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Atd3Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Twin critics, min target, actor on the first critic.
    Td3,
    /// Adds the adversarial critic term and a mean-of-critics actor objective.
    Atd3,
    /// `Atd3` with a GRU encoder over a short observation sequence.
    Atd3Rnn,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Td3, Variant::Atd3, Variant::Atd3Rnn];

    pub fn uses_gru(self) -> bool {
        self == Variant::Atd3Rnn
    }

    /// Whether the actor maximizes the mean of both critics.
    pub fn mean_q_actor(self) -> bool {
        self != Variant::Td3
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Td3 => "td3",
            Variant::Atd3 => "atd3",
            Variant::Atd3Rnn => "atd3_rnn",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Atd3Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "td3" => Ok(Variant::Td3),
            "atd3" => Ok(Variant::Atd3),
            "atd3_rnn" | "atd3-rnn" => Ok(Variant::Atd3Rnn),
            other => Err(Atd3Error::InvalidHyperparams(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub variant: Variant,
    pub gamma: f64,
    /// Soft target update rate.
    pub tau: f64,
    /// Critic updates per actor update.
    pub policy_delay: u64,
    /// Adversarial temperature; ignored by `Td3`.
    pub beta: f64,
    /// Std of exploration noise on actions.
    pub exploration_noise: f64,
    /// Std of target policy smoothing noise.
    pub target_noise: f64,
    pub noise_clip: f64,
    pub batch_size: usize,
    /// Uniformly random actions before this many environment steps.
    pub start_steps: u64,
    pub learning_rate: f64,
    pub seq_len: usize,
    pub buffer_capacity: usize,
    /// Encoder output width (GRU hidden size or first dense layer).
    pub encoder_width: usize,
    /// Width of the dense layers after the encoder.
    pub hidden_width: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self::for_variant(Variant::Atd3)
    }
}

impl Hyperparams {
    pub fn for_variant(variant: Variant) -> Self {
        Self {
            variant,
            gamma: 0.99,
            tau: 0.005,
            policy_delay: 2,
            beta: if variant == Variant::Td3 { 0.0 } else { 0.1 },
            exploration_noise: 0.1,
            target_noise: 0.2,
            noise_clip: 0.5,
            batch_size: 100,
            start_steps: 10_000,
            learning_rate: 1e-3,
            seq_len: if variant.uses_gru() { 2 } else { 1 },
            buffer_capacity: 1_000_000,
            encoder_width: 64,
            hidden_width: 64,
        }
    }

    /// Adversarial weight actually used in the critic loss.
    pub fn effective_beta(&self) -> f64 {
        if self.variant == Variant::Td3 {
            0.0
        } else {
            self.beta
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Atd3Error::InvalidHyperparams(m));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must be in [0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must be in (0, 1], got {}", self.tau));
        }
        if !(0.0..0.5).contains(&self.beta) {
            return bad(format!("beta must be in [0, 0.5), got {}", self.beta));
        }
        if self.policy_delay == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("policy_delay, batch_size and buffer_capacity must be positive".into());
        }
        if self.seq_len == 0 {
            return bad("seq_len must be at least 1".into());
        }
        if !self.variant.uses_gru() && self.seq_len != 1 {
            return bad(format!("variant {} needs seq_len 1", self.variant));
        }
        for (name, v) in [
            ("exploration_noise", self.exploration_noise),
            ("target_noise", self.target_noise),
            ("noise_clip", self.noise_clip),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative"));
            }
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive".into());
        }
        if self.encoder_width == 0 || self.hidden_width == 0 {
            return bad("layer widths must be positive".into());
        }
        Ok(())
    }
}
