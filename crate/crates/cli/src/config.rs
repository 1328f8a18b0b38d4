//! Run configuration: defaults, config files and command-line overrides.

use std::path::{Path, PathBuf};

use atd3::{Hyperparams, Variant};
use atd3_env::{PointMassConfig, RobotConfig};
use atd3_gait::{GaitRewardConfig, RewardSet};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvKind {
    #[serde(rename = "walker2d")]
    Walker2d,
    #[serde(rename = "pointmass-1d")]
    PointMass1d,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Walker2d => "walker2d",
            EnvKind::PointMass1d => "pointmass-1d",
        }
    }
}

impl std::str::FromStr for EnvKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walker2d" | "walker" => Ok(EnvKind::Walker2d),
            "pointmass-1d" | "pointmass" => Ok(EnvKind::PointMass1d),
            other => Err(CliError::Config(format!("unknown env `{other}`"))),
        }
    }
}

/// Learner settings that replace the per-variant defaults when present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HpOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_delay: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploration_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_clip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_capacity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoder_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_width: Option<usize>,
}

impl HpOverrides {
    pub fn apply(&self, hp: &mut Hyperparams) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { hp.$f = v; })*};
        }
        set!(
            gamma, tau, policy_delay, beta, exploration_noise, target_noise, noise_clip, batch_size, start_steps,
            learning_rate, seq_len, buffer_capacity, encoder_width, hidden_width
        );
    }

    /// Fields set in `other` win.
    pub fn merge(&mut self, other: &HpOverrides) {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f; })*};
        }
        take!(
            gamma, tau, policy_delay, beta, exploration_noise, target_noise, noise_clip, batch_size, start_steps,
            learning_rate, seq_len, buffer_capacity, encoder_width, hidden_width
        );
    }
}

/// Gait-reward parameters other than the choice of terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSettings {
    pub step_offset: f64,
    pub min_cycle: usize,
    pub lookahead: usize,
    pub double_support_limit: usize,
    pub stage_two_after: usize,
    pub curve_samples: usize,
    pub amortize: bool,
}

impl Default for GaitSettings {
    fn default() -> Self {
        let g = GaitRewardConfig::default();
        Self {
            step_offset: g.step_offset,
            min_cycle: g.min_cycle,
            lookahead: g.lookahead,
            double_support_limit: g.double_support_limit,
            stage_two_after: g.stage_two_after,
            curve_samples: g.curve_samples,
            amortize: g.amortize,
        }
    }
}

impl GaitSettings {
    pub fn with_rewards(&self, rewards: RewardSet) -> GaitRewardConfig {
        GaitRewardConfig {
            rewards,
            step_offset: self.step_offset,
            min_cycle: self.min_cycle,
            lookahead: self.lookahead,
            double_support_limit: self.double_support_limit,
            stage_two_after: self.stage_two_after,
            curve_samples: self.curve_samples,
            amortize: self.amortize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QErrorSettings {
    pub variants: Vec<Variant>,
    /// Steps between critic estimates.
    pub estimate_interval: u64,
    pub estimate_samples: usize,
    /// Steps between Monte-Carlo true-Q estimates.
    pub true_q_interval: u64,
    pub true_q_samples: usize,
    /// Rollout length; the environment's episode cap when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Added to the task reward during training and rollouts.
    pub reward_offset: f64,
    /// The error summary averages the last `window_steps` of a
    /// `reference_steps` run, shrunk in proportion for shorter runs.
    pub window_steps: u64,
    pub reference_steps: u64,
    /// Walker runs whose mean evaluation displacement stays below this are
    /// flagged as standing.
    pub standing_displacement: f64,
}

impl Default for QErrorSettings {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            estimate_interval: 1000,
            estimate_samples: 10_000,
            true_q_interval: 10_000,
            true_q_samples: 1000,
            horizon: None,
            reward_offset: -0.5,
            window_steps: 50_000,
            reference_steps: 300_000,
            standing_displacement: 0.1,
        }
    }
}

impl QErrorSettings {
    /// Fraction of a `total`-step run covered by the error window.
    pub fn window_fraction(&self, total: u64) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let window = if total >= self.reference_steps {
            self.window_steps as f64
        } else {
            self.window_steps as f64 * total as f64 / self.reference_steps as f64
        };
        (window / total as f64).min(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub env: EnvKind,
    pub variant: Variant,
    /// `default`, `optimal`, `all`, or a list of terms such as
    /// `offset,r_s,r_n`.
    pub reward_set: String,
    pub steps: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    /// One trial per seed.
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Adds an elapsed-seconds column to training logs, which makes them
    /// differ between runs.
    pub record_wall_time: bool,
    pub hp: HpOverrides,
    pub gait: GaitSettings,
    pub qerror: QErrorSettings,
    pub walker: RobotConfig,
    pub pointmass: PointMassConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            env: EnvKind::Walker2d,
            variant: Variant::Atd3Rnn,
            reward_set: "optimal".into(),
            steps: 50_000,
            eval_interval: 5000,
            eval_episodes: 10,
            seeds: vec![1, 2, 3],
            out: PathBuf::from("runs"),
            record_wall_time: false,
            hp: HpOverrides::default(),
            gait: GaitSettings::default(),
            qerror: QErrorSettings::default(),
            walker: RobotConfig::default(),
            pointmass: PointMassConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads `.toml` files as TOML and anything else as JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml(&text),
            _ => Self::from_json(&text),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn hyperparams(&self) -> Hyperparams {
        let mut hp = Hyperparams::for_variant(self.variant);
        self.hp.apply(&mut hp);
        hp
    }

    pub fn rewards(&self) -> Result<RewardSet> {
        parse_reward_set(&self.reward_set)
    }

    pub fn gait_config(&self) -> Result<GaitRewardConfig> {
        Ok(self.gait.with_rewards(self.rewards()?))
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(&self.name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(CliError::Config("name must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return Err(CliError::Config("eval_interval and eval_episodes must be positive".into()));
        }
        self.rewards()?;
        self.hyperparams().validate()?;
        match self.env {
            EnvKind::Walker2d => self.walker.validate()?,
            EnvKind::PointMass1d => {
                atd3_env::PointMass::new(self.pointmass.clone())?;
            }
        }
        Ok(())
    }
}

/// Parses `default`, `optimal`, `all`, or term names joined by `,` or `+`
/// (`r_d` is accepted and ignored since the task reward is always on).
pub fn parse_reward_set(text: &str) -> Result<RewardSet> {
    match text.trim() {
        "default" => return Ok(RewardSet::DEFAULT_ONLY),
        "optimal" => return Ok(RewardSet::OPTIMAL),
        "all" => return Ok(RewardSet::ALL),
        _ => {}
    }
    let mut set = RewardSet::DEFAULT_ONLY;
    for term in text.split([',', '+']).map(str::trim).filter(|t| !t.is_empty()) {
        match term {
            "r_d" => {}
            "offset" => set.offset = true,
            "r_s" => set.double_support = true,
            "r_n" => set.gait_number = true,
            "r_lhs" => set.left_heel_strike = true,
            "r_cg" => set.crossover = true,
            "r_gs" => set.symmetry = true,
            other => return Err(CliError::Config(format!("unknown reward term `{other}`"))),
        }
    }
    Ok(set)
}

/// Command-line values that override the loaded configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub name: Option<String>,
    pub env: Option<EnvKind>,
    pub variant: Option<Variant>,
    pub reward_set: Option<String>,
    pub steps: Option<u64>,
    pub eval_interval: Option<u64>,
    pub eval_episodes: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub record_wall_time: bool,
    pub hp: HpOverrides,
}

impl Overrides {
    /// Defaults, then the config file, then these values.
    pub fn resolve(&self, file: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = match file {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(v) = &self.name {
            cfg.name = v.clone();
        }
        if let Some(v) = self.env {
            cfg.env = v;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(v) = &self.reward_set {
            cfg.reward_set = v.clone();
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.eval_interval {
            cfg.eval_interval = v;
        }
        if let Some(v) = self.eval_episodes {
            cfg.eval_episodes = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if self.record_wall_time {
            cfg.record_wall_time = true;
        }
        cfg.hp.merge(&self.hp);
        cfg.seeds = match (&self.seeds, self.seed, self.trials) {
            (Some(_), Some(_), _) => return Err(CliError::Config("use either --seed or --seeds".into())),
            (Some(list), None, Some(t)) if t != list.len() => {
                return Err(CliError::Config(format!("--trials {t} disagrees with {} seeds", list.len())))
            }
            (Some(list), None, _) => list.clone(),
            (None, Some(s), t) => (0..t.unwrap_or(1) as u64).map(|k| s + k).collect(),
            (None, None, Some(t)) => {
                let first = cfg.seeds.first().copied().unwrap_or(1);
                (0..t as u64).map(|k| first + k).collect()
            }
            (None, None, None) => cfg.seeds.clone(),
        };
        Ok(())
    }
}
