use atd3_env::{Environment, Termination};
use atd3_gait::{finalize_episode_rewards, ContactTrace, DoubleSupportMonitor, GaitReport, GaitRewardConfig};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::buffer::{ReplayBuffer, Transition};
use crate::error::{Atd3Error, Result};
use crate::hyperparams::Hyperparams;
use crate::learner::{random_action, Learner, TrainStats};
use crate::sequence::SequenceWindow;

/// Independent RNG stream `stream` for a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const BUFFER_STREAM: u64 = 1;
const EXPLORE_STREAM: u64 = 2;
const EPISODE_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub hp: Hyperparams,
    pub gait: GaitRewardConfig,
    pub seed: u64,
    /// Keep a simulator snapshot with every transition (needed for
    /// true-Q rollouts).
    pub store_snapshots: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub index: u64,
    pub steps: usize,
    /// Sum of the finalized training rewards.
    pub train_reward: f64,
    /// Sum of the task rewards alone.
    pub default_reward: f64,
    pub displacement: f64,
    pub termination: Termination,
    /// Cut short by the double-support limit.
    pub double_support_cut: bool,
    pub gait_report: Option<GaitReport>,
    pub train: TrainStats,
}

/// Runs episodes, finalizes their rewards, fills the replay buffer and
/// trains the learner after each episode.
pub struct Trainer<E: Environment> {
    env: E,
    learner: Learner,
    buffer: ReplayBuffer<E::Snapshot>,
    gait: GaitRewardConfig,
    store_snapshots: bool,
    explore_rng: ChaCha8Rng,
    episode_rng: ChaCha8Rng,
    global_step: u64,
    episodes: u64,
    gait_invocations: u64,
}

impl<E: Environment> Trainer<E> {
    pub fn new(env: E, cfg: TrainerConfig) -> Result<Self> {
        let learner = Learner::new(cfg.hp.clone(), env.obs_dim(), env.action_dim(), cfg.seed)?;
        Ok(Self::with_learner(env, learner, cfg))
    }

    pub fn with_learner(env: E, learner: Learner, cfg: TrainerConfig) -> Self {
        let mut buffer = ReplayBuffer::new(cfg.hp.buffer_capacity, 0);
        buffer.set_sampler_state(stream_rng(cfg.seed, BUFFER_STREAM));
        Self {
            buffer,
            explore_rng: stream_rng(cfg.seed, EXPLORE_STREAM),
            episode_rng: stream_rng(cfg.seed, EPISODE_STREAM),
            env,
            learner,
            gait: cfg.gait,
            store_snapshots: cfg.store_snapshots,
            global_step: 0,
            episodes: 0,
            gait_invocations: 0,
        }
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn learner_mut(&mut self) -> &mut Learner {
        &mut self.learner
    }

    pub fn buffer(&self) -> &ReplayBuffer<E::Snapshot> {
        &self.buffer
    }

    pub fn buffer_mut(&mut self) -> &mut ReplayBuffer<E::Snapshot> {
        &mut self.buffer
    }

    /// Learner and buffer together, for estimators that sample the buffer.
    pub fn parts_mut(&mut self) -> (&mut Learner, &mut ReplayBuffer<E::Snapshot>) {
        (&mut self.learner, &mut self.buffer)
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    /// Number of episodes whose rewards went through gait finalization.
    pub fn gait_invocations(&self) -> u64 {
        self.gait_invocations
    }

    pub fn gait_config(&self) -> &GaitRewardConfig {
        &self.gait
    }

    fn needs_trace(&self) -> bool {
        let r = &self.gait.rewards;
        r.double_support || r.gait_number || r.left_heel_strike || r.crossover || r.symmetry
    }

    /// One training episode. With `max_steps`, the episode is truncated
    /// (non-terminally) after that many steps.
    pub fn run_episode(&mut self, max_steps: Option<usize>) -> Result<EpisodeSummary> {
        let seed = self.episode_rng.next_u64();
        let first = self.env.reset(seed);
        let mut window = SequenceWindow::new(self.learner.hp.seq_len, &first);
        let needs_trace = self.needs_trace();
        let mut trace = ContactTrace::default();
        let mut monitor = DoubleSupportMonitor::new(self.gait.double_support_limit);
        if needs_trace && self.env.gait_sample().is_none() {
            return Err(Atd3Error::NoGaitSignals);
        }

        let limit = max_steps.unwrap_or(usize::MAX);
        let sigma = self.learner.hp.exploration_noise;
        let mut pending: Vec<Transition<E::Snapshot>> = Vec::new();
        let mut default_rewards = Vec::new();
        let mut termination = Termination::Running;
        let mut double_support_cut = false;

        while pending.len() < limit {
            let state = window.flat();
            let action = if self.global_step < self.learner.hp.start_steps {
                random_action(self.learner.act_dim(), &mut self.explore_rng)
            } else {
                self.learner.select_action(&state, sigma, &mut self.explore_rng)?
            };
            let snapshot = self.store_snapshots.then(|| self.env.snapshot());
            let outcome = self.env.step(&action)?;
            self.global_step += 1;
            window.push(&outcome.observation);
            default_rewards.push(outcome.reward);
            termination = outcome.termination;

            let mut done = termination.is_absorbing();
            if needs_trace {
                let g = self.env.gait_sample().ok_or(Atd3Error::NoGaitSignals)?;
                trace.push(g.right_contact, g.left_contact, g.joint_angles);
                if self.gait.rewards.double_support && monitor.update(g.right_contact, g.left_contact) {
                    double_support_cut = true;
                    done = true;
                }
            }
            pending.push(Transition {
                state,
                action,
                reward: outcome.reward,
                next_state: window.flat(),
                done,
                snapshot,
            });
            if termination.is_done() || double_support_cut {
                break;
            }
        }

        let (rewards, report) = if needs_trace {
            self.gait_invocations += 1;
            let fin = finalize_episode_rewards(&trace, &default_rewards, &self.gait, false)?;
            (fin.rewards, Some(fin.report))
        } else if self.gait.rewards.offset {
            let off = self.gait.step_offset;
            (default_rewards.iter().map(|r| r + off).collect(), None)
        } else {
            (default_rewards.clone(), None)
        };

        let steps = pending.len();
        for (mut t, r) in pending.into_iter().zip(&rewards) {
            t.reward = *r;
            self.buffer.push(t);
        }
        let train = self.learner.train(&mut self.buffer, steps)?;
        self.episodes += 1;
        Ok(EpisodeSummary {
            index: self.episodes - 1,
            steps,
            train_reward: rewards.iter().sum(),
            default_reward: default_rewards.iter().sum(),
            displacement: self.env.forward_displacement(),
            termination,
            double_support_cut,
            gait_report: report,
            train,
        })
    }
}
