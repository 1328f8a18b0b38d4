use atd3::{Actor, Learner, SeqBatch, SequenceWindow};
use atd3_env::{Environment, Termination};
use atd3_gait::ContactTrace;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// First evaluation-episode reset seed; episode `k` uses `EVAL_SEED_BASE + k`.
pub const EVAL_SEED_BASE: u64 = 1_000_000;

/// A deterministic actor with the sequence length it expects.
#[derive(Clone, Debug)]
pub struct FrozenPolicy {
    pub actor: Actor,
    pub seq_len: usize,
    pub obs_dim: usize,
}

impl FrozenPolicy {
    pub fn from_learner(l: &Learner) -> Self {
        Self {
            actor: l.actor.clone(),
            seq_len: l.hp.seq_len,
            obs_dim: l.obs_dim(),
        }
    }

    /// Actions for a batch of flattened sequences.
    pub fn act_batch(&self, seqs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let batch = SeqBatch::from_rows(self.seq_len, self.obs_dim, seqs)?;
        let out = self.actor.forward(&batch)?;
        Ok((0..out.rows()).map(|r| out.row(r).to_vec()).collect())
    }
}

/// One environment driven by the policy, tracking its discounted return.
pub struct Rollout<E: Environment> {
    pub env: E,
    pub window: SequenceWindow,
    pub ret: f64,
    pub discount: f64,
    pub steps: usize,
    pub active: bool,
    pub termination: Termination,
}

impl<E: Environment> Rollout<E> {
    pub fn new(env: E, window: SequenceWindow) -> Self {
        Self {
            env,
            window,
            ret: 0.0,
            discount: 1.0,
            steps: 0,
            active: true,
            termination: Termination::Running,
        }
    }

    /// Accumulates one step's reward and updates the termination state.
    pub fn record(&mut self, reward: f64, termination: Termination, gamma: f64, stop_on_time_limit: bool) {
        self.ret += self.discount * reward;
        self.discount *= gamma;
        self.steps += 1;
        self.termination = termination;
        if termination.is_absorbing() || (stop_on_time_limit && termination.is_done()) {
            self.active = false;
        }
    }
}

/// Steps every active rollout with one batched policy call per time step,
/// for at most `max_steps` steps. `reward_offset` is added to each reward.
pub fn run_batched<E: Environment>(
    policy: &FrozenPolicy,
    rollouts: &mut [Rollout<E>],
    max_steps: usize,
    gamma: f64,
    reward_offset: f64,
    stop_on_time_limit: bool,
    mut on_step: impl FnMut(usize, &E),
) -> Result<()> {
    for _ in 0..max_steps {
        let live: Vec<usize> = (0..rollouts.len()).filter(|&i| rollouts[i].active).collect();
        if live.is_empty() {
            break;
        }
        let seqs: Vec<Vec<f64>> = live.iter().map(|&i| rollouts[i].window.flat()).collect();
        let actions = policy.act_batch(&seqs)?;
        for (&i, a) in live.iter().zip(&actions) {
            let r = &mut rollouts[i];
            let out = r.env.step(a)?;
            r.window.push(&out.observation);
            r.record(out.reward + reward_offset, out.termination, gamma, stop_on_time_limit);
            on_step(i, &r.env);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean undiscounted task-reward return.
    pub mean_reward: f64,
    pub episode_rewards: Vec<f64>,
    pub episode_steps: Vec<usize>,
    pub episode_displacements: Vec<f64>,
    pub mean_displacement: f64,
}

/// Runs `episodes` noise-free episodes from fixed reset seeds and reports the
/// mean sum of task rewards. Episodes end at a fall or the time limit.
pub fn evaluate_policy<E: Environment + Clone>(policy: &FrozenPolicy, env: &E, episodes: usize) -> Result<EvalReport> {
    Ok(evaluate_with_traces(policy, env, episodes, false)?.0)
}

/// As [`evaluate_policy`], optionally also recording contact traces.
pub fn evaluate_with_traces<E: Environment + Clone>(
    policy: &FrozenPolicy,
    env: &E,
    episodes: usize,
    record: bool,
) -> Result<(EvalReport, Vec<ContactTrace>)> {
    let mut rollouts: Vec<Rollout<E>> = (0..episodes)
        .map(|k| {
            let mut e = env.clone();
            let first = e.reset(EVAL_SEED_BASE + k as u64);
            Rollout::new(e, SequenceWindow::new(policy.seq_len, &first))
        })
        .collect();
    let mut traces = vec![ContactTrace::default(); if record { episodes } else { 0 }];
    let cap = env.episode_cap();
    run_batched(policy, &mut rollouts, cap, 1.0, 0.0, true, |i, e| {
        if record {
            if let Some(g) = e.gait_sample() {
                traces[i].push(g.right_contact, g.left_contact, g.joint_angles);
            }
        }
    })?;
    let episode_rewards: Vec<f64> = rollouts.iter().map(|r| r.ret).collect();
    let episode_displacements: Vec<f64> = rollouts.iter().map(|r| r.env.forward_displacement()).collect();
    let n = episodes.max(1) as f64;
    Ok((
        EvalReport {
            mean_reward: episode_rewards.iter().sum::<f64>() / n,
            mean_displacement: episode_displacements.iter().sum::<f64>() / n,
            episode_steps: rollouts.iter().map(|r| r.steps).collect(),
            episode_rewards,
            episode_displacements,
        },
        traces,
    ))
}
