use std::io::Write;

use atd3::{Batch, Learner, ReplayBuffer, SequenceWindow};
use atd3_env::Environment;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};
use crate::policy::{run_batched, FrozenPolicy, Rollout};

const CHUNK: usize = 1000;

/// Mean critic estimate over `n` state-action pairs drawn uniformly (with
/// replacement) from the buffer: `(Q1 + Q2) / 2`, or `Q1` alone for `Td3`.
pub fn estimate_q<S, R: Rng + ?Sized>(learner: &Learner, buffer: &ReplayBuffer<S>, n: usize, rng: &mut R) -> Result<f64> {
    if buffer.is_empty() {
        return Err(EvalError::EmptyBuffer);
    }
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..buffer.len())).collect();
    let mut total = 0.0;
    for chunk in idx.chunks(CHUNK) {
        let batch = Batch::gather(buffer, chunk, learner.hp.seq_len, learner.obs_dim())?;
        let q1 = learner.critic1.forward(&batch.states, &batch.actions)?;
        if learner.hp.variant.mean_q_actor() {
            let q2 = learner.critic2.forward(&batch.states, &batch.actions)?;
            total += q1.data().iter().zip(q2.data()).map(|(a, b)| 0.5 * (a + b)).sum::<f64>();
        } else {
            total += q1.data().iter().sum::<f64>();
        }
    }
    Ok(total / n.max(1) as f64)
}

/// Monte-Carlo value of stored state-action pairs under the deterministic
/// policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueQSettings {
    pub samples: usize,
    pub gamma: f64,
    /// Steps per rollout, counting the stored action. Time limits inside
    /// the environment are ignored; only absorbing terminations stop early.
    pub horizon: usize,
    /// Added to every reward, matching the training reward definition.
    pub reward_offset: f64,
}

/// For each sampled transition: restore its snapshot, apply the stored
/// action, then follow the policy; returns the mean discounted return.
pub fn estimate_true_q<E, R>(
    policy: &FrozenPolicy,
    env: &E,
    buffer: &ReplayBuffer<E::Snapshot>,
    settings: &TrueQSettings,
    rng: &mut R,
) -> Result<f64>
where
    E: Environment + Clone,
    R: Rng + ?Sized,
{
    if buffer.is_empty() {
        return Err(EvalError::EmptyBuffer);
    }
    let idx: Vec<usize> = (0..settings.samples).map(|_| rng.random_range(0..buffer.len())).collect();
    let mut total = 0.0;
    for chunk in idx.chunks(CHUNK) {
        let mut rollouts = Vec::with_capacity(chunk.len());
        for &i in chunk {
            let t = buffer.get(i);
            let snap = t.snapshot.as_ref().ok_or(EvalError::MissingSnapshot(i))?;
            let mut e = env.clone();
            e.restore(snap);
            let out = e.step(&t.action)?;
            let mut window = SequenceWindow::from_flat(policy.seq_len, &t.state);
            window.push(&out.observation);
            let mut r = Rollout::new(e, window);
            r.record(out.reward + settings.reward_offset, out.termination, settings.gamma, false);
            rollouts.push(r);
        }
        run_batched(
            policy,
            &mut rollouts,
            settings.horizon.saturating_sub(1),
            settings.gamma,
            settings.reward_offset,
            false,
            |_, _| {},
        )?;
        total += rollouts.iter().map(|r| r.ret).sum::<f64>();
    }
    Ok(total / settings.samples.max(1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QErrorReport {
    pub step: u64,
    pub estimated_q: f64,
    pub true_q: f64,
    /// `(estimated - true) / true`; undefined when the true value is 0.
    pub normalized_error: Option<f64>,
}

impl QErrorReport {
    pub fn new(step: u64, estimated_q: f64, true_q: f64) -> Self {
        Self {
            step,
            estimated_q,
            true_q,
            normalized_error: (true_q != 0.0).then(|| (estimated_q - true_q) / true_q),
        }
    }
}

/// Mean `|normalized error|` over reports at or after `(1 - fraction)` of
/// `total_steps`. `None` when the window holds no defined error.
pub fn window_mean_abs_error(reports: &[QErrorReport], total_steps: u64, fraction: f64) -> Option<f64> {
    let from = (1.0 - fraction) * total_steps as f64;
    let errs: Vec<f64> = reports
        .iter()
        .filter(|r| r.step as f64 >= from)
        .filter_map(|r| r.normalized_error)
        .map(f64::abs)
        .collect();
    (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
}

pub fn write_qerror_csv<W: Write>(out: W, reports: &[QErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "estimated_q", "true_q", "normalized_error"])?;
    for r in reports {
        w.write_record([
            r.step.to_string(),
            r.estimated_q.to_string(),
            r.true_q.to_string(),
            r.normalized_error.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
