use atd3_nn::{Adam, AdamConfig, Checkpoint, CheckpointMeta, Parameters, Tensor2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::buffer::ReplayBuffer;
use crate::error::{Atd3Error, Result};
use crate::hyperparams::Hyperparams;
use crate::networks::{Actor, Critic, SeqBatch};

/// TD target `r + gamma (1 - done) min(q1', q2')`.
pub fn compute_target(reward: f64, done: bool, q1_next: f64, q2_next: f64, gamma: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * q1_next.min(q2_next)
    }
}

/// Losses and output gradients of both critics for one batch.
///
/// Critic `i` minimizes `mean((Q_i - y)^2) - beta * mean((Q_1 - Q_2)^2)`,
/// treating `y` and the other critic as constants.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticLossGrads {
    pub td_loss1: f64,
    pub td_loss2: f64,
    /// `-mean((Q_1 - Q_2)^2)`.
    pub adversarial: f64,
    pub loss1: f64,
    pub loss2: f64,
    pub d_q1: Tensor2,
    pub d_q2: Tensor2,
}

pub fn critic_loss_grads(q1: &Tensor2, q2: &Tensor2, y: &Tensor2, beta: f64) -> Result<CriticLossGrads> {
    let n = q1.rows();
    if n == 0 {
        return Err(Atd3Error::EmptyBatch);
    }
    if q1.shape() != (n, 1) || q2.shape() != (n, 1) || y.shape() != (n, 1) {
        return Err(Atd3Error::SequenceShape {
            expected: n,
            got: q2.rows().min(y.rows()),
        });
    }
    let nf = n as f64;
    let (mut td1, mut td2, mut gap) = (0.0, 0.0, 0.0);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for ((&a, &b), &t) in q1.data().iter().zip(q2.data()).zip(y.data()) {
        td1 += (a - t) * (a - t);
        td2 += (b - t) * (b - t);
        gap += (a - b) * (a - b);
        d1.push(2.0 * (a - t) / nf - 2.0 * beta * (a - b) / nf);
        d2.push(2.0 * (b - t) / nf - 2.0 * beta * (b - a) / nf);
    }
    let adversarial = -gap / nf;
    Ok(CriticLossGrads {
        td_loss1: td1 / nf,
        td_loss2: td2 / nf,
        adversarial,
        loss1: td1 / nf + beta * adversarial,
        loss2: td2 / nf + beta * adversarial,
        d_q1: Tensor2::from_vec(n, 1, d1)?,
        d_q2: Tensor2::from_vec(n, 1, d2)?,
    })
}

/// Adds `clip(N(0, std), -clip, clip)` noise to each entry, then clips to
/// `[-1, 1]`. Draws one normal per entry in row-major order; `std = 0`
/// draws nothing.
pub fn smooth_target_action<R: Rng + ?Sized>(actions: &Tensor2, std: f64, clip: f64, rng: &mut R) -> Tensor2 {
    if std == 0.0 {
        return actions.clone();
    }
    let mut out = actions.clone();
    for a in out.data_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *a = (*a + (std * z).clamp(-clip, clip)).clamp(-1.0, 1.0);
    }
    out
}

/// Policy output plus `N(0, sigma)` noise, clipped to `[-1, 1]`.
pub fn add_exploration_noise<R: Rng + ?Sized>(action: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for a in action {
        let z: f64 = rng.sample(StandardNormal);
        *a = (*a + sigma * z).clamp(-1.0, 1.0);
    }
}

/// Uniform action in `[-1, 1]^dim`.
pub fn random_action<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// `target = tau * live + (1 - tau) * target` for every parameter.
pub fn soft_update<P: Parameters>(live: &P, target: &mut P, tau: f64) -> Result<()> {
    for (t, l) in target.params_mut().into_iter().zip(live.params()) {
        t.blend_toward(l, tau)?;
    }
    Ok(())
}

/// A sampled mini-batch.
#[derive(Clone, Debug)]
pub struct Batch {
    pub states: SeqBatch,
    pub actions: Tensor2,
    pub rewards: Vec<f64>,
    pub next_states: SeqBatch,
    pub dones: Vec<bool>,
}

impl Batch {
    pub fn gather<S>(buffer: &ReplayBuffer<S>, indices: &[usize], seq_len: usize, obs_dim: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Atd3Error::EmptyBatch);
        }
        let items: Vec<_> = indices.iter().map(|&i| buffer.get(i)).collect();
        let act_dim = items[0].action.len();
        let states: Vec<&[f64]> = items.iter().map(|t| t.state.as_slice()).collect();
        let next: Vec<&[f64]> = items.iter().map(|t| t.next_state.as_slice()).collect();
        let actions: Vec<f64> = items.iter().flat_map(|t| t.action.iter().copied()).collect();
        Ok(Self {
            states: SeqBatch::from_rows(seq_len, obs_dim, &states)?,
            actions: Tensor2::from_vec(items.len(), act_dim, actions)?,
            rewards: items.iter().map(|t| t.reward).collect(),
            next_states: SeqBatch::from_rows(seq_len, obs_dim, &next)?,
            dones: items.iter().map(|t| t.done).collect(),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticStats {
    pub loss1: f64,
    pub loss2: f64,
    pub mean_q: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub critic_updates: u64,
    pub actor_updates: u64,
    pub mean_critic_loss: f64,
    pub mean_actor_loss: f64,
}

/// Actor, twin critics, their targets and optimizers.
#[derive(Clone, Debug)]
pub struct Learner {
    pub hp: Hyperparams,
    obs_dim: usize,
    act_dim: usize,
    pub actor: Actor,
    pub actor_target: Actor,
    pub critic1: Critic,
    pub critic2: Critic,
    pub critic1_target: Critic,
    pub critic2_target: Critic,
    actor_opt: Adam,
    critic1_opt: Adam,
    critic2_opt: Adam,
    noise_rng: ChaCha8Rng,
    update_count: u64,
}

fn adam_for<P: Parameters>(model: &P, lr: f64) -> Adam {
    Adam::new(
        AdamConfig {
            lr,
            ..AdamConfig::default()
        },
        &model.params(),
    )
}

impl Learner {
    /// Networks initialized from `seed`; the smoothing-noise stream is
    /// derived from the same seed.
    pub fn new(hp: Hyperparams, obs_dim: usize, act_dim: usize, seed: u64) -> Result<Self> {
        hp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = hp.variant.uses_gru();
        let (t, ew, hw) = (hp.seq_len, hp.encoder_width, hp.hidden_width);
        let actor = Actor::new(rec, obs_dim, act_dim, t, ew, hw, &mut rng);
        let critic1 = Critic::new(rec, obs_dim, act_dim, t, ew, hw, &mut rng);
        let critic2 = Critic::new(rec, obs_dim, act_dim, t, ew, hw, &mut rng);
        let noise_rng = ChaCha8Rng::from_rng(&mut rng);
        Self::with_networks(hp, obs_dim, actor, critic1, critic2, noise_rng)
    }

    /// Builds a learner around given live networks; targets start as copies.
    pub fn with_networks(
        hp: Hyperparams,
        obs_dim: usize,
        actor: Actor,
        critic1: Critic,
        critic2: Critic,
        noise_rng: ChaCha8Rng,
    ) -> Result<Self> {
        hp.validate()?;
        let lr = hp.learning_rate;
        Ok(Self {
            obs_dim,
            act_dim: actor.act_dim(),
            actor_opt: adam_for(&actor, lr),
            critic1_opt: adam_for(&critic1, lr),
            critic2_opt: adam_for(&critic2, lr),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            noise_rng,
            update_count: 0,
            hp,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn seq_batch(&self, rows: &[&[f64]]) -> Result<SeqBatch> {
        SeqBatch::from_rows(self.hp.seq_len, self.obs_dim, rows)
    }

    /// Deterministic policy output for one flattened sequence.
    pub fn act(&self, seq: &[f64]) -> Result<Vec<f64>> {
        Ok(self.actor.forward(&self.seq_batch(&[seq])?)?.into_vec())
    }

    /// Policy action with exploration noise of std `sigma`.
    pub fn select_action<R: Rng + ?Sized>(&self, seq: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
        let mut a = self.act(seq)?;
        add_exploration_noise(&mut a, sigma, rng);
        Ok(a)
    }

    /// TD targets for a batch, using the smoothed target-policy action.
    pub fn targets(&mut self, batch: &Batch) -> Result<Tensor2> {
        let next = self.actor_target.forward(&batch.next_states)?;
        let next = smooth_target_action(&next, self.hp.target_noise, self.hp.noise_clip, &mut self.noise_rng);
        let q1 = self.critic1_target.forward(&batch.next_states, &next)?;
        let q2 = self.critic2_target.forward(&batch.next_states, &next)?;
        let y: Vec<f64> = (0..batch.rewards.len())
            .map(|i| compute_target(batch.rewards[i], batch.dones[i], q1.data()[i], q2.data()[i], self.hp.gamma))
            .collect();
        Ok(Tensor2::from_vec(y.len(), 1, y)?)
    }

    /// One Adam step on each critic against a shared, fixed target.
    pub fn critic_update(&mut self, batch: &Batch) -> Result<CriticStats> {
        let y = self.targets(batch)?;
        let (q1, cache1) = self.critic1.forward_cached(&batch.states, &batch.actions)?;
        let (q2, cache2) = self.critic2.forward_cached(&batch.states, &batch.actions)?;
        let lg = critic_loss_grads(&q1, &q2, &y, self.hp.effective_beta())?;
        let g1 = self.critic1.backward(&cache1, &lg.d_q1, true)?.0.expect("requested");
        let g2 = self.critic2.backward(&cache2, &lg.d_q2, true)?.0.expect("requested");
        self.critic1_opt.step(self.critic1.params_mut(), &g1)?;
        self.critic2_opt.step(self.critic2.params_mut(), &g2)?;
        let n = q1.rows() as f64;
        let mean_q = q1.data().iter().zip(q2.data()).map(|(a, b)| 0.5 * (a + b)).sum::<f64>() / n;
        Ok(CriticStats {
            loss1: lg.loss1,
            loss2: lg.loss2,
            mean_q,
        })
    }

    /// Actor loss `-mean(Q)` and its parameter gradients. `Q` is the mean
    /// of both critics, or the first critic alone for `Td3`.
    pub fn actor_gradients(&self, states: &SeqBatch) -> Result<(f64, Vec<Tensor2>)> {
        let n = states.len();
        if n == 0 {
            return Err(Atd3Error::EmptyBatch);
        }
        let nf = n as f64;
        let (a, actor_cache) = self.actor.forward_cached(states)?;
        let (q1, c1) = self.critic1.forward_cached(states, &a)?;
        let (loss, d_action) = if self.hp.variant.mean_q_actor() {
            let (q2, c2) = self.critic2.forward_cached(states, &a)?;
            let dq = Tensor2::filled(n, 1, -0.5 / nf);
            let (_, mut da) = self.critic1.backward(&c1, &dq, false)?;
            let (_, da2) = self.critic2.backward(&c2, &dq, false)?;
            da.add_assign(&da2)?;
            let mean = q1.data().iter().zip(q2.data()).map(|(x, y)| 0.5 * (x + y)).sum::<f64>() / nf;
            (-mean, da)
        } else {
            let dq = Tensor2::filled(n, 1, -1.0 / nf);
            let (_, da) = self.critic1.backward(&c1, &dq, false)?;
            (-q1.data().iter().sum::<f64>() / nf, da)
        };
        Ok((loss, self.actor.backward(&actor_cache, &d_action)?))
    }

    /// One Adam step on the actor; critics are only read.
    pub fn actor_update(&mut self, batch: &Batch) -> Result<f64> {
        let (loss, grads) = self.actor_gradients(&batch.states)?;
        self.actor_opt.step(self.actor.params_mut(), &grads)?;
        Ok(loss)
    }

    pub fn soft_update_targets(&mut self) -> Result<()> {
        let tau = self.hp.tau;
        soft_update(&self.actor, &mut self.actor_target, tau)?;
        soft_update(&self.critic1, &mut self.critic1_target, tau)?;
        soft_update(&self.critic2, &mut self.critic2_target, tau)?;
        Ok(())
    }

    /// One iteration of the training loop: a critic step, and every
    /// `policy_delay`-th iteration an actor step plus target updates.
    pub fn update<S>(&mut self, buffer: &mut ReplayBuffer<S>) -> Result<(CriticStats, Option<f64>)> {
        let idx = buffer.sample_indices(self.hp.batch_size);
        let batch = Batch::gather(buffer, &idx, self.hp.seq_len, self.obs_dim)?;
        let stats = self.critic_update(&batch)?;
        self.update_count += 1;
        let actor_loss = if self.update_count % self.hp.policy_delay == 0 {
            let loss = self.actor_update(&batch)?;
            self.soft_update_targets()?;
            Some(loss)
        } else {
            None
        };
        Ok((stats, actor_loss))
    }

    /// `iterations` updates, as run after each episode. Skipped with a
    /// warning while the buffer holds fewer than one batch.
    pub fn train<S>(&mut self, buffer: &mut ReplayBuffer<S>, iterations: usize) -> Result<TrainStats> {
        let mut stats = TrainStats::default();
        if iterations == 0 {
            return Ok(stats);
        }
        if buffer.len() < self.hp.batch_size {
            log::warn!(
                "replay buffer has {} transitions, fewer than batch size {}; skipping training",
                buffer.len(),
                self.hp.batch_size
            );
            return Ok(stats);
        }
        let (mut critic_sum, mut actor_sum) = (0.0, 0.0);
        for _ in 0..iterations {
            let (c, a) = self.update(buffer)?;
            stats.critic_updates += 1;
            critic_sum += 0.5 * (c.loss1 + c.loss2);
            if let Some(a) = a {
                stats.actor_updates += 1;
                actor_sum += a;
            }
        }
        stats.mean_critic_loss = critic_sum / stats.critic_updates as f64;
        if stats.actor_updates > 0 {
            stats.mean_actor_loss = actor_sum / stats.actor_updates as f64;
        }
        Ok(stats)
    }

    /// Network layout stored in checkpoints.
    pub fn architecture(&self) -> serde_json::Value {
        json!({
            "variant": self.hp.variant,
            "obs_dim": self.obs_dim,
            "act_dim": self.act_dim,
            "seq_len": self.hp.seq_len,
            "encoder_width": self.hp.encoder_width,
            "hidden_width": self.hp.hidden_width,
        })
    }

    /// Full training state: all networks, optimizer moments, counters and
    /// the smoothing-noise RNG.
    pub fn to_checkpoint(&self, seed: u64, step: u64, extra: serde_json::Value) -> Result<Checkpoint> {
        let mut ck = Checkpoint::new(CheckpointMeta {
            architecture: self.architecture(),
            hyperparams: serde_json::to_value(&self.hp).expect("hyperparams serialize"),
            seed,
            step,
            extra: json!({
                "update_count": self.update_count,
                "adam_steps": [self.actor_opt.t, self.critic1_opt.t, self.critic2_opt.t],
                "noise_rng": self.noise_rng,
                "user": extra,
            }),
        });
        ck.insert_params("actor", &self.actor)?;
        ck.insert_params("actor_target", &self.actor_target)?;
        ck.insert_params("critic1", &self.critic1)?;
        ck.insert_params("critic2", &self.critic2)?;
        ck.insert_params("critic1_target", &self.critic1_target)?;
        ck.insert_params("critic2_target", &self.critic2_target)?;
        for (name, opt) in [
            ("actor", &self.actor_opt),
            ("critic1", &self.critic1_opt),
            ("critic2", &self.critic2_opt),
        ] {
            for (i, (m, v)) in opt.m.iter().zip(&opt.v).enumerate() {
                ck.insert(format!("adam.{name}.m.{i}"), m)?;
                ck.insert(format!("adam.{name}.v.{i}"), v)?;
            }
        }
        Ok(ck)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let hp: Hyperparams = serde_json::from_value(ck.metadata.hyperparams.clone())
            .map_err(|e| Atd3Error::Checkpoint(format!("hyperparams: {e}")))?;
        let (obs_dim, act_dim) = dims_from(&ck.metadata.architecture)?;
        let mut l = Self::new(hp, obs_dim, act_dim, 0)?;
        ck.load_params("actor", &mut l.actor)?;
        ck.load_params("actor_target", &mut l.actor_target)?;
        ck.load_params("critic1", &mut l.critic1)?;
        ck.load_params("critic2", &mut l.critic2)?;
        ck.load_params("critic1_target", &mut l.critic1_target)?;
        ck.load_params("critic2_target", &mut l.critic2_target)?;
        let extra = &ck.metadata.extra;
        let steps: [u64; 3] = serde_json::from_value(extra["adam_steps"].clone())
            .map_err(|e| Atd3Error::Checkpoint(format!("adam_steps: {e}")))?;
        for ((name, opt), t) in [
            ("actor", &mut l.actor_opt),
            ("critic1", &mut l.critic1_opt),
            ("critic2", &mut l.critic2_opt),
        ]
        .into_iter()
        .zip(steps)
        {
            opt.t = t;
            for i in 0..opt.m.len() {
                opt.m[i] = load_same_shape(ck, &format!("adam.{name}.m.{i}"), &opt.m[i])?;
                opt.v[i] = load_same_shape(ck, &format!("adam.{name}.v.{i}"), &opt.v[i])?;
            }
        }
        l.update_count = extra["update_count"]
            .as_u64()
            .ok_or_else(|| Atd3Error::Checkpoint("missing update_count".into()))?;
        l.noise_rng = serde_json::from_value(extra["noise_rng"].clone())
            .map_err(|e| Atd3Error::Checkpoint(format!("noise_rng: {e}")))?;
        Ok(l)
    }
}

fn dims_from(arch: &serde_json::Value) -> Result<(usize, usize)> {
    let get = |k: &str| {
        arch[k]
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Atd3Error::Checkpoint(format!("architecture lacks `{k}`")))
    };
    Ok((get("obs_dim")?, get("act_dim")?))
}

fn load_same_shape(ck: &Checkpoint, name: &str, like: &Tensor2) -> Result<Tensor2> {
    let t = ck.tensor(name)?;
    if t.shape() != like.shape() {
        return Err(Atd3Error::Checkpoint(format!(
            "`{name}` has shape {:?}, expected {:?}",
            t.shape(),
            like.shape()
        )));
    }
    Ok(t)
}

/// Loads only the live actor from a learner checkpoint, checking that the
/// stored layout matches `expect_obs_dim`.
pub fn load_actor(ck: &Checkpoint, expect_obs_dim: usize) -> Result<(Actor, Hyperparams)> {
    let hp: Hyperparams = serde_json::from_value(ck.metadata.hyperparams.clone())
        .map_err(|e| Atd3Error::Checkpoint(format!("hyperparams: {e}")))?;
    let (obs_dim, act_dim) = dims_from(&ck.metadata.architecture)?;
    if obs_dim != expect_obs_dim {
        return Err(Atd3Error::Checkpoint(format!(
            "checkpoint observation size {obs_dim} does not match environment ({expect_obs_dim})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut actor = Actor::new(
        hp.variant.uses_gru(),
        obs_dim,
        act_dim,
        hp.seq_len,
        hp.encoder_width,
        hp.hidden_width,
        &mut rng,
    );
    ck.load_params("actor", &mut actor)?;
    Ok((actor, hp))
}
