//! Shared fixtures for learner checks that are also run by the acceptance
//! suite.

use atd3::{
    critic_loss_grads, Actor, Critic, Encoder, Hyperparams, Learner, ReplayBuffer, Transition, Variant,
};
use atd3_env::{Environment, PointMass, PointMassConfig, PointMassState};
use atd3_nn::{sgd_step, Activation, DenseLayer, Parameters, Tensor2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::td3_reference::{RefActor, RefCritic, RefTd3, RefTransition};

fn dense(e: &Encoder) -> DenseLayer {
    match e {
        Encoder::Dense(l) => l.clone(),
        Encoder::Gru(_) => panic!("reference covers dense encoders only"),
    }
}

/// Random-action transitions on a narrow pointmass track (frequent exits).
pub fn pointmass_transitions(count: usize, seed: u64) -> Vec<Transition<PointMassState>> {
    let cfg = PointMassConfig {
        bound: 2.5,
        episode_cap: 150,
        ..Default::default()
    };
    let mut env = PointMass::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut s = env.reset(rng.random());
    while out.len() < count {
        let a = vec![rng.random_range(-1.0..=1.0)];
        let step = env.step(&a).unwrap();
        out.push(Transition {
            state: s.clone(),
            action: a,
            reward: step.reward,
            next_state: step.observation.clone(),
            done: step.termination.is_absorbing(),
            snapshot: None,
        });
        s = if step.termination.is_done() {
            env.reset(rng.random())
        } else {
            step.observation
        };
    }
    out
}

/// Runs the learner (variant TD3, beta 0, T 1) and the reference TD3 side by
/// side from identical networks and RNG seeds. Returns the number of updates
/// that matched bit for bit before the first divergence.
pub fn td3_lockstep(updates: usize, seed: u64) -> usize {
    let mut hp = Hyperparams::for_variant(Variant::Td3);
    hp.beta = 0.0;
    hp.batch_size = 32;
    hp.encoder_width = 16;
    hp.hidden_width = 16;
    let (obs, act) = (2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actor = Actor::new(false, obs, act, 1, 16, 16, &mut rng);
    let c1 = Critic::new(false, obs, act, 1, 16, 16, &mut rng);
    let c2 = Critic::new(false, obs, act, 1, 16, 16, &mut rng);
    let noise_seed = seed ^ 0x5eed;
    let sample_seed = seed ^ 0xb0ff;

    let ref_actor = RefActor {
        layers: [dense(&actor.encoder), actor.hidden.clone(), actor.output.clone()],
    };
    let ref_critic = |c: &Critic| RefCritic {
        layers: [dense(&c.encoder), c.hidden1.clone(), c.hidden2.clone(), c.output.clone()],
    };
    let mut reference = RefTd3::new(
        ref_actor,
        [ref_critic(&c1), ref_critic(&c2)],
        hp.learning_rate,
        ChaCha8Rng::seed_from_u64(sample_seed),
        ChaCha8Rng::seed_from_u64(noise_seed),
        hp.gamma,
        hp.tau,
        hp.policy_delay,
        hp.batch_size,
        hp.target_noise,
        hp.noise_clip,
    );
    let mut learner =
        Learner::with_networks(hp.clone(), obs, actor, c1, c2, ChaCha8Rng::seed_from_u64(noise_seed)).unwrap();
    let mut buffer = ReplayBuffer::new(hp.buffer_capacity, sample_seed);
    for t in pointmass_transitions(600, seed) {
        reference.buffer.push(RefTransition {
            s: t.state.clone(),
            a: t.action.clone(),
            r: t.reward,
            s2: t.next_state.clone(),
            done: t.done,
        });
        buffer.push(t);
    }

    for k in 0..updates {
        learner.update(&mut buffer).unwrap();
        reference.update();
        if learner_flat(&learner) != reference.flat_params().iter().map(|v| v.to_bits()).collect::<Vec<_>>() {
            return k;
        }
    }
    updates
}

fn learner_flat(l: &Learner) -> Vec<u64> {
    let mut out = Vec::new();
    out.extend(l.actor.flat_params());
    out.extend(l.critic1.flat_params());
    out.extend(l.critic2.flat_params());
    out.extend(l.actor_target.flat_params());
    out.extend(l.critic1_target.flat_params());
    out.extend(l.critic2_target.flat_params());
    out.into_iter().map(f64::to_bits).collect()
}

/// One plain gradient step with rate `alpha` on the output bias of each of
/// two scalar critics, compared with the closed-form update
/// `Q_i + 2 alpha (y - Q_i) + 2 alpha beta (Q_i - Q_j)`. Returns the largest
/// absolute discrepancy over `count` random fixtures.
pub fn closed_form_max_error(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let y = rng.random_range(-10.0..10.0);
        let beta = rng.random_range(0.0..0.5);
        let alpha = rng.random_range(0.001..0.5);
        let q0 = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let (q1, q2) = closed_form_step(q0, y, beta, alpha);
        let e1 = q0[0] + 2.0 * alpha * (y - q0[0]) + 2.0 * alpha * beta * (q0[0] - q0[1]);
        let e2 = q0[1] + 2.0 * alpha * (y - q0[1]) + 2.0 * alpha * beta * (q0[1] - q0[0]);
        worst = worst.max((q1 - e1).abs()).max((q2 - e2).abs());
    }
    worst
}

/// Generic path: output layers with a zero input feature so that `Q = b`,
/// loss gradients from the critic loss, backprop, then SGD on both params.
pub fn closed_form_step(q: [f64; 2], y: f64, beta: f64, alpha: f64) -> (f64, f64) {
    let mut layers: Vec<DenseLayer> = q
        .iter()
        .map(|&b| {
            DenseLayer::from_parts(Tensor2::row_vector(&[0.7]), Tensor2::row_vector(&[b]), Activation::Identity)
                .unwrap()
        })
        .collect();
    let x = Tensor2::row_vector(&[0.0]);
    let (qa, ca) = layers[0].forward_cached(&x).unwrap();
    let (qb, cb) = layers[1].forward_cached(&x).unwrap();
    let target = Tensor2::row_vector(&[y]);
    let lg = critic_loss_grads(&qa, &qb, &target, beta).unwrap();
    let (ga, _) = layers[0].backward(&ca, &lg.d_q1).unwrap();
    let (gb, _) = layers[1].backward(&cb, &lg.d_q2).unwrap();
    sgd_step(layers[0].params_mut(), &ga, alpha).unwrap();
    sgd_step(layers[1].params_mut(), &gb, alpha).unwrap();
    let qa = layers[0].forward(&x).unwrap().data()[0];
    let qb = layers[1].forward(&x).unwrap().data()[0];
    (qa, qb)
}

pub const SPREADING_STEPS: usize = 100;

/// Two randomly initialized one-input critics regress a fixed target with
/// the adversarial critic loss and plain gradient descent. Returns
/// `(q1, q2, y)` after a fixed budget of steps.
///
/// The residual sum shrinks by `1 - 4 lr` per step and the difference by
/// `1 - 4 lr (1 - 2 beta)`. The budget stops while both residuals are still
/// far above f64 rounding of `Q ~ 1`; run much longer and their signs are
/// rounding noise.
pub fn spreading_trial(seed: u64, beta: f64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = 1.0;
    let mut critics = [
        DenseLayer::new(1, 1, Activation::Identity, &mut rng),
        DenseLayer::new(1, 1, Activation::Identity, &mut rng),
    ];
    let x = Tensor2::row_vector(&[1.0]);
    let target = Tensor2::row_vector(&[y]);
    for _ in 0..SPREADING_STEPS {
        let (qa, ca) = critics[0].forward_cached(&x).unwrap();
        let (qb, cb) = critics[1].forward_cached(&x).unwrap();
        let lg = critic_loss_grads(&qa, &qb, &target, beta).unwrap();
        let (ga, _) = critics[0].backward(&ca, &lg.d_q1).unwrap();
        let (gb, _) = critics[1].backward(&cb, &lg.d_q2).unwrap();
        sgd_step(critics[0].params_mut(), &ga, 0.05).unwrap();
        sgd_step(critics[1].params_mut(), &gb, 0.05).unwrap();
    }
    let q1 = critics[0].forward(&x).unwrap().data()[0];
    let q2 = critics[1].forward(&x).unwrap().data()[0];
    (q1, q2, y)
}

/// Fraction of seeds ending with residuals on opposite sides of the target,
/// and the largest `|mean(Q1, Q2) - y|`.
pub fn spreading_summary(seeds: u64, beta: f64) -> (f64, f64) {
    let mut opposite = 0;
    let mut worst_mean: f64 = 0.0;
    for seed in 0..seeds {
        let (q1, q2, y) = spreading_trial(seed, beta);
        if (q1 - y) * (q2 - y) < 0.0 {
            opposite += 1;
        }
        worst_mean = worst_mean.max((0.5 * (q1 + q2) - y).abs());
    }
    (opposite as f64 / seeds as f64, worst_mean)
}
