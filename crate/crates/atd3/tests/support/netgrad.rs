//! Finite-difference checks of the full actor and critic networks, with
//! dense or GRU encoders.

use atd3::{Actor, Critic, Encoder, SeqBatch};
use atd3_nn::{Parameters, Tensor2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gradcheck::{compare, numeric_grads, random_tensor, relu_safe, weighted_sum, CheckResult};

struct Dims {
    n: usize,
    obs: usize,
    act: usize,
    seq: usize,
    width: usize,
    hidden: usize,
}

fn draw_dims(rng: &mut ChaCha8Rng, recurrent: bool) -> Dims {
    Dims {
        n: rng.random_range(1..4),
        obs: rng.random_range(1..4),
        act: rng.random_range(1..3),
        seq: if recurrent { rng.random_range(1..4) } else { 1 },
        width: rng.random_range(2..5),
        hidden: rng.random_range(2..5),
    }
}

fn input(rng: &mut ChaCha8Rng, d: &Dims) -> SeqBatch {
    SeqBatch::new(d.seq, d.obs, random_tensor(rng, d.n, d.seq * d.obs, 2.0)).unwrap()
}

fn encoder_safe(e: &Encoder, x: &SeqBatch) -> bool {
    match e {
        Encoder::Dense(l) => relu_safe(l, x.flat()),
        Encoder::Gru(_) => true,
    }
}

pub fn actor_fixtures(recurrent: bool, count: usize, seed0: u64) -> CheckResult {
    let mut result = CheckResult::default();
    let mut seed = seed0;
    while result.fixtures < count {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = draw_dims(&mut rng, recurrent);
        let actor = Actor::new(recurrent, d.obs, d.act, d.seq, d.width, d.hidden, &mut rng);
        let x = input(&mut rng, &d);
        let w = random_tensor(&mut rng, d.n, d.act, 1.0);
        let e = actor.encoder.forward(&x).unwrap();
        if !encoder_safe(&actor.encoder, &x) || !relu_safe(&actor.hidden, &e) {
            continue;
        }
        let (_, cache) = actor.forward_cached(&x).unwrap();
        let analytic = actor.backward(&cache, &w).unwrap();
        let numeric = numeric_grads(&actor, |m| m.params_mut(), |m| weighted_sum(&m.forward(&x).unwrap(), &w));
        let kind = if recurrent { "gru" } else { "dense" };
        compare(&mut result, &format!("actor {kind} seed {seed}"), &analytic, &numeric);
    }
    result
}

/// Parameter gradients and the gradient with respect to the action input.
pub fn critic_fixtures(recurrent: bool, count: usize, seed0: u64) -> CheckResult {
    #[derive(Clone)]
    struct Model(Critic, Tensor2);
    let mut result = CheckResult::default();
    let mut seed = seed0;
    while result.fixtures < count {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = draw_dims(&mut rng, recurrent);
        let critic = Critic::new(recurrent, d.obs, d.act, d.seq, d.width, d.hidden, &mut rng);
        let x = input(&mut rng, &d);
        let a = random_tensor(&mut rng, d.n, d.act, 1.0);
        let w = random_tensor(&mut rng, d.n, 1, 1.0);
        let e = critic.encoder.forward(&x).unwrap().hcat(&a).unwrap();
        let h1 = critic.hidden1.forward(&e).unwrap();
        if !encoder_safe(&critic.encoder, &x) || !relu_safe(&critic.hidden1, &e) || !relu_safe(&critic.hidden2, &h1) {
            continue;
        }
        let (_, cache) = critic.forward_cached(&x, &a).unwrap();
        let (grads, da) = critic.backward(&cache, &w, true).unwrap();
        let (none, da_only) = critic.backward(&cache, &w, false).unwrap();
        let mut analytic = grads.unwrap();
        analytic.push(da);
        let model = Model(critic, a);
        let numeric = numeric_grads(
            &model,
            |m| {
                let mut v = m.0.params_mut();
                v.push(&mut m.1);
                v
            },
            |m| weighted_sum(&m.0.forward(&x, &m.1).unwrap(), &w),
        );
        let kind = if recurrent { "gru" } else { "dense" };
        let label = format!("critic {kind} seed {seed}");
        if none.is_some() || da_only != *analytic.last().unwrap() {
            result.failures.push(format!("{label}: input-only backward disagrees"));
        }
        compare(&mut result, &label, &analytic, &numeric);
    }
    result
}
