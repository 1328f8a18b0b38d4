//! Analytic gradients against central finite differences, as reusable
//! fixture families. Each family reports its worst relative error and any
//! entry above tolerance instead of panicking.

use atd3_nn::{Activation, DenseLayer, GruCell, Parameters, Tensor2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
/// ReLU pre-activations closer than this to 0 make a fixture
/// non-differentiable at finite-difference scale; such fixtures are redrawn.
pub const RELU_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, Default)]
pub struct CheckResult {
    pub fixtures: usize,
    pub entries: usize,
    pub worst: f64,
    pub failures: Vec<String>,
}

impl CheckResult {
    pub fn merge(&mut self, other: CheckResult) {
        self.fixtures += other.fixtures;
        self.entries += other.entries;
        self.worst = self.worst.max(other.worst);
        self.failures.extend(other.failures);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// |a - n| / max(|a|, |n|, 1e-6); the floor turns near-zero entries into an
/// absolute check at 1e-10.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Tensor2 {
    Tensor2::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

pub fn weighted_sum(out: &Tensor2, w: &Tensor2) -> f64 {
    out.data().iter().zip(w.data()).map(|(a, b)| a * b).sum()
}

/// Central difference of `loss` with respect to every entry of every tensor
/// returned by `select`.
pub fn numeric_grads<M: Clone>(
    model: &M,
    select: impl Fn(&mut M) -> Vec<&mut Tensor2>,
    loss: impl Fn(&M) -> f64,
) -> Vec<Vec<f64>> {
    let mut probe = model.clone();
    let count = select(&mut probe).len();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let len = select(&mut probe)[k].data().len();
        let mut g = Vec::with_capacity(len);
        for i in 0..len {
            let orig = select(&mut probe)[k].data()[i];
            select(&mut probe)[k].data_mut()[i] = orig + STEP;
            let plus = loss(&probe);
            select(&mut probe)[k].data_mut()[i] = orig - STEP;
            let minus = loss(&probe);
            select(&mut probe)[k].data_mut()[i] = orig;
            g.push((plus - minus) / (2.0 * STEP));
        }
        out.push(g);
    }
    out
}

/// Compares one fixture and records it in `result`.
pub fn compare(result: &mut CheckResult, label: &str, analytic: &[Tensor2], numeric: &[Vec<f64>]) {
    result.fixtures += 1;
    if analytic.len() != numeric.len() {
        result.failures.push(format!("{label}: {} analytic tensors, {} numeric", analytic.len(), numeric.len()));
        return;
    }
    for (a, n) in analytic.iter().zip(numeric) {
        if a.data().len() != n.len() {
            result.failures.push(format!("{label}: gradient size {} vs {}", a.data().len(), n.len()));
            continue;
        }
        for (x, y) in a.data().iter().zip(n) {
            let e = rel_err(*x, *y);
            result.entries += 1;
            result.worst = result.worst.max(e);
            if !(e < REL_TOL) {
                result.failures.push(format!("{label}: analytic {x} vs numeric {y} (rel {e})"));
            }
        }
    }
}

pub fn identity(l: &DenseLayer) -> DenseLayer {
    DenseLayer {
        activation: Activation::Identity,
        ..l.clone()
    }
}

/// Whether `layer` on `input` keeps every ReLU pre-activation away from 0.
pub fn relu_safe(layer: &DenseLayer, input: &Tensor2) -> bool {
    layer.activation != Activation::Relu
        || identity(layer).forward(input).unwrap().data().iter().all(|v| v.abs() > RELU_MARGIN)
}

#[derive(Clone)]
struct Wrap<T>(T, Tensor2);

pub fn dense_fixtures(act: Activation, count: usize, seed0: u64) -> CheckResult {
    let mut result = CheckResult::default();
    let mut seed = seed0;
    while result.fixtures < count {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, i, o) = (rng.random_range(1..5), rng.random_range(1..6), rng.random_range(1..6));
        let layer = DenseLayer::new(i, o, act, &mut rng);
        let x = random_tensor(&mut rng, n, i, 2.0);
        let w = random_tensor(&mut rng, n, o, 1.0);
        if !relu_safe(&layer, &x) {
            continue;
        }
        let (_, cache) = layer.forward_cached(&x).unwrap();
        let (grads, dx) = layer.backward(&cache, &w).unwrap();
        let model = Wrap(layer, x);
        let numeric = numeric_grads(
            &model,
            |m| {
                let mut v = m.0.params_mut();
                v.push(&mut m.1);
                v
            },
            |m| weighted_sum(&m.0.forward(&m.1).unwrap(), &w),
        );
        let mut analytic = grads;
        analytic.push(dx);
        compare(&mut result, &format!("dense {act:?} seed {seed}"), &analytic, &numeric);
    }
    result
}

pub fn mlp_fixtures(count: usize, seed0: u64) -> CheckResult {
    #[derive(Clone)]
    struct Net(DenseLayer, DenseLayer, Tensor2);
    let mut result = CheckResult::default();
    let mut seed = seed0;
    while result.fixtures < count {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..4);
        let l1 = DenseLayer::new(4, 6, Activation::Relu, &mut rng);
        let l2 = DenseLayer::new(6, 3, Activation::Relu, &mut rng);
        let x = random_tensor(&mut rng, n, 4, 2.0);
        let w = random_tensor(&mut rng, n, 3, 1.0);
        if !relu_safe(&l1, &x) || !relu_safe(&l2, &l1.forward(&x).unwrap()) {
            continue;
        }
        let (h, c1) = l1.forward_cached(&x).unwrap();
        let (_, c2) = l2.forward_cached(&h).unwrap();
        let (g2, dh) = l2.backward(&c2, &w).unwrap();
        let (g1, dx) = l1.backward(&c1, &dh).unwrap();
        let mut analytic = g1;
        analytic.extend(g2);
        analytic.push(dx);
        let net = Net(l1, l2, x);
        let numeric = numeric_grads(
            &net,
            |m| {
                let mut v = m.0.params_mut();
                v.extend(m.1.params_mut());
                v.push(&mut m.2);
                v
            },
            |m| weighted_sum(&m.1.forward(&m.0.forward(&m.2).unwrap()).unwrap(), &w),
        );
        compare(&mut result, &format!("mlp seed {seed}"), &analytic, &numeric);
    }
    result
}

pub fn gru_step_fixtures(count: usize, seed0: u64) -> CheckResult {
    #[derive(Clone)]
    struct Step(GruCell, Tensor2, Tensor2);
    let mut result = CheckResult::default();
    for seed in seed0..seed0 + count as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, i, h) = (rng.random_range(1..4), rng.random_range(1..5), rng.random_range(1..5));
        let cell = GruCell::new(i, h, &mut rng);
        let x = random_tensor(&mut rng, n, i, 2.0);
        let h0 = random_tensor(&mut rng, n, h, 0.9);
        let w = random_tensor(&mut rng, n, h, 1.0);
        let (_, cache) = cell.step_cached(&x, &h0).unwrap();
        let mut grads = cell.zero_grads();
        let (dx, dh) = cell.step_backward(&cache, &w, Some(&mut grads)).unwrap();
        grads.push(dx);
        grads.push(dh);
        let model = Step(cell, x, h0);
        let numeric = numeric_grads(
            &model,
            |m| {
                let mut v = m.0.params_mut();
                v.push(&mut m.1);
                v.push(&mut m.2);
                v
            },
            |m| weighted_sum(&m.0.step(&m.1, &m.2).unwrap(), &w),
        );
        compare(&mut result, &format!("gru step seed {seed}"), &grads, &numeric);
    }
    result
}

pub fn gru_sequence_fixtures(count: usize, seed0: u64) -> CheckResult {
    #[derive(Clone)]
    struct Seq(GruCell, Vec<Tensor2>);
    let mut result = CheckResult::default();
    for seed in seed0..seed0 + count as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, i, h, t) = (
            rng.random_range(1..4),
            rng.random_range(1..5),
            rng.random_range(1..5),
            rng.random_range(1..4),
        );
        let cell = GruCell::new(i, h, &mut rng);
        let xs: Vec<Tensor2> = (0..t).map(|_| random_tensor(&mut rng, n, i, 2.0)).collect();
        let w = random_tensor(&mut rng, n, h, 1.0);
        let (_, cache) = cell.forward_sequence_cached(&xs).unwrap();
        let (grads, dxs) = cell.sequence_backward(&cache, &w, true).unwrap();
        let mut analytic = grads.unwrap();
        analytic.extend(dxs);
        let model = Seq(cell, xs);
        let numeric = numeric_grads(
            &model,
            |m| {
                let mut v = m.0.params_mut();
                v.extend(m.1.iter_mut());
                v
            },
            |m| weighted_sum(&m.0.forward_sequence(&m.1).unwrap(), &w),
        );
        compare(&mut result, &format!("gru seq seed {seed}"), &analytic, &numeric);
    }
    result
}
