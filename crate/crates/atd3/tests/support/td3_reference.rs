//! Straight TD3 written directly against dense layers, used as an oracle
//! for the learner with `Variant::Td3`.

use atd3_nn::{Adam, AdamConfig, DenseLayer, Parameters, Tensor2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct RefTransition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s2: Vec<f64>,
    pub done: bool,
}

#[derive(Clone)]
pub struct RefActor {
    pub layers: [DenseLayer; 3],
}

#[derive(Clone)]
pub struct RefCritic {
    pub layers: [DenseLayer; 4],
}

fn params_of(layers: &[DenseLayer]) -> Vec<&Tensor2> {
    layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
}

fn params_of_mut(layers: &mut [DenseLayer]) -> Vec<&mut Tensor2> {
    layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias]).collect()
}

impl RefActor {
    fn forward(&self, s: &Tensor2) -> Tensor2 {
        let mut x = s.clone();
        for l in &self.layers {
            x = l.forward(&x).unwrap();
        }
        x
    }
}

impl RefCritic {
    fn forward(&self, s: &Tensor2, a: &Tensor2) -> Tensor2 {
        let e = self.layers[0].forward(s).unwrap();
        let h1 = self.layers[1].forward(&e.hcat(a).unwrap()).unwrap();
        let h2 = self.layers[2].forward(&h1).unwrap();
        self.layers[3].forward(&h2).unwrap()
    }

    /// Returns Q, parameter gradients for `dq`, and the action gradient.
    fn grads(&self, s: &Tensor2, a: &Tensor2, dq_of: impl Fn(&Tensor2) -> Tensor2) -> (Tensor2, Vec<Tensor2>, Tensor2) {
        let (e, c0) = self.layers[0].forward_cached(s).unwrap();
        let (h1, c1) = self.layers[1].forward_cached(&e.hcat(a).unwrap()).unwrap();
        let (h2, c2) = self.layers[2].forward_cached(&h1).unwrap();
        let (q, c3) = self.layers[3].forward_cached(&h2).unwrap();
        let dq = dq_of(&q);
        let (g3, d2) = self.layers[3].backward(&c3, &dq).unwrap();
        let (g2, d1) = self.layers[2].backward(&c2, &d2).unwrap();
        let (g1, din) = self.layers[1].backward(&c1, &d1).unwrap();
        let width = e.cols();
        let (g0, _) = self.layers[0].backward(&c0, &din.slice_cols(0, width)).unwrap();
        let grads = [g0, g1, g2, g3].concat();
        (q, grads, din.slice_cols(width, din.cols()))
    }
}

pub struct RefTd3 {
    pub actor: RefActor,
    pub actor_t: RefActor,
    pub critics: [RefCritic; 2],
    pub critics_t: [RefCritic; 2],
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    pub buffer: Vec<RefTransition>,
    sample_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
    pub gamma: f64,
    pub tau: f64,
    pub delay: u64,
    pub batch: usize,
    pub smooth_std: f64,
    pub smooth_clip: f64,
    iterations: u64,
}

impl RefTd3 {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        actor: RefActor,
        critics: [RefCritic; 2],
        lr: f64,
        sample_rng: ChaCha8Rng,
        noise_rng: ChaCha8Rng,
        gamma: f64,
        tau: f64,
        delay: u64,
        batch: usize,
        smooth_std: f64,
        smooth_clip: f64,
    ) -> Self {
        let cfg = AdamConfig {
            lr,
            ..AdamConfig::default()
        };
        Self {
            actor_opt: Adam::new(cfg, &params_of(&actor.layers)),
            critic_opts: [
                Adam::new(cfg, &params_of(&critics[0].layers)),
                Adam::new(cfg, &params_of(&critics[1].layers)),
            ],
            actor_t: actor.clone(),
            critics_t: critics.clone(),
            actor,
            critics,
            buffer: Vec::new(),
            sample_rng,
            noise_rng,
            gamma,
            tau,
            delay,
            batch,
            smooth_std,
            smooth_clip,
            iterations: 0,
        }
    }

    pub fn update(&mut self) {
        let n = self.batch;
        let len = self.buffer.len();
        let idx: Vec<usize> = (0..n).map(|_| self.sample_rng.random_range(0..len)).collect();
        let rows = |f: &dyn Fn(&RefTransition) -> &Vec<f64>| {
            Tensor2::from_rows(&idx.iter().map(|&i| f(&self.buffer[i]).clone()).collect::<Vec<_>>()).unwrap()
        };
        let s = rows(&|t| &t.s);
        let a = rows(&|t| &t.a);
        let s2 = rows(&|t| &t.s2);

        let mut a2 = self.actor_t.forward(&s2);
        for v in a2.data_mut() {
            let z: f64 = self.noise_rng.sample(StandardNormal);
            *v = (*v + (self.smooth_std * z).clamp(-self.smooth_clip, self.smooth_clip)).clamp(-1.0, 1.0);
        }
        let q1t = self.critics_t[0].forward(&s2, &a2);
        let q2t = self.critics_t[1].forward(&s2, &a2);
        let y: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let t = &self.buffer[i];
                if t.done {
                    t.r
                } else {
                    t.r + self.gamma * q1t.data()[k].min(q2t.data()[k])
                }
            })
            .collect();

        let nf = n as f64;
        for c in 0..2 {
            let (_, grads, _) = self.critics[c].grads(&s, &a, |q| {
                let d: Vec<f64> = q.data().iter().zip(&y).map(|(q, y)| 2.0 * (q - y) / nf).collect();
                Tensor2::from_vec(n, 1, d).unwrap()
            });
            self.critic_opts[c]
                .step(params_of_mut(&mut self.critics[c].layers), &grads)
                .unwrap();
        }

        self.iterations += 1;
        if self.iterations % self.delay != 0 {
            return;
        }
        let mut caches = Vec::new();
        let mut x = s.clone();
        for l in &self.actor.layers {
            let (out, c) = l.forward_cached(&x).unwrap();
            caches.push(c);
            x = out;
        }
        let (_, _, da) = self.critics[0].grads(&s, &x, |q| Tensor2::filled(q.rows(), 1, -1.0 / nf));
        let mut d = da;
        let mut grads = Vec::new();
        for (l, c) in self.actor.layers.iter().zip(&caches).rev() {
            let (g, dx) = l.backward(c, &d).unwrap();
            grads.splice(0..0, g);
            d = dx;
        }
        self.actor_opt
            .step(params_of_mut(&mut self.actor.layers), &grads)
            .unwrap();

        let tau = self.tau;
        let blend = |live: &[DenseLayer], target: &mut [DenseLayer]| {
            for (l, t) in params_of(live).into_iter().zip(params_of_mut(target)) {
                for (tv, lv) in t.data_mut().iter_mut().zip(l.data()) {
                    *tv = tau * lv + (1.0 - tau) * *tv;
                }
            }
        };
        blend(&self.actor.layers, &mut self.actor_t.layers);
        for c in 0..2 {
            blend(&self.critics[c].layers, &mut self.critics_t[c].layers);
        }
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push = |layers: &[DenseLayer]| {
            for l in layers {
                out.extend(l.flat_params());
            }
        };
        push(&self.actor.layers);
        push(&self.critics[0].layers);
        push(&self.critics[1].layers);
        push(&self.actor_t.layers);
        push(&self.critics_t[0].layers);
        push(&self.critics_t[1].layers);
        out
    }
}
