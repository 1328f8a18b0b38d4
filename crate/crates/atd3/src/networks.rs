//! Actor and critic networks.
//!
//! Both start with an encoder over the observation sequence: a GRU whose
//! final hidden state is the encoding, or a ReLU dense layer over the
//! flattened sequence. The actor adds a ReLU layer and a tanh output; the
//! critic concatenates the action to the encoding and adds two ReLU layers
//! and a linear output.

use atd3_nn::{Activation, DenseCache, DenseLayer, GruCell, GruSeqCache, Parameters, Tensor2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Atd3Error, Result};

/// A batch of observation sequences, one row per sample. Each row holds
/// `seq_len` observations in temporal order, the newest last.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqBatch {
    seq_len: usize,
    obs_dim: usize,
    data: Tensor2,
}

impl SeqBatch {
    pub fn new(seq_len: usize, obs_dim: usize, data: Tensor2) -> Result<Self> {
        if data.cols() != seq_len * obs_dim {
            return Err(Atd3Error::SequenceShape {
                expected: seq_len * obs_dim,
                got: data.cols(),
            });
        }
        Ok(Self {
            seq_len,
            obs_dim,
            data,
        })
    }

    /// Batch from flattened rows of length `seq_len * obs_dim`.
    pub fn from_rows<R: AsRef<[f64]>>(seq_len: usize, obs_dim: usize, rows: &[R]) -> Result<Self> {
        let width = seq_len * obs_dim;
        let mut data = Vec::with_capacity(rows.len() * width);
        for r in rows {
            let r = r.as_ref();
            if r.len() != width {
                return Err(Atd3Error::SequenceShape {
                    expected: width,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(seq_len, obs_dim, Tensor2::from_vec(rows.len(), width, data)?)
    }

    pub fn len(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn flat(&self) -> &Tensor2 {
        &self.data
    }

    /// One `N x obs_dim` matrix per time step.
    pub fn steps(&self) -> Vec<Tensor2> {
        (0..self.seq_len)
            .map(|t| self.data.slice_cols(t * self.obs_dim, (t + 1) * self.obs_dim))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Encoder {
    Dense(DenseLayer),
    Gru(GruCell),
}

#[derive(Clone, Debug)]
pub enum EncoderCache {
    Dense(DenseCache),
    Gru(GruSeqCache),
}

impl Encoder {
    pub fn new<R: Rng + ?Sized>(recurrent: bool, obs_dim: usize, seq_len: usize, width: usize, rng: &mut R) -> Self {
        if recurrent {
            Encoder::Gru(GruCell::new(obs_dim, width, rng))
        } else {
            Encoder::Dense(DenseLayer::new(obs_dim * seq_len, width, Activation::Relu, rng))
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Encoder::Dense(l) => l.out_dim(),
            Encoder::Gru(g) => g.hidden_size(),
        }
    }

    pub fn forward(&self, x: &SeqBatch) -> Result<Tensor2> {
        Ok(match self {
            Encoder::Dense(l) => l.forward(x.flat())?,
            Encoder::Gru(g) => g.forward_sequence(&x.steps())?,
        })
    }

    pub fn forward_cached(&self, x: &SeqBatch) -> Result<(Tensor2, EncoderCache)> {
        Ok(match self {
            Encoder::Dense(l) => {
                let (y, c) = l.forward_cached(x.flat())?;
                (y, EncoderCache::Dense(c))
            }
            Encoder::Gru(g) => {
                let (y, c) = g.forward_sequence_cached(&x.steps())?;
                (y, EncoderCache::Gru(c))
            }
        })
    }

    /// Parameter gradients for upstream gradient `d_out`.
    pub fn backward(&self, cache: &EncoderCache, d_out: &Tensor2) -> Result<Vec<Tensor2>> {
        match (self, cache) {
            (Encoder::Dense(l), EncoderCache::Dense(c)) => Ok(l.backward(c, d_out)?.0),
            (Encoder::Gru(g), EncoderCache::Gru(c)) => {
                Ok(g.sequence_backward(c, d_out, true)?.0.expect("requested"))
            }
            _ => unreachable!("cache built by a different encoder kind"),
        }
    }

    fn inner(&self) -> &dyn Parameters {
        match self {
            Encoder::Dense(l) => l,
            Encoder::Gru(g) => g,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Parameters {
        match self {
            Encoder::Dense(l) => l,
            Encoder::Gru(g) => g,
        }
    }
}

impl Parameters for Encoder {
    fn params(&self) -> Vec<&Tensor2> {
        self.inner().params()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        self.inner_mut().params_mut()
    }

    fn param_names(&self) -> Vec<String> {
        self.inner().param_names()
    }
}

fn prefixed(prefix: &str, names: Vec<String>) -> impl Iterator<Item = String> + '_ {
    names.into_iter().map(move |n| format!("{prefix}.{n}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub encoder: Encoder,
    pub hidden: DenseLayer,
    pub output: DenseLayer,
}

pub struct ActorCache {
    encoder: EncoderCache,
    hidden: DenseCache,
    output: DenseCache,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(
        recurrent: bool,
        obs_dim: usize,
        act_dim: usize,
        seq_len: usize,
        encoder_width: usize,
        hidden_width: usize,
        rng: &mut R,
    ) -> Self {
        let encoder = Encoder::new(recurrent, obs_dim, seq_len, encoder_width, rng);
        let hidden = DenseLayer::new(encoder_width, hidden_width, Activation::Relu, rng);
        let output = DenseLayer::new(hidden_width, act_dim, Activation::Tanh, rng);
        Self {
            encoder,
            hidden,
            output,
        }
    }

    pub fn act_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn forward(&self, x: &SeqBatch) -> Result<Tensor2> {
        let e = self.encoder.forward(x)?;
        let h = self.hidden.forward(&e)?;
        Ok(self.output.forward(&h)?)
    }

    pub fn forward_cached(&self, x: &SeqBatch) -> Result<(Tensor2, ActorCache)> {
        let (e, encoder) = self.encoder.forward_cached(x)?;
        let (h, hidden) = self.hidden.forward_cached(&e)?;
        let (a, output) = self.output.forward_cached(&h)?;
        Ok((
            a,
            ActorCache {
                encoder,
                hidden,
                output,
            },
        ))
    }

    /// Parameter gradients, ordered as [`Parameters::params`].
    pub fn backward(&self, cache: &ActorCache, d_action: &Tensor2) -> Result<Vec<Tensor2>> {
        let (g_out, dh) = self.output.backward(&cache.output, d_action)?;
        let (g_hidden, de) = self.hidden.backward(&cache.hidden, &dh)?;
        let mut grads = self.encoder.backward(&cache.encoder, &de)?;
        grads.extend(g_hidden);
        grads.extend(g_out);
        Ok(grads)
    }
}

impl Parameters for Actor {
    fn params(&self) -> Vec<&Tensor2> {
        let mut p = self.encoder.params();
        p.extend(self.hidden.params());
        p.extend(self.output.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut p = self.encoder.params_mut();
        p.extend(self.hidden.params_mut());
        p.extend(self.output.params_mut());
        p
    }

    fn param_names(&self) -> Vec<String> {
        prefixed("encoder", self.encoder.param_names())
            .chain(prefixed("hidden", self.hidden.param_names()))
            .chain(prefixed("output", self.output.param_names()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Critic {
    pub encoder: Encoder,
    pub hidden1: DenseLayer,
    pub hidden2: DenseLayer,
    pub output: DenseLayer,
}

pub struct CriticCache {
    encoder: EncoderCache,
    hidden1: DenseCache,
    hidden2: DenseCache,
    output: DenseCache,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(
        recurrent: bool,
        obs_dim: usize,
        act_dim: usize,
        seq_len: usize,
        encoder_width: usize,
        hidden_width: usize,
        rng: &mut R,
    ) -> Self {
        let encoder = Encoder::new(recurrent, obs_dim, seq_len, encoder_width, rng);
        let hidden1 = DenseLayer::new(encoder_width + act_dim, hidden_width, Activation::Relu, rng);
        let hidden2 = DenseLayer::new(hidden_width, hidden_width, Activation::Relu, rng);
        let output = DenseLayer::new(hidden_width, 1, Activation::Identity, rng);
        Self {
            encoder,
            hidden1,
            hidden2,
            output,
        }
    }

    /// `N x 1` Q-values.
    pub fn forward(&self, x: &SeqBatch, action: &Tensor2) -> Result<Tensor2> {
        let e = self.encoder.forward(x)?;
        let h1 = self.hidden1.forward(&e.hcat(action)?)?;
        let h2 = self.hidden2.forward(&h1)?;
        Ok(self.output.forward(&h2)?)
    }

    pub fn forward_cached(&self, x: &SeqBatch, action: &Tensor2) -> Result<(Tensor2, CriticCache)> {
        let (e, encoder) = self.encoder.forward_cached(x)?;
        let (h1, hidden1) = self.hidden1.forward_cached(&e.hcat(action)?)?;
        let (h2, hidden2) = self.hidden2.forward_cached(&h1)?;
        let (q, output) = self.output.forward_cached(&h2)?;
        Ok((
            q,
            CriticCache {
                encoder,
                hidden1,
                hidden2,
                output,
            },
        ))
    }

    /// Parameter gradients (if `want_params`) and the gradient with respect
    /// to the action input.
    pub fn backward(
        &self,
        cache: &CriticCache,
        d_q: &Tensor2,
        want_params: bool,
    ) -> Result<(Option<Vec<Tensor2>>, Tensor2)> {
        let width = self.encoder.width();
        if !want_params {
            let dh2 = self.output.backward_input(&cache.output, d_q)?;
            let dh1 = self.hidden2.backward_input(&cache.hidden2, &dh2)?;
            let din = self.hidden1.backward_input(&cache.hidden1, &dh1)?;
            return Ok((None, din.slice_cols(width, din.cols())));
        }
        let (g_out, dh2) = self.output.backward(&cache.output, d_q)?;
        let (g_h2, dh1) = self.hidden2.backward(&cache.hidden2, &dh2)?;
        let (g_h1, din) = self.hidden1.backward(&cache.hidden1, &dh1)?;
        let mut grads = self.encoder.backward(&cache.encoder, &din.slice_cols(0, width))?;
        grads.extend(g_h1);
        grads.extend(g_h2);
        grads.extend(g_out);
        Ok((Some(grads), din.slice_cols(width, din.cols())))
    }
}

impl Parameters for Critic {
    fn params(&self) -> Vec<&Tensor2> {
        let mut p = self.encoder.params();
        p.extend(self.hidden1.params());
        p.extend(self.hidden2.params());
        p.extend(self.output.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut p = self.encoder.params_mut();
        p.extend(self.hidden1.params_mut());
        p.extend(self.hidden2.params_mut());
        p.extend(self.output.params_mut());
        p
    }

    fn param_names(&self) -> Vec<String> {
        prefixed("encoder", self.encoder.param_names())
            .chain(prefixed("hidden1", self.hidden1.param_names()))
            .chain(prefixed("hidden2", self.hidden2.param_names()))
            .chain(prefixed("output", self.output.param_names()))
            .collect()
    }
}
