use std::collections::VecDeque;

/// Sliding window over the most recent observations. At episode start the
/// window is filled with copies of the first observation.
#[derive(Clone, Debug)]
pub struct SequenceWindow {
    len: usize,
    obs: VecDeque<Vec<f64>>,
}

impl SequenceWindow {
    pub fn new(len: usize, first: &[f64]) -> Self {
        Self {
            len,
            obs: std::iter::repeat_n(first.to_vec(), len).collect(),
        }
    }

    /// Window holding a stored flattened sequence of `len` observations.
    pub fn from_flat(len: usize, flat: &[f64]) -> Self {
        let obs_dim = flat.len() / len.max(1);
        Self {
            len,
            obs: flat.chunks(obs_dim.max(1)).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn push(&mut self, obs: &[f64]) {
        self.obs.pop_front();
        self.obs.push_back(obs.to_vec());
    }

    /// Observations oldest first, concatenated.
    pub fn flat(&self) -> Vec<f64> {
        self.obs.iter().flatten().copied().collect()
    }

    pub fn seq_len(&self) -> usize {
        self.len
    }
}
