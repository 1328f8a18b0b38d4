use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One stored step. `state` and `next_state` are flattened observation
/// sequences; `snapshot` is the simulator state before `action` was applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition<S> {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// True when the next state is absorbing (no bootstrapping).
    pub done: bool,
    pub snapshot: Option<S>,
}

/// FIFO ring of transitions with its own seeded sampler.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayBuffer<S> {
    capacity: usize,
    items: VecDeque<Transition<S>>,
    rng: ChaCha8Rng,
}

impl<S> ReplayBuffer<S> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            capacity,
            items: VecDeque::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Appends, evicting the oldest item when full.
    pub fn push(&mut self, t: Transition<S>) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn get(&self, index: usize) -> &Transition<S> {
        &self.items[index]
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition<S>> {
        self.items.iter()
    }

    /// `n` uniform indices with replacement, drawn in order as
    /// `random_range(0..len)`.
    pub fn sample_indices(&mut self, n: usize) -> Vec<usize> {
        let len = self.items.len();
        if len == 0 {
            return Vec::new();
        }
        (0..n).map(|_| self.rng.random_range(0..len)).collect()
    }

    pub fn sampler_state(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn set_sampler_state(&mut self, rng: ChaCha8Rng) {
        self.rng = rng;
    }
}
