//! Fixed-capacity replay memory with uniform minibatch sampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::Action;

pub const DEFAULT_CAPACITY: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub action: Action,
    pub reward: f64,
    pub next_state: S,
}

/// Ring buffer of transitions. Once full, each push overwrites the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayMemory<S> {
    capacity: usize,
    buffer: Vec<Transition<S>>,
    cursor: usize,
}

impl<S: Clone> ReplayMemory<S> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            buffer: Vec::with_capacity(capacity.min(4096)),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn push(&mut self, transition: Transition<S>) {
        debug_assert!(transition.reward.is_finite());
        if self.buffer.len() < self.capacity {
            self.buffer.push(transition);
        } else {
            self.buffer[self.cursor] = transition;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Entries from oldest to newest.
    pub fn iter_chronological(&self) -> impl Iterator<Item = &Transition<S>> {
        let split = if self.buffer.len() < self.capacity { 0 } else { self.cursor };
        self.buffer[split..].iter().chain(&self.buffer[..split])
    }

    pub fn get(&self, index: usize) -> Option<&Transition<S>> {
        self.buffer.get(index)
    }

    /// `batch` indices drawn independently and uniformly, with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.buffer.len() < batch || batch == 0 {
            return Err(Error::InsufficientTransitions {
                have: self.buffer.len(),
                need: batch,
            });
        }
        Ok((0..batch).map(|_| rng.random_range(0..self.buffer.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&Transition<S>>> {
        Ok(self
            .sample_indices(batch, rng)?
            .into_iter()
            .map(|i| &self.buffer[i])
            .collect())
    }
}
