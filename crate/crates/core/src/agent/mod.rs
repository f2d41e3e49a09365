//! Threshold actor-critic learners.

pub mod mdp;
pub mod rmab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::replay::DEFAULT_CAPACITY;

/// Hyperparameters shared by both learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub batch: usize,
    /// Random-action transitions collected before the first update.
    pub warmup: usize,
    pub capacity: usize,
    /// Multiplier applied to rewards before they enter the critic.
    pub reward_scale: f64,
    /// When set, MDP thresholds are squashed into `(−bound, bound)`.
    pub threshold_bound: Option<f64>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            discount: 0.99,
            epsilon: 0.05,
            tau: 0.001,
            batch: 64,
            warmup: 1000,
            capacity: DEFAULT_CAPACITY,
            reward_scale: 1.0,
            threshold_bound: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad("discount must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        if self.batch == 0 || self.capacity < self.batch {
            return bad("batch must be positive and no larger than the replay capacity");
        }
        if self.warmup < self.batch {
            return bad("warmup must be at least one batch");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward scale must be positive");
        }
        if self.threshold_bound.is_some_and(|m| !(m > 0.0 && m.is_finite())) {
            return bad("threshold bound must be positive");
        }
        Ok(())
    }

    pub(crate) fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(input);
        sizes.extend(&self.hidden);
        sizes.push(output);
        sizes
    }
}

/// `tanh` rounds to ±1 for large inputs; this keeps squashed values strictly inside the bound.
const MAX_SQUASH: f64 = 1.0 - f64::EPSILON;

pub(crate) fn squash(x: f64) -> f64 {
    x.tanh().clamp(-MAX_SQUASH, MAX_SQUASH)
}

/// Steps of one training iteration, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdatePhase {
    Critic,
    Actor,
    Target,
}
