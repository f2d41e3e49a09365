//! Threshold-policy reinforcement learning.
//!
//! A threshold policy looks at a state `(λ, v)` and activates exactly when
//! `μ(v) > λ`. This crate learns the threshold function `μ` with an off-policy
//! actor-critic method, both for single MDPs ([`agent::mdp`]) and for the
//! per-arm index functions of restless multi-armed bandits
//! ([`agent::rmab`]), where the learned threshold is the Whittle index.
//!
//! [`oracle`] holds exact small-instance machinery (threshold policy
//! evaluation, objective values, exact policy gradients, value iteration,
//! Whittle indices) used to check the learners.

pub mod agent;
pub mod envs;
pub mod error;
pub mod nn;
pub mod oracle;
pub mod replay;
pub mod rng;

pub use error::{Error, Result};

/// Binary control: leave the system alone or activate it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Passive = 0,
    Active = 1,
}

impl Action {
    pub fn from_bool(active: bool) -> Self {
        if active {
            Action::Active
        } else {
            Action::Passive
        }
    }

    pub fn is_active(self) -> bool {
        self == Action::Active
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn value(self) -> f64 {
        self as usize as f64
    }

    /// Deterministic threshold rule `𝟙(threshold > scalar)`.
    pub fn threshold(threshold: f64, scalar: f64) -> Self {
        Self::from_bool(threshold > scalar)
    }
}
