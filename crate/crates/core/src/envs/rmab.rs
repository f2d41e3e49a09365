//! Restless-bandit arms and the joint N-arm environment.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::arm::ArmModel;
use crate::rng::{self, StreamRng};
use crate::Action;

/// Number of states of the chain arm.
pub const ONEDIM_STATES: usize = 100;
/// Largest waiting time tracked by a recovering arm.
pub const RECOVERING_MAX_WAIT: usize = 100;

/// Reward `1 − ((s − 99) / 99)²` of chain state `s`.
pub fn onedim_reward(s: usize) -> Result<f64> {
    if s >= ONEDIM_STATES {
        return Err(Error::OutOfRange {
            what: "chain state",
            value: s as f64,
        });
    }
    let top = (ONEDIM_STATES - 1) as f64;
    let d = (s as f64 - top) / top;
    Ok(1.0 - d * d)
}

/// `count` success probabilities evenly spaced over `[0.2, 0.8]`.
pub fn evenly_spaced_p(count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidConfig(format!(
            "evenly spaced probabilities need at least two arms, got {count}"
        )));
    }
    let spacing = 0.6 / (count - 1) as f64;
    Ok((0..count).map(|i| 0.2 + i as f64 * spacing).collect())
}

/// Chain arm: activation moves up with probability `p`, passivity moves down
/// with probability `q`, otherwise the state stays put. The reward depends only
/// on the current state. A truncated chain keeps the first `states` states and
/// the same reward function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDimArm {
    pub states: usize,
    pub p: f64,
    pub q: f64,
}

impl OneDimArm {
    pub fn new(p: f64) -> Self {
        Self::truncated(ONEDIM_STATES, p)
    }

    /// Same dynamics and rewards on states `0..states`.
    pub fn truncated(states: usize, p: f64) -> Self {
        assert!((2..=ONEDIM_STATES).contains(&states), "chain length out of range");
        assert!((0.0..=1.0).contains(&p), "probability out of range");
        Self { states, p, q: p }
    }

    pub fn top(&self) -> usize {
        self.states - 1
    }

    pub fn reward(&self, s: usize) -> f64 {
        assert!(s < self.states, "state outside chain");
        onedim_reward(s).expect("state within chain")
    }

    /// Next state given the action and whether the move succeeded.
    pub fn next_state(&self, s: usize, action: Action, success: bool) -> usize {
        match (action, success) {
            (_, false) => s,
            (Action::Active, true) => (s + 1).min(self.top()),
            (Action::Passive, true) => s.saturating_sub(1),
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, s: usize, action: Action, rng: &mut R) -> (usize, f64) {
        let prob = if action.is_active() { self.p } else { self.q };
        let success = rng.random::<f64>() < prob;
        (self.next_state(s, action, success), self.reward(s))
    }
}

/// Reward `θ₀(1 − e^{−θ₁ z})` of activating a recovering arm after waiting `z` steps.
pub fn recovering_reward(z: usize, theta0: f64, theta1: f64) -> Result<f64> {
    if !(1..=RECOVERING_MAX_WAIT).contains(&z) {
        return Err(Error::OutOfRange {
            what: "waiting time",
            value: z as f64,
        });
    }
    Ok(theta0 * (1.0 - (-theta1 * z as f64).exp()))
}

/// Reward-curve classes of recovering arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveringClass {
    A,
    B,
    C,
    D,
}

impl RecoveringClass {
    pub const ALL: [RecoveringClass; 4] = [Self::A, Self::B, Self::C, Self::D];

    /// `(θ₀, θ₁)`.
    pub fn thetas(self) -> (f64, f64) {
        match self {
            Self::A => (10.0, 0.2),
            Self::B => (8.5, 0.4),
            Self::C => (7.0, 0.6),
            Self::D => (5.5, 0.8),
        }
    }

    /// Class of arm `i` under round-robin assignment.
    pub fn round_robin(i: usize) -> Self {
        Self::ALL[i % 4]
    }
}

/// Recovering arm: the state is the time since the last activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveringArm {
    pub theta0: f64,
    pub theta1: f64,
}

impl RecoveringArm {
    pub fn of_class(class: RecoveringClass) -> Self {
        let (theta0, theta1) = class.thetas();
        Self { theta0, theta1 }
    }

    pub fn reward(&self, z: usize) -> f64 {
        recovering_reward(z, self.theta0, self.theta1).expect("waiting time within range")
    }

    pub fn step(&self, z: usize, action: Action) -> (usize, f64) {
        match action {
            Action::Active => (1, self.reward(z)),
            Action::Passive => ((z + 1).min(RECOVERING_MAX_WAIT), 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RmabEnvKind {
    Onedim,
    Recovering,
}

impl RmabEnvKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Onedim => "onedim",
            Self::Recovering => "recovering",
        }
    }

    /// Bound on activation costs and learned indices.
    pub fn lambda_bound(self) -> f64 {
        match self {
            Self::Onedim => 1.0,
            Self::Recovering => 10.0,
        }
    }
}

impl fmt::Display for RmabEnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RmabEnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onedim" => Ok(Self::Onedim),
            "recovering" => Ok(Self::Recovering),
            other => Err(Error::InvalidConfig(format!(
                "unknown bandit environment {other:?} (expected onedim or recovering)"
            ))),
        }
    }
}

/// Any arm kind, with its state stored as an index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Arm {
    OneDim(OneDimArm),
    Recovering(RecoveringArm),
}

/// Kind-agnostic arm interface used by the learners and the oracle.
pub trait ArmKind {
    fn num_states(&self) -> usize;

    /// Smallest valid state.
    fn first_state(&self) -> usize;

    /// Network input for state `s`.
    fn encode(&self, s: usize) -> Vec<f64>;

    fn step_arm(&self, s: usize, action: Action, rng: &mut StreamRng) -> (usize, f64);

    /// Exact transition and reward tables, indexed by `s − first_state`.
    fn model(&self) -> ArmModel;
}

impl ArmKind for Arm {
    fn num_states(&self) -> usize {
        match self {
            Arm::OneDim(a) => a.states,
            Arm::Recovering(_) => RECOVERING_MAX_WAIT,
        }
    }

    fn first_state(&self) -> usize {
        match self {
            Arm::OneDim(_) => 0,
            Arm::Recovering(_) => 1,
        }
    }

    fn encode(&self, s: usize) -> Vec<f64> {
        match self {
            Arm::OneDim(a) => vec![s as f64 / a.top() as f64],
            Arm::Recovering(_) => vec![s as f64 / RECOVERING_MAX_WAIT as f64],
        }
    }

    fn step_arm(&self, s: usize, action: Action, rng: &mut StreamRng) -> (usize, f64) {
        match self {
            Arm::OneDim(a) => a.step(s, action, rng),
            Arm::Recovering(a) => a.step(s, action),
        }
    }

    fn model(&self) -> ArmModel {
        let n = self.num_states();
        let first = self.first_state();
        let mut model = ArmModel::zeros(n);
        for i in 0..n {
            let s = first + i;
            match self {
                Arm::OneDim(a) => {
                    for action in [Action::Passive, Action::Active] {
                        let prob = if action.is_active() { a.p } else { a.q };
                        let moved = a.next_state(s, action, true);
                        let row = &mut model.transition[action.index()][i];
                        row[moved] += prob;
                        row[s] += 1.0 - prob;
                        model.reward[action.index()][i] = a.reward(s);
                    }
                }
                Arm::Recovering(a) => {
                    for action in [Action::Passive, Action::Active] {
                        let (next, r) = a.step(s, action);
                        model.transition[action.index()][i][next - first] = 1.0;
                        model.reward[action.index()][i] = r;
                    }
                }
            }
        }
        model
    }
}

/// N arms of which exactly `activate` are made active each step. Every arm
/// draws from its own random stream.
#[derive(Debug, Clone)]
pub struct RmabEnv {
    arms: Vec<Arm>,
    states: Vec<usize>,
    activate: usize,
    rngs: Vec<StreamRng>,
}

impl RmabEnv {
    /// Initial arm states are drawn uniformly from each arm's state space.
    pub fn new(arms: Vec<Arm>, activate: usize, seed: u64) -> Result<Self> {
        if arms.is_empty() || activate == 0 || activate > arms.len() {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= activate <= arms, got activate={activate} arms={}",
                arms.len()
            )));
        }
        let mut rngs: Vec<StreamRng> = (0..arms.len()).map(|i| rng::arm_stream(seed, i, 0)).collect();
        let states = arms
            .iter()
            .zip(rngs.iter_mut())
            .map(|(arm, rng)| arm.first_state() + rng.random_range(0..arm.num_states()))
            .collect();
        Ok(Self {
            arms,
            states,
            activate,
            rngs,
        })
    }

    /// Chain arms with evenly spaced success probabilities.
    pub fn onedim(count: usize, activate: usize, seed: u64) -> Result<Self> {
        let arms = evenly_spaced_p(count)?
            .into_iter()
            .map(|p| Arm::OneDim(OneDimArm::new(p)))
            .collect();
        Self::new(arms, activate, seed)
    }

    /// Recovering arms with classes assigned round-robin.
    pub fn recovering(count: usize, activate: usize, seed: u64) -> Result<Self> {
        let arms = (0..count)
            .map(|i| Arm::Recovering(RecoveringArm::of_class(RecoveringClass::round_robin(i))))
            .collect();
        Self::new(arms, activate, seed)
    }

    pub fn of_kind(kind: RmabEnvKind, count: usize, activate: usize, seed: u64) -> Result<Self> {
        match kind {
            RmabEnvKind::Onedim => Self::onedim(count, activate, seed),
            RmabEnvKind::Recovering => Self::recovering(count, activate, seed),
        }
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn activate(&self) -> usize {
        self.activate
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn set_states(&mut self, states: &[usize]) {
        assert_eq!(states.len(), self.arms.len());
        self.states.copy_from_slice(states);
    }

    /// Per-arm actions for an activation set, validating its size and contents.
    pub fn actions_for(&self, active: &[usize]) -> Result<Vec<Action>> {
        if active.len() != self.activate {
            return Err(Error::InvalidConfig(format!(
                "activation set has {} arms, budget is {}",
                active.len(),
                self.activate
            )));
        }
        let mut actions = vec![Action::Passive; self.arms.len()];
        for &i in active {
            match actions.get_mut(i) {
                None => {
                    return Err(Error::InvalidConfig(format!("arm {i} does not exist")));
                }
                Some(a) if a.is_active() => {
                    return Err(Error::InvalidConfig(format!("arm {i} activated twice")));
                }
                Some(a) => *a = Action::Active,
            }
        }
        Ok(actions)
    }

    /// Steps every arm; returns the per-arm rewards.
    pub fn step(&mut self, active: &[usize]) -> Result<Vec<f64>> {
        let actions = self.actions_for(active)?;
        Ok(self.step_actions(&actions))
    }

    fn step_actions(&mut self, actions: &[Action]) -> Vec<f64> {
        self.arms
            .iter()
            .zip(self.states.iter_mut())
            .zip(self.rngs.iter_mut())
            .zip(actions)
            .map(|(((arm, s), rng), &a)| {
                let (next, r) = arm.step_arm(*s, a, rng);
                *s = next;
                r
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onedim_rewards() {
        assert_eq!(onedim_reward(99).unwrap(), 1.0);
        assert_eq!(onedim_reward(0).unwrap(), 0.0);
        assert!((onedim_reward(66).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!(onedim_reward(100).is_err());
    }

    #[test]
    fn onedim_boundaries() {
        let arm = OneDimArm::new(0.5);
        assert_eq!(arm.next_state(99, Action::Active, true), 99);
        assert_eq!(arm.next_state(0, Action::Passive, true), 0);
        assert_eq!(arm.next_state(40, Action::Active, false), 40);
        assert_eq!(arm.next_state(40, Action::Passive, true), 39);
    }

    #[test]
    fn spaced_probabilities() {
        let p = evenly_spaced_p(10).unwrap();
        assert_eq!(p.len(), 10);
        assert!((p[0] - 0.2).abs() < 1e-12 && (p[9] - 0.8).abs() < 1e-12);
        assert!((p[1] - p[0] - 0.6 / 9.0).abs() < 1e-12);
        assert_eq!(evenly_spaced_p(2).unwrap(), vec![0.2, 0.8]);
        assert!(evenly_spaced_p(1).is_err());
    }

    #[test]
    fn recovering_rewards_and_steps() {
        assert!((recovering_reward(1, 10.0, 0.2).unwrap() - 1.812692).abs() < 1e-6);
        let saturated = recovering_reward(100, 10.0, 0.2).unwrap();
        assert!((saturated - 10.0 * (1.0 - (-20.0f64).exp())).abs() < 1e-12);
        assert!(10.0 - saturated < 2.1e-8 && saturated < 10.0);
        assert!((recovering_reward(1, 5.5, 0.8).unwrap() - 3.028690).abs() < 1e-6);
        assert!(recovering_reward(0, 10.0, 0.2).is_err());
        let arm = RecoveringArm::of_class(RecoveringClass::A);
        assert_eq!(arm.step(100, Action::Passive), (100, 0.0));
        assert_eq!(arm.step(5, Action::Active).0, 1);
        assert_eq!(arm.step(1, Action::Passive), (2, 0.0));
    }

    #[test]
    fn models_are_stochastic() {
        for arm in [
            Arm::OneDim(OneDimArm::truncated(5, 0.3)),
            Arm::Recovering(RecoveringArm::of_class(RecoveringClass::C)),
        ] {
            let m = arm.model();
            for rows in &m.transition {
                for row in rows {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn activation_sets_are_validated() {
        let mut env = RmabEnv::onedim(3, 1, 0).unwrap();
        assert!(env.step(&[]).is_err());
        assert!(env.step(&[0, 1]).is_err());
        assert!(env.step(&[3]).is_err());
        assert_eq!(env.step(&[2]).unwrap().len(), 3);
        let env = RmabEnv::onedim(3, 2, 0).unwrap();
        assert!(env.actions_for(&[1, 1]).is_err());
        assert!(RmabEnv::onedim(3, 4, 0).is_err());
        assert!(RmabEnv::recovering(3, 0, 0).is_err());
    }

    #[test]
    fn single_arm_full_budget() {
        let mut env = RmabEnv::recovering(1, 1, 3).unwrap();
        for _ in 0..5 {
            env.step(&[0]).unwrap();
            assert_eq!(env.states()[0], 1);
        }
        let env = RmabEnv::onedim(3, 3, 1).unwrap();
        let actions = env.actions_for(&[2, 0, 1]).unwrap();
        assert!(actions.iter().all(|a| a.is_active()));
    }
}
