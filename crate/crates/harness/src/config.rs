//! Experiment configuration: a flat `key = value` file, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use deeptop::agent::AgentConfig;
use deeptop::envs::mdp::MdpEnvKind;
use deeptop::envs::rmab::RmabEnvKind;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SEED_ENV_VAR: &str = "DEEPTOP_SEED";
pub const RESOLVED_CONFIG_FILE: &str = "config.toml";

/// Which policy drives the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Deeptop,
    /// Uniform random actions (or uniform random activation sets).
    Random,
}

impl FromStr for PolicyKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deeptop" => Ok(Self::Deeptop),
            "random" => Ok(Self::Random),
            other => Err(HarnessError::Config(format!(
                "unknown policy {other:?} (expected deeptop or random)"
            ))),
        }
    }
}

/// Environment named in a config, either an MDP or a bandit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Mdp(MdpEnvKind),
    Rmab(RmabEnvKind),
}

impl Task {
    pub fn parse(name: &str) -> Result<Self> {
        if let Ok(kind) = name.parse::<MdpEnvKind>() {
            return Ok(Task::Mdp(kind));
        }
        if let Ok(kind) = name.parse::<RmabEnvKind>() {
            return Ok(Task::Rmab(kind));
        }
        Err(HarnessError::Config(format!(
            "unknown environment {name:?} (expected ev, inventory, mts, onedim or recovering)"
        )))
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Mdp(k) => k.name(),
            Task::Rmab(k) => k.name(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Threshold bound used for each MDP when none is configured: a few standard
/// deviations of the price for EV charging, the full normalized range otherwise.
pub fn default_threshold_bound(kind: MdpEnvKind) -> f64 {
    match kind {
        MdpEnvKind::Ev => 2.0,
        MdpEnvKind::Inventory | MdpEnvKind::Mts => 1.0,
    }
}

/// Reward multiplier used when none is configured. Inventory rewards are in
/// the thousands, which swamps a critic trained at the default rates.
pub fn default_reward_scale(task: Task) -> f64 {
    match task {
        Task::Mdp(MdpEnvKind::Inventory) => 0.01,
        _ => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: String,
    pub policy: PolicyKind,
    /// Logged steps per run, after warmup.
    pub timesteps: usize,
    pub runs: usize,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub batch: usize,
    pub warmup: usize,
    pub capacity: usize,
    /// Reward multiplier inside the critic target; defaults per environment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_scale: Option<f64>,
    /// MDP threshold bound; defaults per environment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_bound: Option<f64>,
    pub arms: usize,
    pub activate: usize,
    /// Bandit cost bound `M`; defaults per environment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_bound: Option<f64>,
    pub output: PathBuf,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let agent = AgentConfig::default();
        Self {
            env: "ev".into(),
            policy: PolicyKind::Deeptop,
            timesteps: 20_000,
            runs: 20,
            seed: 0,
            hidden: agent.hidden,
            actor_lr: agent.actor_lr,
            critic_lr: agent.critic_lr,
            gamma: agent.discount,
            epsilon: agent.epsilon,
            tau: agent.tau,
            batch: agent.batch,
            warmup: agent.warmup,
            capacity: agent.capacity,
            reward_scale: None,
            threshold_bound: None,
            arms: 10,
            activate: 3,
            lambda_bound: None,
            output: PathBuf::from("runs"),
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn task(&self) -> Result<Task> {
        Task::parse(&self.env)
    }

    /// Fills environment-dependent defaults and checks every field.
    pub fn resolve(mut self) -> Result<Self> {
        let task = self.task()?;
        self.reward_scale.get_or_insert(default_reward_scale(task));
        match task {
            Task::Mdp(kind) => {
                self.threshold_bound.get_or_insert(default_threshold_bound(kind));
                self.lambda_bound = None;
            }
            Task::Rmab(kind) => {
                self.lambda_bound.get_or_insert(kind.lambda_bound());
                self.threshold_bound = None;
                if self.activate == 0 || self.activate > self.arms {
                    return Err(HarnessError::Config(format!(
                        "need 1 <= activate <= arms, got activate={} arms={}",
                        self.activate, self.arms
                    )));
                }
                if kind == RmabEnvKind::Onedim && self.arms < 2 {
                    return Err(HarnessError::Config("onedim bandits need at least two arms".into()));
                }
            }
        }
        if self.runs == 0 || self.timesteps == 0 {
            return Err(HarnessError::Config("runs and timesteps must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(HarnessError::Config("jobs must be positive".into()));
        }
        self.agent_config().validate()?;
        Ok(self)
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            hidden: self.hidden.clone(),
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            discount: self.gamma,
            epsilon: self.epsilon,
            tau: self.tau,
            batch: self.batch,
            warmup: self.warmup,
            capacity: self.capacity,
            reward_scale: self.reward_scale.unwrap_or(1.0),
            threshold_bound: self.threshold_bound,
        }
    }

    /// Seed of run `run`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

/// Parses `64,128,64`.
pub fn parse_hidden(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| HarnessError::Config(format!("bad hidden layer size {part:?}")))
        })
        .collect()
}
