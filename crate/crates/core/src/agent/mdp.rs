//! Threshold actor-critic for a single MDP.
//!
//! The actor maps the vector state to a threshold `μ(v)`; the policy activates
//! when `μ(v) > λ`. The critic maps `(λ, v)` to both action values at once and
//! a slowly tracking target copy provides the bootstrap values.

use rand::Rng;

use super::{squash, AgentConfig, UpdatePhase};
use crate::envs::mdp::{ScalarVectorState, ThresholdEnv};
use crate::error::{Error, Result};
use crate::nn::{Adam, Direction, Mlp};
use crate::replay::{ReplayMemory, Transition};
use crate::rng::{self, streams, StreamRng};
use crate::Action;

/// A sampled minibatch laid out row-major for batched network passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch {
    pub size: usize,
    /// Rows `[λ, v…]`.
    pub states: Vec<f64>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
}

impl Minibatch {
    pub fn from_transitions(batch: &[&Transition<Vec<f64>>]) -> Self {
        let mut out = Minibatch {
            size: batch.len(),
            states: Vec::new(),
            actions: Vec::with_capacity(batch.len()),
            rewards: Vec::with_capacity(batch.len()),
            next_states: Vec::new(),
        };
        for t in batch {
            out.states.extend(&t.state);
            out.actions.push(t.action);
            out.rewards.push(t.reward);
            out.next_states.extend(&t.next_state);
        }
        out
    }

    fn width(&self) -> usize {
        self.states.len() / self.size
    }

    /// Vector-state part of every row.
    fn vectors(&self) -> Vec<f64> {
        self.states.chunks(self.width()).flat_map(|row| &row[1..]).copied().collect()
    }
}

fn flatten(state: &ScalarVectorState) -> Vec<f64> {
    let mut row = Vec::with_capacity(state.v.len() + 1);
    row.push(state.lambda);
    row.extend(&state.v);
    row
}

#[derive(Debug, Clone)]
pub struct MdpAgent {
    config: AgentConfig,
    vector_dim: usize,
    actor: Mlp,
    critic: Mlp,
    target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    memory: ReplayMemory<Vec<f64>>,
    explore_rng: StreamRng,
    replay_rng: StreamRng,
    trace: Option<Vec<UpdatePhase>>,
}

/// What happened in one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub action: Action,
    pub reward: f64,
    pub updated: bool,
}

impl MdpAgent {
    pub fn new(vector_dim: usize, config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = rng::stream(seed, streams::INIT);
        let actor = Mlp::new(&config.layer_sizes(vector_dim, 1), &mut init)?;
        let critic = Mlp::new(&config.layer_sizes(vector_dim + 1, 2), &mut init)?;
        Ok(Self {
            vector_dim,
            actor_opt: Adam::new(&actor, config.actor_lr),
            critic_opt: Adam::new(&critic, config.critic_lr),
            target: critic.clone(),
            actor,
            critic,
            memory: ReplayMemory::new(config.capacity),
            explore_rng: rng::stream(seed, streams::EXPLORATION),
            replay_rng: rng::stream(seed, streams::REPLAY),
            trace: None,
            config,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    pub fn target(&self) -> &Mlp {
        &self.target
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn critic_mut(&mut self) -> &mut Mlp {
        &mut self.critic
    }

    pub fn memory(&self) -> &ReplayMemory<Vec<f64>> {
        &self.memory
    }

    /// Records the order of update phases from now on.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> Option<&[UpdatePhase]> {
        self.trace.as_deref()
    }

    pub fn threshold(&self, v: &[f64]) -> f64 {
        self.output_to_threshold(self.actor.forward(v)[0])
    }

    fn output_to_threshold(&self, x: f64) -> f64 {
        match self.config.threshold_bound {
            Some(m) => m * squash(x),
            None => x,
        }
    }

    /// `dμ/dx` of the output map at raw actor output `x`.
    fn output_slope(&self, x: f64) -> f64 {
        match self.config.threshold_bound {
            Some(m) => {
                let t = squash(x);
                m * (1.0 - t * t)
            }
            None => 1.0,
        }
    }

    pub fn greedy_action(&self, state: &ScalarVectorState) -> Action {
        Action::threshold(self.threshold(&state.v), state.lambda)
    }

    pub fn in_warmup(&self) -> bool {
        self.memory.len() < self.config.warmup
    }

    /// Uniform random action during warmup and with probability ε afterwards.
    pub fn select_action(&mut self, state: &ScalarVectorState) -> Action {
        if state.v.len() != self.vector_dim {
            panic!("expected vector state of length {}, got {}", self.vector_dim, state.v.len());
        }
        if self.in_warmup() || self.explore_rng.random::<f64>() < self.config.epsilon {
            Action::from_bool(self.explore_rng.random())
        } else {
            self.greedy_action(state)
        }
    }

    fn note(&mut self, phase: UpdatePhase) {
        if let Some(t) = &mut self.trace {
            t.push(phase);
        }
    }

    /// One descent step on the squared TD error against the target critic.
    pub fn critic_update(&mut self, batch: &Minibatch) {
        let b = batch.size;
        let next = self.target.forward_batch(&batch.next_states, b);
        let acts = self.critic.forward_batch(&batch.states, b);
        let q = acts.output();
        let mut output_grad = vec![0.0; 2 * b];
        for k in 0..b {
            let bootstrap = next.output()[2 * k].max(next.output()[2 * k + 1]);
            let y = self.config.reward_scale * batch.rewards[k] + self.config.discount * bootstrap;
            let i = 2 * k + batch.actions[k].index();
            output_grad[i] = 2.0 / b as f64 * (q[i] - y);
        }
        let grad = self.critic.backward_batch(&acts, &output_grad);
        self.critic_opt.step(&mut self.critic, &grad, Direction::Descend);
        self.note(UpdatePhase::Critic);
    }

    /// One ascent step moving each threshold in the direction of the critic's
    /// activation advantage evaluated at that threshold.
    pub fn actor_update(&mut self, batch: &Minibatch) {
        let b = batch.size;
        let vectors = batch.vectors();
        let acts = self.actor.forward_batch(&vectors, b);
        let thresholds: Vec<f64> = acts.output().iter().map(|&x| self.output_to_threshold(x)).collect();
        let advantage = self.advantages_at_thresholds(&thresholds, &vectors);
        let output_grad: Vec<f64> = advantage
            .iter()
            .zip(acts.output())
            .map(|(d, &x)| d * self.output_slope(x) / b as f64)
            .collect();
        let grad = self.actor.backward_batch(&acts, &output_grad);
        self.actor_opt.step(&mut self.actor, &grad, Direction::Ascend);
        self.note(UpdatePhase::Actor);
    }

    /// `Q(μ_k, v_k, 1) − Q(μ_k, v_k, 0)` for each row.
    fn advantages_at_thresholds(&self, thresholds: &[f64], vectors: &[f64]) -> Vec<f64> {
        let b = thresholds.len();
        let mut inputs = Vec::with_capacity(b * (self.vector_dim + 1));
        for (m, v) in thresholds.iter().zip(vectors.chunks(self.vector_dim)) {
            inputs.push(*m);
            inputs.extend(v);
        }
        let q = self.critic.forward_batch(&inputs, b);
        q.output().chunks(2).map(|c| c[1] - c[0]).collect()
    }

    pub fn target_update(&mut self) {
        self.target.soft_update(&self.critic, self.config.tau);
        self.note(UpdatePhase::Target);
    }

    /// Critic, actor and target updates on one sampled minibatch.
    pub fn update(&mut self) -> Result<()> {
        let batch = {
            let sample = self.memory.sample(self.config.batch, &mut self.replay_rng)?;
            Minibatch::from_transitions(&sample)
        };
        self.critic_update(&batch);
        self.actor_update(&batch);
        self.target_update();
        Ok(())
    }

    /// Observe, act, store the transition and, once the memory holds the
    /// warmup amount, update.
    pub fn train_step(&mut self, env: &mut dyn ThresholdEnv) -> Result<StepOutcome> {
        let state = env.observe();
        if state.v.len() != self.vector_dim {
            return Err(Error::InvalidConfig(format!(
                "agent expects vector states of length {}, environment produces {}",
                self.vector_dim,
                state.v.len()
            )));
        }
        let action = self.select_action(&state);
        let reward = env.step(action);
        self.memory.push(Transition {
            state: flatten(&state),
            action,
            reward,
            next_state: flatten(&env.observe()),
        });
        let updated = !self.in_warmup();
        if updated {
            self.update()?;
        }
        Ok(StepOutcome { action, reward, updated })
    }
}
