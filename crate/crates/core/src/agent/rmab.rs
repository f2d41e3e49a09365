//! Per-arm index learning for restless bandits.
//!
//! Each arm has its own actor, critic, target critic and memory. The actor's
//! output is the arm's index estimate, squashed into `(−M, M)`. The critic is
//! trained on activation costs drawn uniformly from `[−M, M]` and takes the
//! cost (divided by `M`) as an extra input.

use rand::seq::index::sample;
use rand::Rng;

use super::{squash, AgentConfig, UpdatePhase};
use crate::envs::rmab::{Arm, ArmKind, RmabEnv};
use crate::error::{Error, Result};
use crate::nn::{Adam, Direction, Mlp};
use crate::replay::{ReplayMemory, Transition};
use crate::rng::{self, StreamRng};
use crate::Action;

const INIT_STREAM: u64 = 1;
const REPLAY_STREAM: u64 = 2;
const LAMBDA_STREAM: u64 = 3;

/// Minibatch of one arm's transitions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmBatch {
    pub size: usize,
    pub states: Vec<f64>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
}

impl ArmBatch {
    pub fn from_transitions(batch: &[&Transition<Vec<f64>>]) -> Self {
        let mut out = ArmBatch {
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
}

/// Actor, critic, target and memory of one arm.
#[derive(Debug, Clone)]
pub struct ArmLearner {
    bound: f64,
    state_dim: usize,
    actor: Mlp,
    critic: Mlp,
    target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    memory: ReplayMemory<Vec<f64>>,
    replay_rng: StreamRng,
    lambda_rng: StreamRng,
    trace: Option<Vec<UpdatePhase>>,
}

impl ArmLearner {
    /// Learner for arm number `arm` of a run seeded with `seed`.
    pub fn new(state_dim: usize, bound: f64, config: &AgentConfig, seed: u64, arm: usize) -> Result<Self> {
        config.validate()?;
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::OutOfRange {
                what: "lambda bound",
                value: bound,
            });
        }
        let mut init = rng::arm_stream(seed, arm, INIT_STREAM);
        let actor = Mlp::new(&config.layer_sizes(state_dim, 1), &mut init)?;
        let critic = Mlp::new(&config.layer_sizes(state_dim + 1, 2), &mut init)?;
        Ok(Self {
            bound,
            state_dim,
            actor_opt: Adam::new(&actor, config.actor_lr),
            critic_opt: Adam::new(&critic, config.critic_lr),
            target: critic.clone(),
            actor,
            critic,
            memory: ReplayMemory::new(config.capacity),
            replay_rng: rng::arm_stream(seed, arm, REPLAY_STREAM),
            lambda_rng: rng::arm_stream(seed, arm, LAMBDA_STREAM),
            trace: None,
        })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    pub fn critic_mut(&mut self) -> &mut Mlp {
        &mut self.critic
    }

    pub fn target(&self) -> &Mlp {
        &self.target
    }

    pub fn memory(&self) -> &ReplayMemory<Vec<f64>> {
        &self.memory
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> Option<&[UpdatePhase]> {
        self.trace.as_deref()
    }

    fn note(&mut self, phase: UpdatePhase) {
        if let Some(t) = &mut self.trace {
            t.push(phase);
        }
    }

    /// Index estimate `M·tanh(actor(s))` for an encoded arm state.
    pub fn index(&self, state: &[f64]) -> f64 {
        self.bound * squash(self.actor.forward(state)[0])
    }

    /// Critic's `[Q_λ(s, 0), Q_λ(s, 1)]`.
    pub fn q_values(&self, lambda: f64, state: &[f64]) -> [f64; 2] {
        let mut input = Vec::with_capacity(state.len() + 1);
        input.push(lambda / self.bound);
        input.extend(state);
        let out = self.critic.forward(&input);
        [out[0], out[1]]
    }

    fn critic_inputs(&self, lambdas: &[f64], states: &[f64]) -> Vec<f64> {
        let mut inputs = Vec::with_capacity(lambdas.len() * (self.state_dim + 1));
        for (l, s) in lambdas.iter().zip(states.chunks(self.state_dim)) {
            inputs.push(l / self.bound);
            inputs.extend(s);
        }
        inputs
    }

    /// `B` costs drawn uniformly from `[−M, M]`.
    pub fn sample_lambdas(&mut self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|_| self.lambda_rng.random_range(-self.bound..=self.bound))
            .collect()
    }

    /// One descent step on the squared TD error of the net reward `r − λa`,
    /// with each sample's own cost used in both the online and target critics.
    pub fn critic_update(&mut self, batch: &ArmBatch, lambdas: &[f64], discount: f64, reward_scale: f64) -> Result<()> {
        let b = batch.size;
        assert_eq!(lambdas.len(), b, "one cost per sample");
        if let Some(&bad) = lambdas.iter().find(|l| !(l.abs() <= self.bound)) {
            return Err(Error::OutOfRange {
                what: "activation cost",
                value: bad,
            });
        }
        let next = self.target.forward_batch(&self.critic_inputs(lambdas, &batch.next_states), b);
        let acts = self.critic.forward_batch(&self.critic_inputs(lambdas, &batch.states), b);
        let q = acts.output();
        let mut output_grad = vec![0.0; 2 * b];
        for k in 0..b {
            let a = batch.actions[k];
            let net = batch.rewards[k] - lambdas[k] * a.value();
            let bootstrap = next.output()[2 * k].max(next.output()[2 * k + 1]);
            let y = reward_scale * net + discount * bootstrap;
            let i = 2 * k + a.index();
            output_grad[i] = 2.0 / b as f64 * (q[i] - y);
        }
        let grad = self.critic.backward_batch(&acts, &output_grad);
        self.critic_opt.step(&mut self.critic, &grad, Direction::Descend);
        self.note(UpdatePhase::Critic);
        Ok(())
    }

    /// One ascent step on `(1/B) Σ Δ_k ∇μ(s_k)`, where `Δ_k` is the critic's
    /// activation advantage at cost `μ(s_k)`.
    pub fn actor_update(&mut self, batch: &ArmBatch) {
        let b = batch.size;
        let acts = self.actor.forward_batch(&batch.states, b);
        let squashed: Vec<f64> = acts.output().iter().map(|&x| squash(x)).collect();
        let indices: Vec<f64> = squashed.iter().map(|t| self.bound * t).collect();
        let q = self.critic.forward_batch(&self.critic_inputs(&indices, &batch.states), b);
        let output_grad: Vec<f64> = q
            .output()
            .chunks(2)
            .zip(&squashed)
            .map(|(c, t)| (c[1] - c[0]) * self.bound * (1.0 - t * t) / b as f64)
            .collect();
        let grad = self.actor.backward_batch(&acts, &output_grad);
        self.actor_opt.step(&mut self.actor, &grad, Direction::Ascend);
        self.note(UpdatePhase::Actor);
    }

    pub fn target_update(&mut self, tau: f64) {
        self.target.soft_update(&self.critic, tau);
        self.note(UpdatePhase::Target);
    }

    /// Sample a minibatch and fresh costs, then update critic, actor and target.
    pub fn update(&mut self, config: &AgentConfig) -> Result<()> {
        let batch = {
            let sample = self.memory.sample(config.batch, &mut self.replay_rng)?;
            ArmBatch::from_transitions(&sample)
        };
        let lambdas = self.sample_lambdas(config.batch);
        self.critic_update(&batch, &lambdas, config.discount, config.reward_scale)?;
        self.actor_update(&batch);
        self.target_update(config.tau);
        Ok(())
    }

    pub fn remember(&mut self, transition: Transition<Vec<f64>>) {
        self.memory.push(transition);
    }
}

/// Index estimate of every arm in its current state.
pub fn index_values(learners: &[ArmLearner], states: &[Vec<f64>]) -> Vec<f64> {
    assert_eq!(learners.len(), states.len(), "one state per learner");
    learners.iter().zip(states).map(|(l, s)| l.index(s)).collect()
}

/// The `activate` largest values (ties to the lower arm), or with probability
/// `epsilon` a uniformly random subset of that size. Returned in ascending order.
pub fn select_arms<R: Rng + ?Sized>(values: &[f64], activate: usize, epsilon: f64, rng: &mut R) -> Result<Vec<usize>> {
    let n = values.len();
    if activate > n {
        return Err(Error::InvalidConfig(format!("cannot activate {activate} of {n} arms")));
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(random_subset(n, activate, rng));
    }
    Ok(top_arms(values, activate))
}

pub fn top_arms(values: &[f64], activate: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(activate);
    order.sort_unstable();
    order
}

pub fn random_subset<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Vec<usize> {
    let mut chosen = sample(rng, n, size).into_vec();
    chosen.sort_unstable();
    chosen
}

/// What happened in one joint step.
#[derive(Debug, Clone, PartialEq)]
pub struct RmabStep {
    pub total_reward: f64,
    pub active: Vec<usize>,
    pub updated: bool,
}

/// One learner per arm plus joint exploration.
#[derive(Debug, Clone)]
pub struct RmabAgent {
    config: AgentConfig,
    arms: Vec<Arm>,
    learners: Vec<ArmLearner>,
    explore_rng: StreamRng,
}

impl RmabAgent {
    pub fn new(arms: &[Arm], bound: f64, config: AgentConfig, seed: u64) -> Result<Self> {
        let learners = arms
            .iter()
            .enumerate()
            .map(|(i, arm)| ArmLearner::new(arm.encode(arm.first_state()).len(), bound, &config, seed, i))
            .collect::<Result<_>>()?;
        Ok(Self {
            arms: arms.to_vec(),
            learners,
            explore_rng: rng::stream(seed, rng::streams::EXPLORATION),
            config,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn learners(&self) -> &[ArmLearner] {
        &self.learners
    }

    pub fn learners_mut(&mut self) -> &mut [ArmLearner] {
        &mut self.learners
    }

    pub fn in_warmup(&self) -> bool {
        self.learners[0].memory.len() < self.config.warmup
    }

    /// Learned index of `state` on arm `arm`.
    pub fn index(&self, arm: usize, state: usize) -> f64 {
        self.learners[arm].index(&self.arms[arm].encode(state))
    }

    fn encoded(&self, states: &[usize]) -> Vec<Vec<f64>> {
        self.arms.iter().zip(states).map(|(a, &s)| a.encode(s)).collect()
    }

    /// Greedy activation set for the given arm states.
    pub fn greedy_arms(&self, states: &[usize], activate: usize) -> Vec<usize> {
        top_arms(&index_values(&self.learners, &self.encoded(states)), activate)
    }

    pub fn train_step(&mut self, env: &mut RmabEnv) -> Result<RmabStep> {
        if env.num_arms() != self.learners.len() {
            return Err(Error::InvalidConfig(format!(
                "agent has {} learners, environment has {} arms",
                self.learners.len(),
                env.num_arms()
            )));
        }
        let states = self.encoded(env.states());
        let active = if self.in_warmup() {
            random_subset(env.num_arms(), env.activate(), &mut self.explore_rng)
        } else {
            let values = index_values(&self.learners, &states);
            select_arms(&values, env.activate(), self.config.epsilon, &mut self.explore_rng)?
        };
        let actions = env.actions_for(&active)?;
        let rewards = env.step(&active)?;
        let next = self.encoded(env.states());
        for (((learner, state), next_state), (&action, &reward)) in self
            .learners
            .iter_mut()
            .zip(states)
            .zip(next)
            .zip(actions.iter().zip(&rewards))
        {
            learner.remember(Transition {
                state,
                action,
                reward,
                next_state,
            });
        }
        let updated = !self.in_warmup();
        if updated {
            for learner in &mut self.learners {
                learner.update(&self.config)?;
            }
        }
        Ok(RmabStep {
            total_reward: rewards.iter().sum(),
            active,
            updated,
        })
    }
}
