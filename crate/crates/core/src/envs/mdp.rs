//! MDP environments with a scalar state `λ` and a vector state `v`.
//!
//! Each environment owns its random streams. Exogenous randomness (prices,
//! demand, arrivals) is drawn from streams that never see the agent's actions,
//! so two policies run on the same seed face the same exogenous path.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{self, streams, StreamRng};
use crate::Action;

/// State `s = (λ, v)` as seen by the agent: the scalar compared against the
/// threshold plus the encoded vector state fed to the networks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVectorState {
    pub lambda: f64,
    pub v: Vec<f64>,
}

impl ScalarVectorState {
    pub fn new(lambda: f64, v: Vec<f64>) -> Self {
        debug_assert!(lambda.is_finite() && v.iter().all(|x| x.is_finite()));
        Self { lambda, v }
    }
}

/// A continuing environment driven by binary actions.
pub trait ThresholdEnv {
    fn vector_dim(&self) -> usize;

    fn observe(&self) -> ScalarVectorState;

    /// Applies `action` to the current state and returns the reward.
    fn step(&mut self, action: Action) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MdpEnvKind {
    Ev,
    Inventory,
    Mts,
}

impl MdpEnvKind {
    pub const ALL: [MdpEnvKind; 3] = [MdpEnvKind::Ev, MdpEnvKind::Inventory, MdpEnvKind::Mts];

    pub fn name(self) -> &'static str {
        match self {
            MdpEnvKind::Ev => "ev",
            MdpEnvKind::Inventory => "inventory",
            MdpEnvKind::Mts => "mts",
        }
    }
}

impl fmt::Display for MdpEnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MdpEnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ev" => Ok(MdpEnvKind::Ev),
            "inventory" => Ok(MdpEnvKind::Inventory),
            "mts" => Ok(MdpEnvKind::Mts),
            other => Err(Error::InvalidConfig(format!(
                "unknown MDP environment {other:?} (expected ev, inventory or mts)"
            ))),
        }
    }
}

/// Environment parameters for all three MDPs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpParams {
    pub ev: EvParams,
    pub inventory: InventoryParams,
    pub mts: MtsParams,
}

pub fn make_env(kind: MdpEnvKind, params: &MdpParams, seed: u64) -> Box<dyn ThresholdEnv + Send> {
    match kind {
        MdpEnvKind::Ev => Box::new(EvCharging::new(params.ev.clone(), seed)),
        MdpEnvKind::Inventory => Box::new(Inventory::new(params.inventory.clone(), seed)),
        MdpEnvKind::Mts => Box::new(MakeToStock::new(params.mts.clone(), seed)),
    }
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck price

/// Mean-reverting price recurrence with unit time step:
/// `x' = x + θ(μ − x) + σ n`, `n ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuProcess {
    pub theta: f64,
    pub mean: f64,
    pub sigma: f64,
}

impl Default for OuProcess {
    fn default() -> Self {
        Self {
            theta: 0.15,
            mean: 0.0,
            sigma: 0.2,
        }
    }
}

impl OuProcess {
    pub fn advance(&self, x: f64, noise: f64) -> f64 {
        x + self.theta * (self.mean - x) + self.sigma * noise
    }

    pub fn step<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let noise: f64 = StandardNormal.sample(rng);
        self.advance(x, noise)
    }

    /// Standard deviation of the stationary distribution, `σ / √(1 − (1 − θ)²)`.
    pub fn stationary_std(&self) -> f64 {
        let rho = 1.0 - self.theta;
        self.sigma / (1.0 - rho * rho).sqrt()
    }
}

/// One step of the default price process.
pub fn ou_step<R: Rng + ?Sized>(x: f64, rng: &mut R) -> f64 {
    OuProcess::default().step(x, rng)
}

/// Finite-state approximation of an [`OuProcess`] (Tauchen's method): evenly
/// spaced levels covering `±width` stationary standard deviations, with
/// transition probabilities from the Gaussian one-step law.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    levels: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl PriceGrid {
    pub fn tauchen(ou: &OuProcess, count: usize, width: f64) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidConfig("price grid needs at least two levels".into()));
        }
        let spread = width * ou.stationary_std();
        let step = 2.0 * spread / (count - 1) as f64;
        let levels: Vec<f64> = (0..count).map(|j| ou.mean - spread + j as f64 * step).collect();
        let noise = Normal::new(0.0, ou.sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let transition = levels
            .iter()
            .map(|&x| {
                let centre = ou.advance(x, 0.0);
                let mut row: Vec<f64> = levels
                    .iter()
                    .enumerate()
                    .map(|(j, &y)| {
                        let hi = if j + 1 == count { 1.0 } else { noise.cdf(y + step / 2.0 - centre) };
                        let lo = if j == 0 { 0.0 } else { noise.cdf(y - step / 2.0 - centre) };
                        hi - lo
                    })
                    .collect();
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= total);
                row
            })
            .collect();
        Ok(Self { levels, transition })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn middle(&self) -> usize {
        self.levels.len() / 2
    }

    pub fn next_level<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, p) in self.transition[level].iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        self.levels.len() - 1
    }
}

// ---------------------------------------------------------------------------
// EV charging

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvParams {
    pub price: OuProcess,
    pub max_charge: u32,
    pub max_deadline: u32,
    /// Missed-demand penalty `coef · C²`.
    pub penalty_coef: f64,
}

impl Default for EvParams {
    fn default() -> Self {
        Self {
            price: OuProcess::default(),
            max_charge: 8,
            max_deadline: 12,
            penalty_coef: 0.2,
        }
    }
}

impl EvParams {
    pub fn penalty(&self, remaining: u32) -> f64 {
        self.penalty_coef * (remaining as f64).powi(2)
    }

    pub fn encode(&self, state: &EvState) -> ScalarVectorState {
        ScalarVectorState::new(
            state.price,
            vec![
                state.charge as f64 / self.max_charge as f64,
                state.deadline as f64 / self.max_deadline as f64,
            ],
        )
    }

    fn arrival<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        (rng.random_range(1..=self.max_charge), rng.random_range(1..=self.max_deadline))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvState {
    pub price: f64,
    pub charge: u32,
    pub deadline: u32,
}

/// Deterministic part of an EV step: charging, the deadline countdown and the
/// missed-demand penalty. Returns `(charge', deadline', reward)`; a returned
/// deadline of 0 means the spot is empty and a new EV must be drawn.
pub fn ev_transition(charge: u32, deadline: u32, price: f64, action: Action, params: &EvParams) -> (u32, u32, f64) {
    let charging = action.is_active() && charge > 0;
    let mut reward = if charging { 1.0 - price } else { 0.0 };
    let charge = if charging { charge - 1 } else { charge };
    let deadline = deadline.saturating_sub(1);
    if deadline == 0 && charge > 0 {
        reward -= params.penalty(charge);
    }
    (charge, deadline, reward)
}

/// One EV charging step using a single random stream for both the price and
/// a possible new arrival.
pub fn ev_step<R: Rng + ?Sized>(state: &EvState, action: Action, params: &EvParams, rng: &mut R) -> (EvState, f64) {
    let (mut charge, mut deadline, reward) = ev_transition(state.charge, state.deadline, state.price, action, params);
    if deadline == 0 {
        (charge, deadline) = params.arrival(rng);
    }
    let price = params.price.step(state.price, rng);
    (EvState { price, charge, deadline }, reward)
}

#[derive(Debug, Clone)]
enum PriceModel {
    Continuous,
    Grid { grid: PriceGrid, level: usize },
}

/// EV charging station serving one vehicle at a time.
#[derive(Debug, Clone)]
pub struct EvCharging {
    params: EvParams,
    prices: PriceModel,
    state: EvState,
    price_rng: StreamRng,
    arrival_rng: StreamRng,
}

impl EvCharging {
    pub fn new(params: EvParams, seed: u64) -> Self {
        Self::with_prices(params, PriceModel::Continuous, seed)
    }

    /// Variant whose price moves on a finite grid, starting at the middle level.
    pub fn discretized(params: EvParams, grid: PriceGrid, seed: u64) -> Self {
        let level = grid.middle();
        Self::with_prices(params, PriceModel::Grid { grid, level }, seed)
    }

    fn with_prices(params: EvParams, prices: PriceModel, seed: u64) -> Self {
        let mut arrival_rng = rng::stream(seed, streams::ENV_AUX);
        let (charge, deadline) = params.arrival(&mut arrival_rng);
        let price = match &prices {
            PriceModel::Continuous => params.price.mean,
            PriceModel::Grid { grid, level } => grid.levels()[*level],
        };
        Self {
            params,
            prices,
            state: EvState { price, charge, deadline },
            price_rng: rng::stream(seed, streams::ENV),
            arrival_rng,
        }
    }

    pub fn state(&self) -> EvState {
        self.state
    }

    pub fn params(&self) -> &EvParams {
        &self.params
    }

    /// Current grid level of a discretized variant.
    pub fn price_level(&self) -> Option<usize> {
        match self.prices {
            PriceModel::Continuous => None,
            PriceModel::Grid { level, .. } => Some(level),
        }
    }
}

impl ThresholdEnv for EvCharging {
    fn vector_dim(&self) -> usize {
        2
    }

    fn observe(&self) -> ScalarVectorState {
        self.params.encode(&self.state)
    }

    fn step(&mut self, action: Action) -> f64 {
        let s = self.state;
        let (mut charge, mut deadline, reward) = ev_transition(s.charge, s.deadline, s.price, action, &self.params);
        if deadline == 0 {
            (charge, deadline) = self.params.arrival(&mut self.arrival_rng);
        }
        let price = match &mut self.prices {
            PriceModel::Continuous => self.params.price.step(s.price, &mut self.price_rng),
            PriceModel::Grid { grid, level } => {
                *level = grid.next_level(*level, &mut self.price_rng);
                grid.levels()[*level]
            }
        };
        self.state = EvState { price, charge, deadline };
        reward
    }
}

// ---------------------------------------------------------------------------
// Inventory management

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InventoryParams {
    pub capacity: u32,
    pub bulk: u32,
    pub price: f64,
    /// Cost per unsold item per step.
    pub holding_cost: f64,
    pub demand_scale: f64,
    pub seasons: u32,
}

impl Default for InventoryParams {
    fn default() -> Self {
        Self {
            capacity: 1000,
            bulk: 500,
            price: 20.0,
            holding_cost: 1.0,
            demand_scale: 300.0,
            seasons: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InventoryState {
    pub inventory: u32,
    pub season: u32,
}

impl InventoryParams {
    /// Poisson demand mean `sin(bπ / seasons) · scale` of season `b`.
    pub fn demand_rate(&self, season: u32) -> Result<f64> {
        if season >= self.seasons {
            return Err(Error::OutOfRange {
                what: "season",
                value: season as f64,
            });
        }
        Ok((season as f64 * PI / self.seasons as f64).sin() * self.demand_scale)
    }

    pub fn encode(&self, state: &InventoryState) -> ScalarVectorState {
        let mut v = vec![0.0; self.seasons as usize];
        v[state.season as usize] = 1.0;
        ScalarVectorState::new(state.inventory as f64 / self.capacity as f64, v)
    }

    fn sample_demand<R: Rng + ?Sized>(&self, season: u32, rng: &mut R) -> u32 {
        let rate = self.demand_rate(season).expect("season within range");
        if rate <= 0.0 {
            return 0;
        }
        Poisson::new(rate).expect("positive finite rate").sample(rng) as u32
    }
}

/// Demand mean of season `b` under the default parameters.
pub fn inventory_demand_rate(season: u32) -> Result<f64> {
    InventoryParams::default().demand_rate(season)
}

/// Inventory step for a known demand: sell what is possible, pay holding on
/// what is left, and receive the order (if any) in time for the next step.
pub fn inventory_transition(
    state: &InventoryState,
    action: Action,
    demand: u32,
    params: &InventoryParams,
) -> (InventoryState, f64) {
    let sold = state.inventory.min(demand);
    let unsold = state.inventory - sold;
    let reward = params.price * sold as f64 - params.holding_cost * unsold as f64;
    let ordered = if action.is_active() { params.bulk } else { 0 };
    let next = InventoryState {
        inventory: (unsold + ordered).min(params.capacity),
        season: (state.season + 1) % params.seasons,
    };
    (next, reward)
}

pub fn inventory_step<R: Rng + ?Sized>(
    state: &InventoryState,
    action: Action,
    params: &InventoryParams,
    rng: &mut R,
) -> (InventoryState, f64) {
    let demand = params.sample_demand(state.season, rng);
    inventory_transition(state, action, demand, params)
}

#[derive(Debug, Clone)]
pub struct Inventory {
    params: InventoryParams,
    state: InventoryState,
    demand_rng: StreamRng,
}

impl Inventory {
    pub fn new(params: InventoryParams, seed: u64) -> Self {
        Self {
            params,
            state: InventoryState { inventory: 0, season: 0 },
            demand_rng: rng::stream(seed, streams::ENV),
        }
    }

    pub fn state(&self) -> InventoryState {
        self.state
    }
}

impl ThresholdEnv for Inventory {
    fn vector_dim(&self) -> usize {
        self.params.seasons as usize
    }

    fn observe(&self) -> ScalarVectorState {
        self.params.encode(&self.state)
    }

    fn step(&mut self, action: Action) -> f64 {
        let (next, reward) = inventory_step(&self.state, action, &self.params, &mut self.demand_rng);
        self.state = next;
        reward
    }
}

// ---------------------------------------------------------------------------
// Make-to-stock production

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MtsParams {
    pub servers: u32,
    pub buffer: u32,
    pub classes: u32,
    /// Per-step completion probability of a busy server.
    pub completion_prob: f64,
    pub reward_high: f64,
    pub reward_low: f64,
    /// Holding cost `coef · λ²`.
    pub holding_coef: f64,
}

impl Default for MtsParams {
    fn default() -> Self {
        Self {
            servers: 50,
            buffer: 50,
            classes: 50,
            completion_prob: 0.25,
            reward_high: 200.0,
            reward_low: 10.0,
            holding_coef: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MtsState {
    pub queue: u32,
    /// Class of the arriving order, 1-based.
    pub class: u32,
}

impl MtsParams {
    pub fn max_queue(&self) -> u32 {
        self.servers + self.buffer
    }

    /// Order value `R_v`, evenly spaced from `reward_high` (class 1) down to
    /// `reward_low` (last class).
    pub fn class_reward(&self, class: u32) -> f64 {
        debug_assert!((1..=self.classes).contains(&class));
        if self.classes == 1 {
            return self.reward_high;
        }
        let spacing = (self.reward_high - self.reward_low) / (self.classes - 1) as f64;
        self.reward_high - (class - 1) as f64 * spacing
    }

    pub fn holding(&self, queue: u32) -> f64 {
        self.holding_coef * (queue as f64).powi(2)
    }

    pub fn encode(&self, state: &MtsState) -> ScalarVectorState {
        ScalarVectorState::new(
            state.queue as f64 / self.max_queue() as f64,
            vec![self.class_reward(state.class) / self.reward_high],
        )
    }
}

/// Admission part of a make-to-stock step: returns the queue after admission
/// and the step reward.
pub fn mts_admit(state: &MtsState, action: Action, params: &MtsParams) -> (u32, f64) {
    let holding = params.holding(state.queue);
    if action.is_active() && state.queue < params.max_queue() {
        (state.queue + 1, params.class_reward(state.class) - holding)
    } else {
        (state.queue, -holding)
    }
}

pub fn mts_step<R: Rng + ?Sized>(state: &MtsState, action: Action, params: &MtsParams, rng: &mut R) -> (MtsState, f64) {
    let (queue, reward) = mts_admit(state, action, params);
    let busy = queue.min(params.servers);
    let done = if busy == 0 {
        0
    } else {
        Binomial::new(busy as u64, params.completion_prob)
            .expect("valid completion probability")
            .sample(rng) as u32
    };
    let next = MtsState {
        queue: queue - done,
        class: rng.random_range(1..=params.classes),
    };
    (next, reward)
}

#[derive(Debug, Clone)]
pub struct MakeToStock {
    params: MtsParams,
    state: MtsState,
    rng: StreamRng,
}

impl MakeToStock {
    pub fn new(params: MtsParams, seed: u64) -> Self {
        let mut rng = rng::stream(seed, streams::ENV);
        let class = rng.random_range(1..=params.classes);
        Self {
            params,
            state: MtsState { queue: 0, class },
            rng,
        }
    }

    pub fn state(&self) -> MtsState {
        self.state
    }
}

impl ThresholdEnv for MakeToStock {
    fn vector_dim(&self) -> usize {
        1
    }

    fn observe(&self) -> ScalarVectorState {
        self.params.encode(&self.state)
    }

    fn step(&mut self, action: Action) -> f64 {
        let (next, reward) = mts_step(&self.state, action, &self.params, &mut self.rng);
        self.state = next;
        reward
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ou_drift_and_diffusion() {
        let ou = OuProcess::default();
        assert_eq!(ou.advance(0.0, 0.0), 0.0);
        assert!((ou.advance(1.0, 0.0) - 0.85).abs() < 1e-15);
        assert!((ou.advance(0.0, 1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ev_charging_step() {
        let p = EvParams::default();
        let (c, d, r) = ev_transition(3, 5, 0.3, Action::Active, &p);
        assert_eq!((c, d), (2, 4));
        assert!((r - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ev_no_penalty_when_demand_met() {
        let p = EvParams::default();
        assert_eq!(ev_transition(0, 2, 0.3, Action::Passive, &p), (0, 1, 0.0));
        assert_eq!(ev_transition(0, 1, 0.3, Action::Passive, &p), (0, 0, 0.0));
        // Charging an already satisfied EV earns nothing.
        assert_eq!(ev_transition(0, 4, 0.3, Action::Active, &p), (0, 3, 0.0));
    }

    #[test]
    fn ev_missed_deadline_penalty_and_arrival() {
        let p = EvParams::default();
        let (c, d, r) = ev_transition(2, 1, 0.3, Action::Passive, &p);
        assert_eq!((c, d), (2, 0));
        assert!((r + 0.8).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = EvState {
            price: 0.3,
            charge: 2,
            deadline: 1,
        };
        let (next, r) = ev_step(&s, Action::Passive, &p, &mut rng);
        assert!((r + 0.8).abs() < 1e-15);
        assert!((1..=8).contains(&next.charge));
        assert!((1..=12).contains(&next.deadline));
    }

    #[test]
    fn demand_rates() {
        assert_eq!(inventory_demand_rate(0).unwrap(), 0.0);
        assert!((inventory_demand_rate(5).unwrap() - 300.0).abs() < 1e-12);
        assert!((inventory_demand_rate(1).unwrap() - 92.705).abs() < 1e-3);
        assert!(inventory_demand_rate(10).is_err());
    }

    #[test]
    fn inventory_transitions() {
        let p = InventoryParams::default();
        let s = InventoryState {
            inventory: 400,
            season: 3,
        };
        let (next, r) = inventory_transition(&s, Action::Passive, 300, &p);
        assert_eq!(r, 5900.0);
        assert_eq!(next.inventory, 100);
        assert_eq!(next.season, 4);

        let empty = InventoryState { inventory: 0, season: 9 };
        let (next, r) = inventory_transition(&empty, Action::Active, 250, &p);
        assert_eq!(r, 0.0);
        assert_eq!(next, InventoryState { inventory: 500, season: 0 });

        let full = InventoryState {
            inventory: 1000,
            season: 0,
        };
        let (next, r) = inventory_transition(&full, Action::Active, 0, &p);
        assert_eq!(r, -1000.0);
        assert_eq!(next.inventory, 1000);
    }

    #[test]
    fn mts_rewards() {
        let p = MtsParams::default();
        assert_eq!(p.class_reward(1), 200.0);
        assert!((p.class_reward(50) - 10.0).abs() < 1e-12);

        let (q, r) = mts_admit(&MtsState { queue: 0, class: 1 }, Action::Active, &p);
        assert_eq!((q, r), (1, 200.0));
        let (q, r) = mts_admit(&MtsState { queue: 100, class: 1 }, Action::Active, &p);
        assert_eq!((q, r), (100, -1000.0));
        let (q, r) = mts_admit(&MtsState { queue: 10, class: 3 }, Action::Passive, &p);
        assert_eq!((q, r), (10, -10.0));
    }

    #[test]
    fn encodings() {
        let ev = EvParams::default().encode(&EvState {
            price: -0.2,
            charge: 4,
            deadline: 6,
        });
        assert_eq!(ev, ScalarVectorState::new(-0.2, vec![0.5, 0.5]));
        let inv = InventoryParams::default().encode(&InventoryState {
            inventory: 250,
            season: 2,
        });
        assert_eq!(inv.lambda, 0.25);
        assert_eq!(inv.v.iter().sum::<f64>(), 1.0);
        assert_eq!(inv.v[2], 1.0);
        let mts = MtsParams::default().encode(&MtsState { queue: 50, class: 1 });
        assert_eq!(mts, ScalarVectorState::new(0.5, vec![1.0]));
    }

    #[test]
    fn price_grid_is_stochastic_and_symmetric() {
        let grid = PriceGrid::tauchen(&OuProcess::default(), 21, 3.0).unwrap();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid.middle(), 10);
        assert!(grid.levels()[10].abs() < 1e-12);
        for row in grid.transition() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let t = grid.transition();
        assert!((t[3][5] - t[17][15]).abs() < 1e-12);
    }

    #[test]
    fn env_kind_parsing() {
        assert_eq!("ev".parse::<MdpEnvKind>().unwrap(), MdpEnvKind::Ev);
        assert_eq!("mts".parse::<MdpEnvKind>().unwrap(), MdpEnvKind::Mts);
        assert!("onedim".parse::<MdpEnvKind>().is_err());
    }
}
