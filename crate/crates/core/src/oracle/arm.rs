//! Single bandit arms facing a fixed activation cost `λ`: net reward
//! `r(s, a) − λa`.

use rand::Rng;

use super::family::random_rows;
use super::{check_discount, check_distinct, check_stochastic, Resolvent};
use crate::error::{Error, Result};
use crate::Action;

/// Sup-norm tolerance of [`value_iteration`].
pub const VALUE_ITERATION_TOL: f64 = 1e-10;
/// Number of evenly spaced costs scanned to bracket each index.
pub const PRESCAN_POINTS: usize = 512;
/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-12;

/// Exact tables of an arm; states are `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    /// `transition[a][s][s']`.
    pub transition: [Vec<Vec<f64>>; 2],
    /// `reward[a][s]`.
    pub reward: [Vec<f64>; 2],
}

/// Optimal or policy action values for one cost, indexed `[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionValues {
    pub q: Vec<[f64; 2]>,
}

impl ActionValues {
    pub fn advantage(&self, s: usize) -> f64 {
        self.q[s][1] - self.q[s][0]
    }

    pub fn greedy(&self) -> Vec<Action> {
        self.q.iter().map(|q| Action::from_bool(q[1] > q[0])).collect()
    }
}

/// Result of [`value_iteration`], with the sup-norm change of every sweep.
#[derive(Debug, Clone)]
pub struct ValueIteration {
    pub values: ActionValues,
    pub residuals: Vec<f64>,
}

impl ArmModel {
    pub fn zeros(n: usize) -> Self {
        Self {
            transition: [vec![vec![0.0; n]; n], vec![vec![0.0; n]; n]],
            reward: [vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn num_states(&self) -> usize {
        self.reward[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_states();
        for rows in &self.transition {
            check_stochastic(rows, n)?;
        }
        if self.reward[1].len() != n {
            return Err(Error::InvalidConfig("one reward per state and action required".into()));
        }
        Ok(())
    }

    fn backup(&self, s: usize, a: usize, lambda: f64, discount: f64, v: &[f64]) -> f64 {
        let next: f64 = self.transition[a][s].iter().zip(v).map(|(p, x)| p * x).sum();
        self.reward[a][s] - lambda * a as f64 + discount * next
    }

    fn q_from_values(&self, lambda: f64, discount: f64, v: &[f64]) -> ActionValues {
        let q = (0..self.num_states())
            .map(|s| [self.backup(s, 0, lambda, discount, v), self.backup(s, 1, lambda, discount, v)])
            .collect();
        ActionValues { q }
    }

    /// Values of a fixed policy at cost `lambda`.
    pub fn evaluate_policy(&self, policy: &[Action], lambda: f64, discount: f64) -> Result<ActionValues> {
        let (net, rows) = self.policy_tables(policy, lambda);
        let v = Resolvent::new(&rows, discount)?.solve(&net)?;
        Ok(self.q_from_values(lambda, discount, &v))
    }

    fn policy_tables(&self, policy: &[Action], lambda: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let net = policy
            .iter()
            .enumerate()
            .map(|(s, a)| self.reward[a.index()][s] - lambda * a.value())
            .collect();
        let rows = policy
            .iter()
            .enumerate()
            .map(|(s, a)| self.transition[a.index()][s].clone())
            .collect();
        (net, rows)
    }
}

/// Optimal action values by value iteration to sup-norm change below `tol`.
pub fn value_iteration(model: &ArmModel, lambda: f64, discount: f64, tol: f64) -> Result<ValueIteration> {
    check_discount(discount)?;
    let n = model.num_states();
    let mut v = vec![0.0; n];
    let mut residuals = Vec::new();
    loop {
        let next: Vec<f64> = (0..n)
            .map(|s| {
                model
                    .backup(s, 0, lambda, discount, &v)
                    .max(model.backup(s, 1, lambda, discount, &v))
            })
            .collect();
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        residuals.push(change);
        v = next;
        if change < tol {
            break;
        }
    }
    Ok(ValueIteration {
        values: model.q_from_values(lambda, discount, &v),
        residuals,
    })
}

/// Optimal action values by policy iteration, optionally warm-started.
/// Ties keep the incumbent action, so the iteration terminates.
pub fn policy_iteration(
    model: &ArmModel,
    lambda: f64,
    discount: f64,
    start: Option<&[Action]>,
) -> Result<(ActionValues, Vec<Action>)> {
    check_discount(discount)?;
    let n = model.num_states();
    let mut policy = start.map_or_else(|| vec![Action::Passive; n], <[Action]>::to_vec);
    for _ in 0..10 * n + 100 {
        let q = model.evaluate_policy(&policy, lambda, discount)?;
        let mut changed = false;
        for (s, a) in policy.iter_mut().enumerate() {
            let [q0, q1] = q.q[s];
            let scale = 1.0 + q0.abs().max(q1.abs());
            let better = match a {
                Action::Passive => q1 > q0 + 1e-13 * scale,
                Action::Active => q0 > q1 + 1e-13 * scale,
            };
            if better {
                *a = if a.is_active() { Action::Passive } else { Action::Active };
                changed = true;
            }
        }
        if !changed {
            return Ok((q, policy));
        }
    }
    Err(Error::InvalidConfig("policy iteration did not converge".into()))
}

/// Activation advantages `Q_λ(s, 1) − Q_λ(s, 0)` of all states at one cost.
fn advantages(model: &ArmModel, lambda: f64, discount: f64, warm: &mut Option<Vec<Action>>) -> Result<Vec<f64>> {
    let (q, policy) = policy_iteration(model, lambda, discount, warm.as_deref())?;
    *warm = Some(policy);
    Ok((0..model.num_states()).map(|s| q.advantage(s)).collect())
}

/// Whittle indices of every state: for each state the cost in `[−M, M]` at
/// which activation and passivity are equally good. A scan over
/// [`PRESCAN_POINTS`] costs brackets the crossing, then bisection refines it.
pub fn whittle_indices(model: &ArmModel, discount: f64, bound: f64) -> Result<Vec<f64>> {
    model.validate()?;
    check_discount(discount)?;
    let n = model.num_states();
    let grid: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|j| -bound + 2.0 * bound * j as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    let mut warm = None;
    let scan: Vec<Vec<f64>> = grid
        .iter()
        .map(|&l| advantages(model, l, discount, &mut warm))
        .collect::<Result<_>>()?;
    (0..n)
        .map(|s| {
            let j = (0..PRESCAN_POINTS - 1)
                .find(|&j| scan[j][s] >= 0.0 && scan[j + 1][s] <= 0.0)
                .ok_or(Error::NoCrossing { state: s, bound })?;
            bisect(model, discount, s, grid[j], grid[j + 1])
        })
        .collect()
}

/// Whittle index of one state.
pub fn whittle_index(model: &ArmModel, discount: f64, state: usize, bound: f64) -> Result<f64> {
    let all = whittle_indices(model, discount, bound)?;
    all.get(state).copied().ok_or(Error::OutOfRange {
        what: "arm state",
        value: state as f64,
    })
}

fn bisect(model: &ArmModel, discount: f64, s: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut warm = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < BISECTION_WIDTH {
            return Ok(mid);
        }
        let d = advantages(model, mid, discount, &mut warm)?[s];
        if d == 0.0 {
            return Ok(mid);
        }
        if d > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Objective and exact gradient of a per-state threshold vector on an arm.
#[derive(Debug, Clone)]
pub struct ArmObjective {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Exact `Σ_s ∫_{−M}^{M} V_λ(s) dλ` of the threshold policy
/// `a = 𝟙(μ(s) > λ)` and its derivative in each `μ(s)`.
///
/// Between consecutive sorted thresholds the policy is fixed, so values are
/// affine in the cost and integrate exactly. Raising `μ(s)` past `λ` switches
/// `s` from passive to active; by the policy-difference identity the total
/// value changes at rate `1ᵀ(I − γP₁)⁻¹e_s · Δ₀(s)`, where `P₁` is the policy
/// with `s` active and `Δ₀(s)` is the activation advantage of the policy with
/// `s` passive, both at `λ = μ(s)`.
pub fn threshold_objective(model: &ArmModel, mu: &[f64], discount: f64, bound: f64) -> Result<ArmObjective> {
    model.validate()?;
    check_discount(discount)?;
    let n = model.num_states();
    if mu.len() != n {
        return Err(Error::InvalidConfig(format!("expected {n} thresholds, got {}", mu.len())));
    }
    if let Some(&bad) = mu.iter().find(|m| !(m.abs() <= bound)) {
        return Err(Error::OutOfRange {
            what: "threshold",
            value: bad,
        });
    }
    check_distinct(mu)?;

    let mut cuts: Vec<f64> = mu.to_vec();
    cuts.push(-bound);
    cuts.push(bound);
    cuts.sort_by(f64::total_cmp);
    let mut value = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let policy: Vec<Action> = mu.iter().map(|&m| Action::from_bool(m >= hi)).collect();
        let rows: Vec<Vec<f64>> = (0..n).map(|s| model.transition[policy[s].index()][s].clone()).collect();
        let resolvent = Resolvent::new(&rows, discount)?;
        let base: Vec<f64> = (0..n).map(|s| model.reward[policy[s].index()][s]).collect();
        let cost: Vec<f64> = policy.iter().map(|a| -a.value()).collect();
        let intercept: f64 = resolvent.solve(&base)?.iter().sum();
        let slope: f64 = resolvent.solve(&cost)?.iter().sum();
        value += intercept * (hi - lo) + slope * (hi * hi - lo * lo) / 2.0;
    }

    let ones = vec![1.0; n];
    let gradient = (0..n)
        .map(|s| {
            let lambda = mu[s];
            let mut passive: Vec<Action> = mu.iter().map(|&m| Action::from_bool(m > lambda)).collect();
            passive[s] = Action::Passive;
            let delta = model.evaluate_policy(&passive, lambda, discount)?.advantage(s);
            let mut active = passive;
            active[s] = Action::Active;
            let rows: Vec<Vec<f64>> = (0..n).map(|u| model.transition[active[u].index()][u].clone()).collect();
            let mass = Resolvent::new(&rows, discount)?.solve_left(&ones)?[s];
            Ok(mass * delta)
        })
        .collect::<Result<_>>()?;
    Ok(ArmObjective { value, gradient })
}

/// Random arm with rewards uniform on `[0, 1]`.
pub fn random_arm<R: Rng + ?Sized>(states: usize, rng: &mut R) -> ArmModel {
    ArmModel {
        transition: [random_rows(states, rng), random_rows(states, rng)],
        reward: [
            (0..states).map(|_| rng.random()).collect(),
            (0..states).map(|_| rng.random()).collect(),
        ],
    }
}

/// Whether every state's optimal passive set grows with the cost across the
/// scan grid and every index lies inside `[−M, M]`.
pub fn is_indexable(model: &ArmModel, discount: f64, bound: f64) -> Result<bool> {
    let mut warm = None;
    let mut previous: Option<Vec<bool>> = None;
    for j in 0..PRESCAN_POINTS {
        let lambda = -bound + 2.0 * bound * j as f64 / (PRESCAN_POINTS - 1) as f64;
        let adv = advantages(model, lambda, discount, &mut warm)?;
        let passive: Vec<bool> = adv.iter().map(|&d| d < 0.0).collect();
        if j == 0 && passive.iter().any(|&p| p) {
            return Ok(false);
        }
        if let Some(prev) = &previous {
            if prev.iter().zip(&passive).any(|(&was, &now)| was && !now) {
                return Ok(false);
            }
        }
        previous = Some(passive);
    }
    Ok(previous.is_some_and(|p| p.iter().all(|&x| x)))
}

/// Random arm accepted by [`is_indexable`].
pub fn random_indexable_arm<R: Rng + ?Sized>(states: usize, discount: f64, bound: f64, rng: &mut R) -> Result<ArmModel> {
    loop {
        let arm = random_arm(states, rng);
        if is_indexable(&arm, discount, bound)? {
            return Ok(arm);
        }
    }
}
