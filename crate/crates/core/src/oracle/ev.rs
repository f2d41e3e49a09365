//! Optimal control of EV charging when the price moves on a finite grid.
//!
//! States are `(price level, remaining charge, remaining time)`. The grid
//! makes the problem finite, so discounted value iteration solves it exactly.

use super::check_discount;
use crate::envs::mdp::{ev_transition, EvCharging, EvParams, PriceGrid, ThresholdEnv};
use crate::error::Result;
use crate::Action;

#[derive(Debug, Clone)]
pub struct EvPolicy {
    params: EvParams,
    levels: usize,
    actions: Vec<Action>,
    values: Vec<f64>,
    pub sweeps: usize,
}

impl EvPolicy {
    fn index(params: &EvParams, level: usize, charge: u32, deadline: u32) -> usize {
        debug_assert!(deadline >= 1 && deadline <= params.max_deadline);
        let per_level = (params.max_charge as usize + 1) * params.max_deadline as usize;
        level * per_level + charge as usize * params.max_deadline as usize + (deadline as usize - 1)
    }

    pub fn action(&self, level: usize, charge: u32, deadline: u32) -> Action {
        self.actions[Self::index(&self.params, level, charge, deadline)]
    }

    pub fn value(&self, level: usize, charge: u32, deadline: u32) -> f64 {
        self.values[Self::index(&self.params, level, charge, deadline)]
    }

    pub fn num_levels(&self) -> usize {
        self.levels
    }

    /// Action for the current state of a discretized environment.
    pub fn act(&self, env: &EvCharging) -> Action {
        let s = env.state();
        let level = env.price_level().expect("environment uses the price grid");
        self.action(level, s.charge, s.deadline)
    }
}

/// Discounted value iteration to sup-norm change below `tol`.
pub fn solve(params: &EvParams, grid: &PriceGrid, discount: f64, tol: f64) -> Result<EvPolicy> {
    check_discount(discount)?;
    let levels = grid.len();
    let charges = params.max_charge + 1;
    let deadlines = params.max_deadline;
    let size = levels * charges as usize * deadlines as usize;
    let arrivals = (params.max_charge * params.max_deadline) as f64;

    // For each level, E[V(level', c, d)] over the next price.
    let expect_next = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; size];
        for level in 0..levels {
            for c in 0..charges {
                for d in 1..=deadlines {
                    let i = EvPolicy::index(params, level, c, d);
                    out[i] = grid.transition()[level]
                        .iter()
                        .enumerate()
                        .map(|(next, p)| p * v[EvPolicy::index(params, next, c, d)])
                        .sum();
                }
            }
        }
        out
    };
    // Value after the spot empties: a fresh EV drawn uniformly.
    let arrival_value = |ev: &[f64], level: usize| -> f64 {
        let mut total = 0.0;
        for c in 1..=params.max_charge {
            for d in 1..=deadlines {
                total += ev[EvPolicy::index(params, level, c, d)];
            }
        }
        total / arrivals
    };
    let q_values = |ev: &[f64], level: usize, c: u32, d: u32| -> [f64; 2] {
        let price = grid.levels()[level];
        [Action::Passive, Action::Active].map(|a| {
            let (c2, d2, r) = ev_transition(c, d, price, a, params);
            let cont = if d2 == 0 {
                arrival_value(ev, level)
            } else {
                ev[EvPolicy::index(params, level, c2, d2)]
            };
            r + discount * cont
        })
    };

    let mut v = vec![0.0; size];
    let mut sweeps = 0;
    loop {
        let ev = expect_next(&v);
        let mut change = 0.0f64;
        for level in 0..levels {
            for c in 0..charges {
                for d in 1..=deadlines {
                    let i = EvPolicy::index(params, level, c, d);
                    let [q0, q1] = q_values(&ev, level, c, d);
                    let new = q0.max(q1);
                    change = change.max((new - v[i]).abs());
                    v[i] = new;
                }
            }
        }
        sweeps += 1;
        if change < tol {
            break;
        }
    }

    let ev = expect_next(&v);
    let mut actions = vec![Action::Passive; size];
    for level in 0..levels {
        for c in 0..charges {
            for d in 1..=deadlines {
                let [q0, q1] = q_values(&ev, level, c, d);
                actions[EvPolicy::index(params, level, c, d)] = Action::from_bool(q1 > q0);
            }
        }
    }
    Ok(EvPolicy {
        params: params.clone(),
        levels,
        actions,
        values: v,
        sweeps,
    })
}

/// Per-step rewards of `policy` on a fresh discretized environment.
pub fn simulate(policy: &EvPolicy, params: &EvParams, grid: &PriceGrid, seed: u64, steps: usize) -> Vec<f64> {
    let mut env = EvCharging::discretized(params.clone(), grid.clone(), seed);
    (0..steps)
        .map(|_| {
            let a = policy.act(&env);
            env.step(a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::mdp::OuProcess;

    #[test]
    fn optimal_policy_structure() {
        let params = EvParams::default();
        let grid = PriceGrid::tauchen(&OuProcess::default(), 21, 3.0).unwrap();
        let policy = solve(&params, &grid, 0.99, 1e-8).unwrap();
        // Charging a vehicle that is about to miss its deadline is always right.
        for level in 0..21 {
            assert_eq!(policy.action(level, 1, 1), Action::Active);
        }
        // Expensive power with plenty of slack waits.
        assert_eq!(policy.action(20, 1, 12), Action::Passive);
        // Cheap power charges.
        assert_eq!(policy.action(0, 4, 12), Action::Active);
    }
}
