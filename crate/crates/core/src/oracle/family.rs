//! MDPs whose scalar state is redrawn uniformly on `[−M, M]` every step,
//! independently of the vector state and the action. Rewards are affine in
//! the scalar, so every integral over it has a closed form.

use rand::Rng;

use super::{check_discount, check_distinct, check_stochastic, Resolvent};
use crate::error::{Error, Result};
use crate::Action;

/// Reward `intercept + slope · λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineReward {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineReward {
    pub fn at(&self, lambda: f64) -> f64 {
        self.intercept + self.slope * lambda
    }

    /// `∫_lo^hi (intercept + slope λ) dλ`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.intercept * (hi - lo) + self.slope * (hi * hi - lo * lo) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformLambdaFamily {
    /// `transition[a][v][v']`.
    pub transition: [Vec<Vec<f64>>; 2],
    /// `reward[a][v]`.
    pub reward: [Vec<AffineReward>; 2],
    pub bound: f64,
    pub discount: f64,
}

/// Values of a threshold policy on a [`UniformLambdaFamily`].
#[derive(Debug, Clone)]
pub struct ThresholdEvaluation<'a> {
    family: &'a UniformLambdaFamily,
    /// Expected value of each vector state, averaged over the scalar.
    pub values: Vec<f64>,
}

impl ThresholdEvaluation<'_> {
    /// `r̄(λ, v, a) + γ Σ_v' P(v'|v, a) W(v')`.
    pub fn q(&self, lambda: f64, v: usize, action: Action) -> f64 {
        let a = action.index();
        let f = self.family;
        let next: f64 = f.transition[a][v].iter().zip(&self.values).map(|(p, w)| p * w).sum();
        f.reward[a][v].at(lambda) + f.discount * next
    }

    pub fn advantage(&self, lambda: f64, v: usize) -> f64 {
        self.q(lambda, v, Action::Active) - self.q(lambda, v, Action::Passive)
    }
}

impl UniformLambdaFamily {
    pub fn num_states(&self) -> usize {
        self.transition[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_states();
        for rows in &self.transition {
            check_stochastic(rows, n)?;
        }
        if self.reward.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig("one reward per state and action required".into()));
        }
        check_discount(self.discount)?;
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::OutOfRange {
                what: "lambda bound",
                value: self.bound,
            });
        }
        Ok(())
    }

    fn check_thresholds(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.num_states() {
            return Err(Error::InvalidConfig(format!(
                "expected {} thresholds, got {}",
                self.num_states(),
                mu.len()
            )));
        }
        if let Some(&bad) = mu.iter().find(|m| !(m.abs() <= self.bound)) {
            return Err(Error::OutOfRange {
                what: "threshold",
                value: bad,
            });
        }
        Ok(())
    }

    /// Scalar-averaged reward and transition matrix of the threshold policy.
    fn averaged(&self, mu: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let m = self.bound;
        let width = 2.0 * m;
        let n = self.num_states();
        let mut reward = vec![0.0; n];
        let mut transition = vec![vec![0.0; n]; n];
        for v in 0..n {
            // Active on [−M, μ), passive on [μ, M].
            let p1 = (mu[v] + m) / width;
            reward[v] = (self.reward[1][v].integral(-m, mu[v]) + self.reward[0][v].integral(mu[v], m)) / width;
            for (u, t) in transition[v].iter_mut().enumerate() {
                *t = p1 * self.transition[1][v][u] + (1.0 - p1) * self.transition[0][v][u];
            }
        }
        (reward, transition)
    }

    pub fn policy_eval(&self, mu: &[f64]) -> Result<ThresholdEvaluation<'_>> {
        self.check_thresholds(mu)?;
        let (reward, transition) = self.averaged(mu);
        let values = Resolvent::new(&transition, self.discount)?.solve(&reward)?;
        Ok(ThresholdEvaluation { family: self, values })
    }

    /// `Σ_v ∫_{−M}^{M} Q(λ, v, π(λ, v)) dλ = 2M Σ_v W(v)`.
    pub fn objective(&self, mu: &[f64]) -> Result<f64> {
        let eval = self.policy_eval(mu)?;
        Ok(2.0 * self.bound * eval.values.iter().sum::<f64>())
    }

    /// Exact derivative of [`Self::objective`] with respect to each threshold:
    /// the discounted visit mass of `v` from a uniform start, scaled to the
    /// objective's normalization, times the advantage at `λ = μ(v)`.
    pub fn gradient(&self, mu: &[f64]) -> Result<Vec<f64>> {
        check_distinct(mu)?;
        self.check_thresholds(mu)?;
        let n = self.num_states();
        let (reward, transition) = self.averaged(mu);
        let resolvent = Resolvent::new(&transition, self.discount)?;
        let values = resolvent.solve(&reward)?;
        let eval = ThresholdEvaluation { family: self, values };
        let visits = resolvent.solve_left(&vec![1.0; n])?;
        Ok((0..n).map(|v| visits[v] * eval.advantage(mu[v], v)).collect())
    }

    /// Random instance: rows from normalized uniforms, reward coefficients
    /// uniform on `[−1, 1]`.
    pub fn random<R: Rng + ?Sized>(states: usize, discount: f64, bound: f64, rng: &mut R) -> Self {
        let transition = [random_rows(states, rng), random_rows(states, rng)];
        let mut coef = || AffineReward {
            intercept: rng.random_range(-1.0..=1.0),
            slope: rng.random_range(-1.0..=1.0),
        };
        let reward = [
            (0..states).map(|_| coef()).collect(),
            (0..states).map(|_| coef()).collect(),
        ];
        Self {
            transition,
            reward,
            bound,
            discount,
        }
    }
}

pub(crate) fn random_rows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        })
        .collect()
}

/// Thresholds uniform on `[−0.9M, 0.9M]`, redrawn until every pair is at
/// least `gap` apart.
pub fn random_thresholds<R: Rng + ?Sized>(count: usize, bound: f64, gap: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let mu: Vec<f64> = (0..count)
            .map(|_| rng.random_range(-0.9 * bound..=0.9 * bound))
            .collect();
        let separated = mu
            .iter()
            .enumerate()
            .all(|(i, a)| mu[..i].iter().all(|b| (a - b).abs() >= gap));
        if separated {
            return mu;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One state, activation costs λ, no passive reward.
    fn single_state(discount: f64) -> UniformLambdaFamily {
        UniformLambdaFamily {
            transition: [vec![vec![1.0]], vec![vec![1.0]]],
            reward: [
                vec![AffineReward {
                    intercept: 0.0,
                    slope: 0.0,
                }],
                vec![AffineReward {
                    intercept: 0.0,
                    slope: -1.0,
                }],
            ],
            bound: 1.0,
            discount,
        }
    }

    #[test]
    fn single_state_closed_forms() {
        let f = single_state(0.9);
        let eval = f.policy_eval(&[0.0]).unwrap();
        assert!((eval.values[0] - 2.5).abs() < 1e-12);
        assert!((f.objective(&[0.0]).unwrap() - 5.0).abs() < 1e-12);
        assert!(f.gradient(&[0.0]).unwrap()[0].abs() < 1e-12);
        let g = f.gradient(&[0.4]).unwrap()[0];
        assert!((g + 4.0).abs() < 1e-10);
    }

    #[test]
    fn myopic_gradient() {
        let f = single_state(0.0);
        assert!((f.gradient(&[0.3]).unwrap()[0] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn never_activating_earns_nothing() {
        let mut f = single_state(0.9);
        f.reward[1][0] = AffineReward {
            intercept: 1.0,
            slope: 0.0,
        };
        assert_eq!(f.objective(&[-1.0]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_thresholds() {
        let f = single_state(0.5);
        assert!(f.policy_eval(&[1.5]).is_err());
        assert!(f.policy_eval(&[0.0, 0.1]).is_err());
    }
}
