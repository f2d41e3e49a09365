//! Finite-difference comparisons of the exact threshold gradients.

use rand::Rng;
use serde::Serialize;

use super::arm::{random_arm, threshold_objective};
use super::family::{random_thresholds, UniformLambdaFamily};
use crate::error::Result;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Smallest gap between thresholds of a random case.
pub const THRESHOLD_GAP: f64 = 1e-3;
/// Below this gradient magnitude the comparison is absolute.
pub const SMALL_GRADIENT: f64 = 1e-5;
pub const MAX_RELATIVE_ERROR: f64 = 1e-3;
pub const MAX_ABSOLUTE_ERROR: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub cases: usize,
    pub coordinates: usize,
    pub max_relative_error: f64,
    pub max_absolute_error_small: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    coordinates: usize,
    max_rel: f64,
    max_abs_small: f64,
}

impl Tally {
    fn record(&mut self, exact: f64, estimate: f64) {
        self.coordinates += 1;
        let err = (exact - estimate).abs();
        if exact.abs() < SMALL_GRADIENT {
            self.max_abs_small = self.max_abs_small.max(err);
        } else {
            self.max_rel = self.max_rel.max(err / exact.abs());
        }
    }

    fn report(self, cases: usize) -> GradCheckReport {
        GradCheckReport {
            cases,
            coordinates: self.coordinates,
            max_relative_error: self.max_rel,
            max_absolute_error_small: self.max_abs_small,
            passed: self.max_rel <= MAX_RELATIVE_ERROR && self.max_abs_small <= MAX_ABSOLUTE_ERROR,
        }
    }
}

fn central_difference(mu: &[f64], i: usize, mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<f64> {
    let mut x = mu.to_vec();
    x[i] = mu[i] + FD_STEP;
    let up = f(&x)?;
    x[i] = mu[i] - FD_STEP;
    let down = f(&x)?;
    Ok((up - down) / (2.0 * FD_STEP))
}

/// Random tabular families with 2 to `max_states` vector states.
pub fn grad_check_family<R: Rng + ?Sized>(
    cases: usize,
    max_states: usize,
    discount: f64,
    bound: f64,
    rng: &mut R,
) -> Result<GradCheckReport> {
    let mut tally = Tally::default();
    for _ in 0..cases {
        let n = rng.random_range(2..=max_states);
        let family = UniformLambdaFamily::random(n, discount, bound, rng);
        let mu = random_thresholds(n, bound, THRESHOLD_GAP, rng);
        let exact = family.gradient(&mu)?;
        for (i, &g) in exact.iter().enumerate() {
            tally.record(g, central_difference(&mu, i, |x| family.objective(x))?);
        }
    }
    Ok(tally.report(cases))
}

/// Random arms with 2 to `max_states` states.
pub fn grad_check_arm<R: Rng + ?Sized>(
    cases: usize,
    max_states: usize,
    discount: f64,
    bound: f64,
    rng: &mut R,
) -> Result<GradCheckReport> {
    let mut tally = Tally::default();
    for _ in 0..cases {
        let n = rng.random_range(2..=max_states);
        let arm = random_arm(n, rng);
        let mu = random_thresholds(n, bound, THRESHOLD_GAP, rng);
        let exact = threshold_objective(&arm, &mu, discount, bound)?.gradient;
        for (i, &g) in exact.iter().enumerate() {
            let fd = central_difference(&mu, i, |x| Ok(threshold_objective(&arm, x, discount, bound)?.value))?;
            tally.record(g, fd);
        }
    }
    Ok(tally.report(cases))
}
