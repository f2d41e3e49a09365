//! Exact machinery for small tabular problems.
//!
//! * [`family`]: MDPs whose scalar state is redrawn uniformly each step, where
//!   threshold policies, objectives and policy gradients have closed forms.
//! * [`arm`]: single bandit arms with an activation cost; optimal values,
//!   Whittle indices and the exact objective and gradient of a threshold vector.
//! * [`ev`]: value iteration on the price-discretized EV charging problem.
//! * [`check`]: finite-difference reports used by the CLI.

pub mod arm;
pub mod check;
pub mod ev;
pub mod family;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pairwise-distinct threshold values, one per state.
pub fn check_distinct(thresholds: &[f64]) -> Result<()> {
    let mut order: Vec<usize> = (0..thresholds.len()).collect();
    order.sort_by(|&a, &b| thresholds[a].total_cmp(&thresholds[b]));
    for w in order.windows(2) {
        if thresholds[w[0]] == thresholds[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::NonDistinctThresholds(a, b));
        }
    }
    Ok(())
}

pub(crate) fn check_stochastic(rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::InvalidConfig(format!("expected {n} transition rows, got {}", rows.len())));
    }
    for (s, row) in rows.iter().enumerate() {
        if row.len() != n || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidConfig(format!("transition row {s} is not a distribution")));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("transition row {s} sums to {total}")));
        }
    }
    Ok(())
}

pub(crate) fn check_discount(discount: f64) -> Result<()> {
    if !(0.0..1.0).contains(&discount) {
        return Err(Error::OutOfRange {
            what: "discount",
            value: discount,
        });
    }
    Ok(())
}

/// `(I − γP)⁻¹` for a row-stochastic `P`, as a dense LU factorization.
pub(crate) struct Resolvent {
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Resolvent {
    pub(crate) fn new(transition: &[Vec<f64>], discount: f64) -> Result<Self> {
        let n = transition.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let eye = if i == j { 1.0 } else { 0.0 };
            eye - discount * transition[i][j]
        });
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(Self { matrix: m, lu })
    }

    /// `x` with `(I − γP) x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let x = self
            .lu
            .solve(&DVector::from_column_slice(b))
            .ok_or(Error::Singular)?;
        Ok(x.iter().copied().collect())
    }

    /// Row vector `yᵀ = cᵀ(I − γP)⁻¹`.
    pub(crate) fn solve_left(&self, c: &[f64]) -> Result<Vec<f64>> {
        let y = self
            .matrix
            .transpose()
            .lu()
            .solve(&DVector::from_column_slice(c))
            .ok_or(Error::Singular)?;
        Ok(y.iter().copied().collect())
    }
}
