//! Per-run reward logs, their CSV form, and cross-run aggregation.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Width of the trailing reward average.
pub const TRAILING_WINDOW: usize = 100;
pub const AGGREGATE_FILE: &str = "aggregate.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub run: usize,
    pub timestep: usize,
    pub reward: f64,
    pub avg_reward_100: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub timestep: usize,
    pub mean: f64,
    pub std: f64,
}

/// Rewards of one run; timestep `t` (1-based) holds `rewards[t − 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub run: usize,
    pub rewards: Vec<f64>,
}

/// Mean of the last [`TRAILING_WINDOW`] values up to each position (fewer at the start).
pub fn trailing_means(values: &[f64]) -> Vec<f64> {
    let mut window = VecDeque::with_capacity(TRAILING_WINDOW);
    values
        .iter()
        .map(|&x| {
            if window.len() == TRAILING_WINDOW {
                window.pop_front();
            }
            window.push_back(x);
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

impl RunLog {
    pub fn rows(&self) -> Vec<LogRow> {
        self.rewards
            .iter()
            .zip(trailing_means(&self.rewards))
            .enumerate()
            .map(|(i, (&reward, avg))| LogRow {
                run: self.run,
                timestep: i + 1,
                reward,
                avg_reward_100: avg,
            })
            .collect()
    }

    pub fn final_trailing_mean(&self) -> f64 {
        trailing_means(&self.rewards).last().copied().unwrap_or(0.0)
    }

    pub fn file_name(run: usize) -> String {
        format!("run_{run:03}.csv")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))?;
        Ok(())
    }

    /// Reads a run file back, checking that timesteps count up from 1.
    pub fn read_csv(path: &Path) -> Result<(Self, Vec<LogRow>)> {
        let mut r = csv::Reader::from_path(path)?;
        let rows: Vec<LogRow> = r.deserialize().collect::<Result<_, _>>()?;
        let run = rows.first().map_or(0, |row| row.run);
        for (i, row) in rows.iter().enumerate() {
            if row.timestep != i + 1 || row.run != run {
                return Err(HarnessError::Misaligned(format!(
                    "{} row {} has run {} timestep {}",
                    path.display(),
                    i + 1,
                    row.run,
                    row.timestep
                )));
            }
        }
        let log = RunLog {
            run,
            rewards: rows.iter().map(|row| row.reward).collect(),
        };
        Ok((log, rows))
    }
}

/// Per-timestep mean and population standard deviation of the trailing
/// averages across runs.
pub fn aggregate_runs(logs: &[RunLog]) -> Result<Vec<AggregateRow>> {
    let Some(first) = logs.first() else {
        return Err(HarnessError::Misaligned("no runs to aggregate".into()));
    };
    let len = first.rewards.len();
    if let Some(bad) = logs.iter().find(|l| l.rewards.len() != len) {
        return Err(HarnessError::Misaligned(format!(
            "run {} has {} timesteps, run {} has {len}",
            bad.run,
            bad.rewards.len(),
            first.run
        )));
    }
    let trailing: Vec<Vec<f64>> = logs.iter().map(|l| trailing_means(&l.rewards)).collect();
    let n = logs.len() as f64;
    Ok((0..len)
        .map(|t| {
            let mean = trailing.iter().map(|c| c[t]).sum::<f64>() / n;
            let var = trailing.iter().map(|c| (c[t] - mean).powi(2)).sum::<f64>() / n;
            AggregateRow {
                timestep: t + 1,
                mean,
                std: var.sqrt(),
            }
        })
        .collect())
}

pub fn write_aggregate(rows: &[AggregateRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// `run_*.csv` files of a directory, in name order.
pub fn run_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Recomputes `aggregate.csv` from the run files of `dir`.
pub fn aggregate_dir(dir: &Path) -> Result<Vec<AggregateRow>> {
    let logs = run_files(dir)?
        .iter()
        .map(|p| RunLog::read_csv(p).map(|(log, _)| log))
        .collect::<Result<Vec<_>>>()?;
    let rows = aggregate_runs(&logs)?;
    write_aggregate(&rows, &dir.join(AGGREGATE_FILE))?;
    Ok(rows)
}
