//! Seeded training runs and their file outputs.

use std::fs;
use std::path::Path;

use deeptop::agent::mdp::MdpAgent;
use deeptop::agent::rmab::{random_subset, RmabAgent};
use deeptop::envs::mdp::{make_env, MdpEnvKind, MdpParams};
use deeptop::envs::rmab::{ArmKind, RmabEnv, RmabEnvKind};
use deeptop::rng::{self, streams};
use deeptop::Action;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, PolicyKind, Task, RESOLVED_CONFIG_FILE};
use crate::error::{HarnessError, Result};
use crate::logs::{aggregate_runs, write_aggregate, AggregateRow, RunLog, AGGREGATE_FILE};

/// Learned index of every state of every arm after a bandit run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexRow {
    pub run: usize,
    pub arm: usize,
    pub state: usize,
    pub index: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: RunLog,
    pub indices: Vec<IndexRow>,
}

/// Runs one seeded run. Warmup steps are executed first and not logged, so
/// the log holds exactly `timesteps` rewards.
pub fn run_single(cfg: &ExperimentConfig, run: usize) -> Result<RunOutput> {
    let seed = cfg.run_seed(run);
    let (rewards, indices) = match cfg.task()? {
        Task::Mdp(kind) => (run_mdp(cfg, kind, seed)?, Vec::new()),
        Task::Rmab(kind) => run_rmab(cfg, kind, seed, run)?,
    };
    Ok(RunOutput {
        log: RunLog { run, rewards },
        indices,
    })
}

fn run_mdp(cfg: &ExperimentConfig, kind: MdpEnvKind, seed: u64) -> Result<Vec<f64>> {
    let mut env = make_env(kind, &MdpParams::default(), seed);
    let total = cfg.warmup + cfg.timesteps;
    let rewards: Vec<f64> = match cfg.policy {
        PolicyKind::Deeptop => {
            let mut agent = MdpAgent::new(env.vector_dim(), cfg.agent_config(), seed)?;
            (0..total)
                .map(|_| agent.train_step(env.as_mut()).map(|o| o.reward))
                .collect::<deeptop::Result<_>>()?
        }
        PolicyKind::Random => {
            let mut rng = rng::stream(seed, streams::EXPLORATION);
            (0..total).map(|_| env.step(Action::from_bool(rng.random()))).collect()
        }
    };
    Ok(rewards[cfg.warmup..].to_vec())
}

fn run_rmab(cfg: &ExperimentConfig, kind: RmabEnvKind, seed: u64, run: usize) -> Result<(Vec<f64>, Vec<IndexRow>)> {
    let mut env = RmabEnv::of_kind(kind, cfg.arms, cfg.activate, seed)?;
    let bound = cfg.lambda_bound.unwrap_or(kind.lambda_bound());
    let total = cfg.warmup + cfg.timesteps;
    match cfg.policy {
        PolicyKind::Deeptop => {
            let mut agent = RmabAgent::new(env.arms(), bound, cfg.agent_config(), seed)?;
            let rewards: Vec<f64> = (0..total)
                .map(|_| agent.train_step(&mut env).map(|s| s.total_reward))
                .collect::<deeptop::Result<_>>()?;
            let mut indices = Vec::new();
            for (arm_id, arm) in env.arms().iter().enumerate() {
                for state in arm.first_state()..arm.first_state() + arm.num_states() {
                    indices.push(IndexRow {
                        run,
                        arm: arm_id,
                        state,
                        index: agent.index(arm_id, state),
                    });
                }
            }
            Ok((rewards[cfg.warmup..].to_vec(), indices))
        }
        PolicyKind::Random => {
            let mut rng = rng::stream(seed, streams::EXPLORATION);
            let mut rewards = Vec::with_capacity(total);
            for _ in 0..total {
                let active = random_subset(env.num_arms(), env.activate(), &mut rng);
                rewards.push(env.step(&active)?.iter().sum());
            }
            Ok((rewards[cfg.warmup..].to_vec(), Vec::new()))
        }
    }
}

pub fn index_file_name(run: usize) -> String {
    format!("indices_{run:03}.csv")
}

fn write_indices(rows: &[IndexRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutput>,
    pub aggregate: Vec<AggregateRow>,
}

/// Resolves the config, runs every seed (up to `jobs` at a time) and writes
/// the resolved config, one CSV per run, index tables for bandit runs and
/// the aggregate CSV into the output directory.
pub fn run_experiment(cfg: ExperimentConfig) -> Result<ExperimentOutput> {
    let cfg = cfg.resolve()?;
    let dir = cfg.output.clone();
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let config_path = dir.join(RESOLVED_CONFIG_FILE);
    fs::write(&config_path, cfg.to_toml()).map_err(|e| HarnessError::io(&config_path, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let runs: Vec<RunOutput> = pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|run| {
                let out = run_single(&cfg, run)?;
                out.log.write_csv(&dir.join(RunLog::file_name(run)))?;
                if !out.indices.is_empty() {
                    write_indices(&out.indices, &dir.join(index_file_name(run)))?;
                }
                Ok(out)
            })
            .collect::<Result<_>>()
    })?;

    let logs: Vec<RunLog> = runs.iter().map(|r| r.log.clone()).collect();
    let aggregate = aggregate_runs(&logs)?;
    write_aggregate(&aggregate, &dir.join(AGGREGATE_FILE))?;
    Ok(ExperimentOutput {
        config: cfg,
        runs,
        aggregate,
    })
}
