//! Command-line interface.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deeptop::envs::rmab::{Arm, ArmKind, OneDimArm, RecoveringArm, RecoveringClass, ONEDIM_STATES};
use deeptop::oracle::arm::whittle_indices;
use deeptop::oracle::check::{grad_check_arm, grad_check_family, GradCheckReport};
use deeptop::rng;
use serde::Serialize;

use crate::config::{parse_hidden, ExperimentConfig, PolicyKind, Task, SEED_ENV_VAR};
use crate::error::{HarnessError, Result};
use crate::experiment::run_experiment;
use crate::logs::aggregate_dir;

#[derive(Debug, Parser)]
#[command(name = "deeptop", version, about = "Threshold-policy actor-critic experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on an MDP (ev, inventory, mts).
    TrainMdp(TrainArgs),
    /// Train on a restless bandit (onedim, recovering).
    TrainRmab(RmabArgs),
    /// Exact checks on small tabular problems.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Recompute aggregate.csv from the run files in a directory.
    Aggregate { dir: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MdpEnvArg {
    Ev,
    Inventory,
    Mts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RmabEnvArg {
    Onedim,
    Recovering,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub env: Option<MdpEnvArg>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RmabArgs {
    #[arg(long, value_enum)]
    pub env: Option<RmabEnvArg>,
    /// Number of arms N.
    #[arg(long)]
    pub arms: Option<usize>,
    /// Arms activated per step V.
    #[arg(long)]
    pub activate: Option<usize>,
    /// Activation-cost bound M.
    #[arg(long)]
    pub lambda_bound: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags shared by both training commands; each overrides the config file.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub timesteps: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long, env = SEED_ENV_VAR)]
    pub seed: Option<u64>,
    /// Hidden layer sizes, e.g. 64,128,64.
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub actor_lr: Option<f64>,
    #[arg(long)]
    pub critic_lr: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long)]
    pub reward_scale: Option<f64>,
    #[arg(long)]
    pub threshold_bound: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Runs executed in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exact threshold gradients against finite differences on random MDPs.
    GradCheckMdp(GradCheckArgs),
    /// Exact arm gradients against finite differences on random arms.
    GradCheckRmab(GradCheckArgs),
    /// Whittle indices of one arm as `state,index` CSV.
    Whittle(WhittleArgs),
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, default_value_t = 4)]
    pub max_states: usize,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bound: f64,
    #[arg(long, default_value_t = 0, env = SEED_ENV_VAR)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WhittleArgs {
    #[arg(long, value_enum, default_value = "onedim")]
    pub env: RmabEnvArg,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Defaults to p.
    #[arg(long)]
    pub q: Option<f64>,
    /// Chain length of a onedim arm.
    #[arg(long, default_value_t = ONEDIM_STATES)]
    pub states: usize,
    /// Recovering arm class (A, B, C or D).
    #[arg(long, default_value = "A")]
    pub class: String,
    #[arg(long, default_value_t = 0.99)]
    pub gamma: f64,
    /// Search range [-bound, bound] for the indices.
    #[arg(long)]
    pub bound: Option<f64>,
}

impl CommonArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(p) = &self.policy {
            cfg.policy = p.parse::<PolicyKind>()?;
        }
        if let Some(h) = &self.hidden {
            cfg.hidden = parse_hidden(h)?;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(timesteps, runs, seed, actor_lr, critic_lr, gamma, epsilon, tau, batch, warmup, capacity, output, jobs);
        if self.reward_scale.is_some() {
            cfg.reward_scale = self.reward_scale;
        }
        if self.threshold_bound.is_some() {
            cfg.threshold_bound = self.threshold_bound;
        }
        Ok(())
    }

    fn base_config(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(path) => ExperimentConfig::load(path),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

fn env_name_mdp(e: MdpEnvArg) -> &'static str {
    match e {
        MdpEnvArg::Ev => "ev",
        MdpEnvArg::Inventory => "inventory",
        MdpEnvArg::Mts => "mts",
    }
}

fn env_name_rmab(e: RmabEnvArg) -> &'static str {
    match e {
        RmabEnvArg::Onedim => "onedim",
        RmabEnvArg::Recovering => "recovering",
    }
}

/// Resolved configuration of a `train-mdp` invocation.
pub fn mdp_config(args: &TrainArgs) -> Result<ExperimentConfig> {
    let mut cfg = args.common.base_config()?;
    if let Some(e) = args.env {
        cfg.env = env_name_mdp(e).into();
    }
    args.common.apply(&mut cfg)?;
    if !matches!(cfg.task()?, Task::Mdp(_)) {
        return Err(HarnessError::Config(format!("{} is not an MDP environment", cfg.env)));
    }
    cfg.resolve()
}

/// Resolved configuration of a `train-rmab` invocation.
pub fn rmab_config(args: &RmabArgs) -> Result<ExperimentConfig> {
    let mut cfg = args.common.base_config()?;
    if let Some(e) = args.env {
        cfg.env = env_name_rmab(e).into();
    } else if !matches!(Task::parse(&cfg.env), Ok(Task::Rmab(_))) {
        cfg.env = "onedim".into();
    }
    args.common.apply(&mut cfg)?;
    if let Some(n) = args.arms {
        cfg.arms = n;
    }
    if let Some(v) = args.activate {
        cfg.activate = v;
    }
    if args.lambda_bound.is_some() {
        cfg.lambda_bound = args.lambda_bound;
    }
    if !matches!(cfg.task()?, Task::Rmab(_)) {
        return Err(HarnessError::Config(format!("{} is not a bandit environment", cfg.env)));
    }
    cfg.resolve()
}

#[derive(Debug, Serialize)]
struct TrainSummary<'a> {
    env: &'a str,
    runs: usize,
    timesteps: usize,
    output: String,
    final_mean: f64,
    final_std: f64,
}

fn report_training(out: &crate::ExperimentOutput) -> Result<()> {
    let last = out.aggregate.last().expect("at least one timestep");
    let summary = TrainSummary {
        env: &out.config.env,
        runs: out.config.runs,
        timesteps: out.config.timesteps,
        output: out.config.output.display().to_string(),
        final_mean: last.mean,
        final_std: last.std,
    };
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(())
}

fn whittle_csv(args: &WhittleArgs) -> Result<String> {
    let arm = match args.env {
        RmabEnvArg::Onedim => {
            if !(2..=ONEDIM_STATES).contains(&args.states) {
                return Err(HarnessError::Config(format!("chain length must be 2..={ONEDIM_STATES}")));
            }
            for (name, v) in [("p", args.p), ("q", args.q.unwrap_or(args.p))] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(HarnessError::Config(format!("{name} must lie in [0, 1]")));
                }
            }
            let mut chain = OneDimArm::truncated(args.states, args.p);
            chain.q = args.q.unwrap_or(args.p);
            Arm::OneDim(chain)
        }
        RmabEnvArg::Recovering => {
            let class = match args.class.as_str() {
                "A" | "a" => RecoveringClass::A,
                "B" | "b" => RecoveringClass::B,
                "C" | "c" => RecoveringClass::C,
                "D" | "d" => RecoveringClass::D,
                other => return Err(HarnessError::Config(format!("unknown recovering class {other:?}"))),
            };
            Arm::Recovering(RecoveringArm::of_class(class))
        }
    };
    let bound = args.bound.unwrap_or(match args.env {
        RmabEnvArg::Onedim => 2.0,
        RmabEnvArg::Recovering => 20.0,
    });
    let indices = whittle_indices(&arm.model(), args.gamma, bound)?;
    let mut out = String::from("state,index\n");
    for (i, idx) in indices.iter().enumerate() {
        out.push_str(&format!("{},{}\n", arm.first_state() + i, idx));
    }
    Ok(out)
}

fn print_report(report: &GradCheckReport) -> Result<bool> {
    println!("{}", serde_json::to_string(report).expect("report serializes"));
    Ok(report.passed)
}

/// Executes a parsed command; `Ok(false)` means a check ran and failed.
pub fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::TrainMdp(args) => {
            let out = run_experiment(mdp_config(&args)?)?;
            report_training(&out)?;
            Ok(true)
        }
        Command::TrainRmab(args) => {
            let out = run_experiment(rmab_config(&args)?)?;
            report_training(&out)?;
            Ok(true)
        }
        Command::Oracle(OracleCommand::GradCheckMdp(a)) => {
            let mut r = rng::stream(a.seed, rng::streams::ENV);
            print_report(&grad_check_family(a.cases, a.max_states.max(2), a.gamma, a.bound, &mut r)?)
        }
        Command::Oracle(OracleCommand::GradCheckRmab(a)) => {
            let mut r = rng::stream(a.seed, rng::streams::ENV);
            print_report(&grad_check_arm(a.cases, a.max_states.max(2), a.gamma, a.bound, &mut r)?)
        }
        Command::Oracle(OracleCommand::Whittle(a)) => {
            let csv = whittle_csv(&a)?;
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| HarnessError::io("stdout", e))?;
            Ok(true)
        }
        Command::Aggregate { dir } => {
            let rows = aggregate_dir(&dir)?;
            println!("{{\"timesteps\":{}}}", rows.len());
            Ok(true)
        }
    }
}

/// Machine-readable error line.
pub fn error_line(err: &HarnessError) -> String {
    serde_json::json!({ "error": err.to_string() }).to_string()
}
