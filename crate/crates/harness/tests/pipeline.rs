use std::fs;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use deeptop_harness::cli::{mdp_config, rmab_config, Cli, Command as Sub};
use deeptop_harness::logs::{aggregate_dir, aggregate_runs, read_aggregate, trailing_means, RunLog, AGGREGATE_FILE};
use deeptop_harness::{run_experiment, ExperimentConfig, PolicyKind};

fn tiny(env: &str, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        env: env.into(),
        runs: 2,
        timesteps: 30,
        warmup: 16,
        batch: 8,
        hidden: vec![8],
        output: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn one_run_of_ten_steps_logs_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        runs: 1,
        timesteps: 10,
        ..tiny("ev", dir.path())
    };
    run_experiment(cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("run_000.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("run,timestep,reward,avg_reward_100"));
    assert_eq!(lines.count(), 10);
    let (log, rows) = RunLog::read_csv(&dir.path().join("run_000.csv")).unwrap();
    assert!(rows.windows(2).all(|w| w[1].timestep == w[0].timestep + 1));
    for (row, mean) in rows.iter().zip(trailing_means(&log.rewards)) {
        assert_eq!(row.avg_reward_100, mean);
    }
    let agg = read_aggregate(&dir.path().join(AGGREGATE_FILE)).unwrap();
    assert!(agg.iter().all(|r| r.std == 0.0));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(&p).unwrap())
        })
        .filter(|(name, _)| name.ends_with(".csv"))
        .collect();
    out.sort();
    out
}

#[test]
fn repeated_runs_are_byte_identical() {
    for env in ["ev", "inventory", "mts", "onedim", "recovering"] {
        let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_experiment(tiny(env, a.path())).unwrap();
        run_experiment(tiny(env, b.path())).unwrap();
        run_experiment(ExperimentConfig {
            jobs: 2,
            ..tiny(env, c.path())
        })
        .unwrap();
        let fa = files(a.path());
        assert!(fa.len() >= 3, "{env}");
        assert_eq!(fa, files(b.path()), "{env}");
        assert_eq!(fa, files(c.path()), "{env} with two jobs");
    }
}

#[test]
fn aggregate_recomputes_from_run_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        runs: 3,
        ..tiny("mts", dir.path())
    };
    let out = run_experiment(cfg).unwrap();
    let written = fs::read(dir.path().join(AGGREGATE_FILE)).unwrap();
    fs::remove_file(dir.path().join(AGGREGATE_FILE)).unwrap();
    assert_eq!(aggregate_dir(dir.path()).unwrap(), out.aggregate);
    assert_eq!(fs::read(dir.path().join(AGGREGATE_FILE)).unwrap(), written);

    let mut logs: Vec<RunLog> = out.runs.iter().map(|r| r.log.clone()).collect();
    logs.reverse();
    let reordered = aggregate_runs(&logs).unwrap();
    for (a, b) in reordered.iter().zip(&out.aggregate) {
        assert!((a.mean - b.mean).abs() <= 1e-12 * (1.0 + b.mean.abs()));
        assert!((a.std - b.std).abs() <= 1e-9 * (1.0 + b.std.abs()));
    }
}

#[test]
fn resolved_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(tiny("recovering", dir.path())).unwrap();
    let echoed = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(echoed, out.config);
    assert_eq!(echoed.clone().resolve().unwrap(), echoed);
}

#[test]
fn random_policy_runs_log_the_same_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        policy: PolicyKind::Random,
        ..tiny("onedim", dir.path())
    };
    let out = run_experiment(cfg).unwrap();
    assert!(out.runs.iter().all(|r| r.log.rewards.len() == 30 && r.indices.is_empty()));
}

#[test]
fn bandit_runs_export_index_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(tiny("onedim", dir.path())).unwrap();
    let rows = &out.runs[0].indices;
    assert_eq!(rows.len(), 10 * 100);
    assert!(rows.iter().all(|r| r.index.abs() < 1.0));
    let text = fs::read_to_string(dir.path().join("indices_000.csv")).unwrap();
    assert!(text.starts_with("run,arm,state,index\n"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.toml");
    fs::write(&file, "timesteps = 50\nruns = 4\nhidden = [32]\n").unwrap();
    let cli = Cli::try_parse_from([
        "deeptop",
        "train-mdp",
        "--config",
        file.to_str().unwrap(),
        "--env",
        "inventory",
        "--runs",
        "2",
        "--hidden",
        "64,128,64",
    ])
    .unwrap();
    let Sub::TrainMdp(args) = cli.command else { panic!("wrong subcommand") };
    let cfg = mdp_config(&args).unwrap();
    assert_eq!((cfg.env.as_str(), cfg.timesteps, cfg.runs), ("inventory", 50, 2));
    assert_eq!(cfg.hidden, vec![64, 128, 64]);
    assert_eq!(cfg.reward_scale, Some(0.01));
}

#[test]
fn bandit_flags_validate_budget() {
    let parse = |args: &[&str]| {
        let mut full = vec!["deeptop", "train-rmab"];
        full.extend(args);
        let Sub::TrainRmab(a) = Cli::try_parse_from(full).unwrap().command else { panic!("wrong subcommand") };
        rmab_config(&a)
    };
    assert!(parse(&["--env", "onedim", "--arms", "3", "--activate", "4"]).is_err());
    let cfg = parse(&["--env", "recovering", "--arms", "20", "--activate", "5"]).unwrap();
    assert_eq!((cfg.arms, cfg.activate, cfg.lambda_bound), (20, 5, Some(10.0)));
    assert!(Cli::try_parse_from(["deeptop", "train-rmab", "--env", "ev"]).is_err());
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deeptop"))
}

#[test]
fn binary_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.toml");
    fs::write(&file, "foo = 1\n").unwrap();
    let out = binary().args(["train-mdp", "--config", file.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let line = String::from_utf8(out.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert!(parsed["error"].as_str().unwrap().contains("foo"));
}

#[test]
fn binary_seed_falls_back_to_environment() {
    let run = |seed: Option<&str>, flag: Option<&str>| {
        let dir = tempfile::tempdir().unwrap();
        let mut cmd = binary();
        cmd.args(["train-mdp", "--env", "mts", "--runs", "1", "--timesteps", "20", "--warmup", "8", "--batch", "4"]);
        cmd.args(["--hidden", "4", "--output", dir.path().to_str().unwrap()]);
        cmd.env_remove("DEEPTOP_SEED");
        if let Some(s) = seed {
            cmd.env("DEEPTOP_SEED", s);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(dir.path().join("run_000.csv")).unwrap()
    };
    assert_eq!(run(Some("17"), None), run(None, Some("17")));
    assert_ne!(run(Some("17"), None), run(None, None));
}

#[test]
fn binary_oracle_commands() {
    let out = binary()
        .args(["oracle", "whittle", "--env", "onedim", "--p", "0.5", "--q", "0.5", "--gamma", "0.99", "--states", "10", "--bound", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("state,index"));
    assert_eq!(lines.count(), 10);

    let out = binary().args(["oracle", "grad-check-mdp", "--cases", "10"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
}
