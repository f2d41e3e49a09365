//! Experiment driver for threshold-policy learning: configuration, seeded
//! multi-run training, CSV logs and aggregation.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod logs;

pub use config::{ExperimentConfig, PolicyKind, Task};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_single, ExperimentOutput};
