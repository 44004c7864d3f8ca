//! Experiment driver for the `bandit-tails` command-line tool.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ExperimentPlan};
pub use output::{emit_csv, read_tail_csv, write_artifact, Manifest};
pub use run::{run_plan, RunArtifact, TailRow};
