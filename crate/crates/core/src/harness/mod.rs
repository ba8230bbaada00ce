//! Experiment harness: benchmark instances, configuration, parallel runs and
//! reporting.

pub mod config;
pub mod env;
pub mod report;
pub mod runner;

pub use config::{Algorithm, EnvSpec, ExperimentConfig, Sweep, SweepAxis, SweepPoint};
pub use env::{environment, ENVIRONMENTS};
pub use report::{aggregate, format_float, read_ranking, read_weights, write_aggregates, write_runs, Aggregate};
pub use runner::{run_experiment, run_single, RunRecord};
