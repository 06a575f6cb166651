//! Experiment harness: configuration, runs, sweeps and result files.

pub mod config;
pub mod harness;

pub use config::{ExperimentConfig, KeyValues, Method, OutputFormat};
pub use harness::{emit_results, read_csv, read_json, run_experiment, sweep, CsvRow, RunStats, Solver};
