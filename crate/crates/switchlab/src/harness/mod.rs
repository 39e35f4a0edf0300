//! Experiment harness: configuration, result tables, and the Monte Carlo
//! drivers behind each CLI subcommand.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, StrongEvalPolicy};
pub use experiments::{run_experiment, ExperimentOutput};
pub use table::{Cell, ResultTable};
