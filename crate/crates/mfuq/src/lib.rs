//! Experiment driver for the `mfuq-core` surrogates: configuration files,
//! reference solutions, convergence tables, surrogate dumps and the `mfuq`
//! command line.

pub mod config;
pub mod dump;
pub mod error;
pub mod experiment;
pub mod records;

pub use config::{ConfigError, ExperimentConfig};
pub use error::{BenchError, Result};
pub use experiment::{build_reference, run_experiment, write_reference, write_run, RunResult};
