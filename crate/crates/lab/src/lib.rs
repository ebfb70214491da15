//! Experiment runner for the coarse-grained quantum-enhanced MCMC library:
//! instance files, TOML configurations, parallel sweeps and CSV outputs.

pub mod chains;
pub mod cli;
pub mod config;
pub mod error;
pub mod instance_io;
pub mod output;
pub mod presets;
pub mod runner;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{LabError, LabResult};
pub use runner::{run_experiment, RunReport};
