//! Config-driven experiment runner for the `qgibbs` library.
//!
//! A TOML config lists experiments; each one writes CSV tables with fixed
//! layouts (see [`schema`]) and the batch writes a `manifest.json` that
//! records hashes, timings and numerical conventions.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod runner;
pub mod schema;

pub use config::{ExperimentConfig, ExperimentKind, RunConfig};
pub use error::CliError;
pub use runner::{run_config, RunOptions, RunSummary};
