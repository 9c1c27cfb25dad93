//! Command-line front end for the RIS path-loss models: scenario files in,
//! sweep tables, comparisons and reports out.

pub mod commands;
pub mod config;

pub use commands::{run, Cli, CliError};
pub use config::{ConfigError, ScenarioConfig};
