//! Command-line driver: configuration, subcommands and report persistence.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_constants, cmd_selfenergy, cmd_threshold, cmd_verify, cmd_window};
pub use config::{parse_config, parse_sweep, RunConfig};
pub use error::{CliError, Result};
pub use report::{persist, Command, RunOutput, RunReport};
