//! Command-line front end: configuration parsing, task dispatch and output.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, RunError, RunSummary};
