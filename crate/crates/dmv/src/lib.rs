//! File formats, experiment configs and the `dmv` command-line tool built
//! on `dmv-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
