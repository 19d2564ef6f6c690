//! Command-line harness for the `leray-strip` library: run configurations, experiment sweeps
//! and CSV, VTK, SVG and JSON artifacts.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{parse_config, RunConfig};
pub use error::{ConfigError, HarnessError};
