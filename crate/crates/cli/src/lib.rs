//! Experiment runner behind the `cubesample` binary.
//!
//! A run is described by an [`ExperimentConfig`], either read from a JSON
//! file or assembled from subcommand flags, and produces a [`Report`]
//! rendered as JSON or CSV. Failures map to distinct exit codes and a
//! one-line JSON error record on stderr.

pub mod args;
pub mod config;
pub mod error;
pub mod run;

pub use config::{ExperimentConfig, Format, Kind, Parameters};
pub use error::{CliError, CliResult};
pub use run::{execute, run_experiment, Report};
