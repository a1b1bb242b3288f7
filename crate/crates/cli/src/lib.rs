//! Experiment harness for `wpcn`: JSON-configured parameter sweeps with CSV
//! output, an independent schedule validator, and the `wpcn` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod sweep;
pub mod validate;

pub use config::{Config, SweepVariable};
pub use error::{CliError, ConfigError};
pub use sweep::{emit_csv, run_sweep, write_csv, SweepOutcome, SweepResult, SweepSpec};
pub use validate::{validate_schedule, Constraint, ValidationReport, Violation};
