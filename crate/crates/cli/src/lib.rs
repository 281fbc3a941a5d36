//! Command-line front end: CSV ingestion, subcommands and report rendering.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod plot;
pub mod report;

pub use commands::{run, Output};
pub use config::{Cli, Command, Format, RunConfig};
pub use error::{CliError, Result};
pub use input::{load_csv, LoadOptions, Transform};
pub use report::{fmt_num, validate_report, Report, Results};
