//! Command-line driver for the catastrophe model: analytic tables,
//! simulations, verification suites and figure data.
//!
//! Every command writes plot-ready CSV and, when it writes files, a JSON
//! manifest naming them. Identical invocations produce identical bytes.

pub mod args;
pub mod commands;
mod error;
pub mod figures;
pub mod output;
pub mod verify;

pub use error::{CliError, ExitStatus};

use clap::Parser;

/// Parses `argv` (including the program name) and runs the command.
pub fn run_from_args<I, S>(argv: I) -> Result<ExitStatus, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = args::Cli::try_parse_from(&argv).map_err(CliError::Clap)?;
    let recorded: Vec<String> = argv.iter().skip(1).cloned().collect();
    commands::dispatch(cli.command, &recorded)
}
