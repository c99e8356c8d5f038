// SPDX-License-Identifier: Apache-2.0

//! Command-line driver for training, evaluation, simulation and reporting.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use manifest::{RunManifest, MANIFEST_FILE, VERSION};

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => commands::train::run(a).map(drop),
        Command::Eval(a) => commands::eval::run(a).map(drop),
        Command::Sim(a) => commands::sim::run(a).map(drop),
        Command::Report(a) => commands::report::run(a).map(drop),
        Command::Toy(a) => commands::toy::run(a).map(drop),
    }
}

/// Parse `args` (including the program name), run, and return the exit
/// code. Errors go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
