//! Command-line front end for `qmatch`.
//!
//! Commands: `fit`, `compare`, `predict`, `simulate` and `curves`. Exit
//! codes are 0 on success, 1 on invalid input or a failed command, and 2
//! when a command finished but with warnings (unconverged chains or
//! families that could not be fitted).

pub mod commands;
pub mod dataset;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Cli, Command, Status};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_SUCCESS
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_INPUT
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a, stdout, stderr),
        Command::Compare(a) => commands::cmd_compare(a, stdout, stderr),
        Command::Predict(a) => commands::cmd_predict(a, stdout),
        Command::Simulate(a) => commands::cmd_simulate(a, stdout),
        Command::Curves(a) => commands::cmd_curves(a, stdout),
    };
    match result {
        Ok(Status::Success) => EXIT_SUCCESS,
        Ok(Status::Warnings) => EXIT_WARNINGS,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_INPUT
        }
    }
}
