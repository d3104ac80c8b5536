//! Command-line front end for `fbb-core`: problem files, solves, method
//! comparisons, descent certification and stepsize frontier scans.

pub mod args;
pub mod commands;
pub mod csv;
pub mod error;
pub mod problem_file;
pub mod svg;

use std::io::Write;

use args::{Cli, Command};
pub use error::{CliError, CliResult};

/// Dispatches a parsed command line and returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Gen(a) => commands::gen(a, cli.seed, out),
        Command::Solve(a) => commands::solve(a, cli.seed, out),
        Command::Compare(a) => commands::compare(a, cli.seed, out, log),
        Command::Certify(a) => commands::certify(a, cli.seed, out, log),
        Command::Frontier(a) => commands::frontier(a, cli.seed, out, log),
        Command::Plot(a) => commands::plot(a, out),
    }
}
