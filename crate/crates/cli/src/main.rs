//! `bernlab` command-line front end.
//!
//! Exit codes: 0 success, 2 parameter error, 3 numerical or I/O error,
//! 64 usage error.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, Failure};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Parameter(msg)) => {
            eprintln!("bernlab: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("bernlab: {msg}");
            ExitCode::from(3)
        }
    }
}
