//! `feo`: validate, learn, solve, report on and sample fair-opportunity
//! scenarios.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible, 4 internal error.

mod args;
mod commands;
mod error;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::error::{diagnostic, EXIT_INTERNAL};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match panic::catch_unwind(AssertUnwindSafe(|| commands::run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            e.emit(json);
            ExitCode::from(e.code)
        }
        Err(_) => {
            diagnostic(json, "error", "Internal", "unexpected internal failure");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
