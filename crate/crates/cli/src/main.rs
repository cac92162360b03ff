// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod output;

use args::{Cli, Command};
use mimarkov::{Error, ErrorKind};

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Validation | ErrorKind::Io => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Timeout => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Select(a) => commands::select(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
