//! `sppl`: compile, sample and diagnose piecewise-smooth probabilistic
//! programs.
//!
//! Exit codes: 0 on success, 1 for input errors (unreadable files, parse or
//! compile failures, failed initialization), 2 for usage errors (bad flags,
//! invalid sampler settings, a model the oracle does not cover).

mod args;
mod compile;
mod diagnose;
mod error;
mod manifest;
mod sample;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(a) => compile::run(&a),
        Command::Sample(a) => sample::run(&a),
        Command::Diagnose(a) => diagnose::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
