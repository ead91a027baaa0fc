use std::process::ExitCode;

use clap::Parser;
use osl_core::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("osl: {e}");
            ExitCode::FAILURE
        }
    }
}
