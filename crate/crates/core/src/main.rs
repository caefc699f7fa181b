use std::process::ExitCode;

use clap::Parser;
use dymart::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
