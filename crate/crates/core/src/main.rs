use std::process::ExitCode;

use clap::Parser;
use nonplanar::cli::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => ExitCode::from(run(cli)),
        // Usage errors use exit 1; exit 2 is reserved for negative verdicts.
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            ExitCode::from(EXIT_ERROR)
        }
        Err(e) => {
            let _ = e.print();
            ExitCode::SUCCESS
        }
    }
}
