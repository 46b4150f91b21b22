use std::process::ExitCode;

use mobius_cli::{parse_args, run, CliError};

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os()).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(CliError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("mobius: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
