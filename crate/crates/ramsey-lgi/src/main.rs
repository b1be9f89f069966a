use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ramsey_lgi::cli::{Cli, THREADS_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let env = std::env::var(THREADS_ENV).ok();
    match ramsey_lgi::run(&cli, env.as_deref()) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
