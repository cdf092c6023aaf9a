use std::process::ExitCode;

use clap::Parser;
use mbt_cli::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbt: {e}");
            e.exit_code()
        }
    }
}
