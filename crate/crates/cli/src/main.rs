use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use photoconv_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            for line in &outcome.lines {
                if writeln!(out, "{line}").is_err() {
                    break;
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: {} check failed", cli.command.name());
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
