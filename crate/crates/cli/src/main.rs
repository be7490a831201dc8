use std::process::ExitCode;

use clap::Parser;
use simplex_pa::par;

mod commands;
mod config;

use config::{load_file, Cli, Command, RunConfig, CONFIG_ENV};

fn run() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let file = match std::env::var_os(CONFIG_ENV) {
        Some(path) => Some(load_file(path.as_ref())?),
        None => None,
    };
    let cfg = RunConfig::resolve(cli.command, cli.flags, file)?;
    if let Some(t) = cfg.threads {
        par::set_threads(t);
    }
    match cfg.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Recursion => commands::recursion(&cfg),
        Command::LimitSample => commands::limit_sample(&cfg),
        Command::Pgf => commands::pgf(&cfg),
        Command::Tail => commands::tail(&cfg),
        Command::Bi => commands::bi(&cfg),
        Command::Validate => commands::validate(&cfg),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
