mod args;
mod commands;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes: 1 usage or configuration, 2 unreadable input, 3 no convergence.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Parse(anyhow::Error),
    NotConverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }

    pub fn error(&self) -> anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Parse(e) => anyhow::anyhow!("{e:#}"),
            Failure::NotConverged(m) => anyhow::anyhow!("not converged: {m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Fci(a) => commands::fci(a),
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Report(a) => commands::report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
