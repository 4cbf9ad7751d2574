use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "shadow-cqe", version, about = "Shadow-ansatz contracted quantum eigensolver experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact ground and Hartree–Fock energies of one FCIDUMP.
    Fci(FciArgs),
    /// One CQE run: trace CSV, summary JSON and plot data.
    Run(RunArgs),
    /// Runs over M, geometry or threshold values plus an aggregate CSV.
    Sweep(SweepArgs),
    /// Golden energies for every `h3_R_<value>.fcidump` in a directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON manifest; flags given on the command line take precedence.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub fcidump: Option<PathBuf>,
    /// Occupations as `n_alpha,n_beta`; defaults to the FCIDUMP header.
    #[arg(long, value_parser = parse_sector)]
    pub sector: Option<[usize; 2]>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FciArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Solver {
    /// Shadows per iteration.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Shots per circuit in shot mode.
    #[arg(long)]
    pub shots: Option<usize>,
    /// Generator coefficient threshold; 0 disables.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Residual-norm convergence tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Accuracy, in hartree, that counts as reaching the exact energy.
    #[arg(long)]
    pub energy_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Falls back to SHADOW_CQE_SEED, then to 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub update: Option<Update>,
    #[arg(long, value_enum)]
    pub start: Option<Start>,
    /// Put real per-iteration wall times in the trace CSV.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: Solver,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: Solver,
    #[arg(long = "var", value_enum)]
    pub variable: SweepVar,
    /// Comma-separated values; for geometry sweeps defaults to every file found.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    /// Directory of `h3_R_<value>.fcidump` files for geometry sweeps.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    /// Concurrent sub-runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "fixtures")]
    pub dir: PathBuf,
    /// Output JSON file.
    #[arg(long, default_value = "fixtures/golden.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Update {
    Shadow,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Uniform,
    Hf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    M,
    Geometry,
    Threshold,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::M => "m",
            SweepVar::Geometry => "geometry",
            SweepVar::Threshold => "threshold",
        }
    }
}

fn parse_sector(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("n_alpha: {e}"))?,
            b.parse().map_err(|e| format!("n_beta: {e}"))?,
        ]),
        _ => Err(format!("expected A,B, got {s:?}")),
    }
}
