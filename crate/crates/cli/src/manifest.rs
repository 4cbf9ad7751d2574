//! Run manifests: flags override manifest fields, which override defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use shadow_cqe::line_search::LineSearchConfig;
use shadow_cqe::solver::{CqeConfig, Estimation, UpdateMode};

use crate::args::{Common, Mode, Solver, Start, Update};
use crate::Failure;

pub const SEED_ENV: &str = "SHADOW_CQE_SEED";
const DEFAULT_SHOTS: usize = 100_000;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub fcidump: Option<PathBuf>,
    pub sector: Option<[usize; 2]>,
    pub out: Option<PathBuf>,
    pub experiment: Option<String>,
    pub m: Option<usize>,
    pub m_schedule: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub mode: Option<Mode>,
    pub shots: Option<usize>,
    pub tau: Option<f64>,
    pub eps: Option<f64>,
    pub energy_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub update: Option<Update>,
    pub start: Option<Start>,
    pub line_search_step: Option<f64>,
    pub line_search_evals: Option<usize>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))
            .map_err(Failure::Usage)?;
        serde_json::from_str(&text)
            .with_context(|| format!("invalid manifest {}", path.display()))
            .map_err(Failure::Usage)
    }

    /// Manifest named by `--manifest`, with the remaining flags laid over it.
    pub fn from_flags(common: &Common, solver: Option<&Solver>) -> Result<Self, Failure> {
        let base = match &common.manifest {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let mut flags = Manifest {
            fcidump: common.fcidump.clone(),
            sector: common.sector,
            out: common.out.clone(),
            ..Default::default()
        };
        if let Some(s) = solver {
            flags.m = s.m;
            flags.delta = s.delta;
            flags.mode = s.mode;
            flags.shots = s.shots;
            flags.tau = s.tau;
            flags.eps = s.eps;
            flags.energy_tol = s.energy_tol;
            flags.max_iters = s.max_iters;
            flags.seed = s.seed;
            flags.update = s.update;
            flags.start = s.start;
        }
        Ok(flags.over(base))
    }

    /// Fields of `self`, falling back to `base`.
    pub fn over(self, base: Manifest) -> Manifest {
        Manifest {
            fcidump: self.fcidump.or(base.fcidump),
            sector: self.sector.or(base.sector),
            out: self.out.or(base.out),
            experiment: self.experiment.or(base.experiment),
            // an explicit --m replaces a manifest schedule
            m_schedule: if self.m.is_some() { self.m_schedule } else { self.m_schedule.or(base.m_schedule) },
            m: self.m.or(base.m),
            delta: self.delta.or(base.delta),
            mode: self.mode.or(base.mode),
            shots: self.shots.or(base.shots),
            tau: self.tau.or(base.tau),
            eps: self.eps.or(base.eps),
            energy_tol: self.energy_tol.or(base.energy_tol),
            max_iters: self.max_iters.or(base.max_iters),
            seed: self.seed.or(base.seed),
            update: self.update.or(base.update),
            start: self.start.or(base.start),
            line_search_step: self.line_search_step.or(base.line_search_step),
            line_search_evals: self.line_search_evals.or(base.line_search_evals),
        }
    }

    pub fn fcidump(&self) -> Result<&Path, Failure> {
        match &self.fcidump {
            Some(p) => Ok(p),
            None => Err(Failure::Usage(anyhow::anyhow!(
                "no FCIDUMP given (use --fcidump or a manifest \"fcidump\" field)"
            ))),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Fully resolved solver settings; the seed falls back to the environment.
    pub fn resolve(&self) -> Result<RunSpec, Failure> {
        let d = CqeConfig::default();
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer"))
                    .map_err(Failure::Usage)?,
                Err(_) => d.seed,
            },
        };
        let mode = self.mode.unwrap_or(Mode::Exact);
        if mode == Mode::Exact && self.shots.is_some() {
            return Err(Failure::Usage(anyhow::anyhow!("--shots needs --mode shots")));
        }
        Ok(RunSpec {
            m: self.m.unwrap_or(d.m_shadows),
            m_schedule: self.m_schedule.clone(),
            delta: self.delta.unwrap_or(d.delta),
            mode,
            shots: (mode == Mode::Shots).then(|| self.shots.unwrap_or(DEFAULT_SHOTS)),
            tau: self.tau.unwrap_or(d.threshold_tau),
            eps: self.eps.unwrap_or(d.conv_tol),
            energy_tol: self.energy_tol.unwrap_or(d.energy_tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            seed,
            update: self.update.unwrap_or(Update::Shadow),
            start: self.start.unwrap_or(Start::Uniform),
            line_search_step: self.line_search_step.unwrap_or(d.line_search.initial_step),
            line_search_evals: self.line_search_evals.unwrap_or(d.line_search.max_evals),
        })
    }
}

/// Settings of one run, echoed verbatim into its summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_schedule: Option<Vec<usize>>,
    pub delta: f64,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    pub tau: f64,
    pub eps: f64,
    pub energy_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub update: Update,
    pub start: Start,
    pub line_search_step: f64,
    pub line_search_evals: usize,
}

impl RunSpec {
    pub fn config(&self) -> anyhow::Result<CqeConfig> {
        let cfg = CqeConfig {
            m_shadows: self.m,
            m_schedule: self.m_schedule.clone(),
            delta: self.delta,
            estimation: match self.shots {
                Some(n) => Estimation::Shots(n),
                None => Estimation::Exact,
            },
            threshold_tau: self.tau,
            conv_tol: self.eps,
            energy_tol: self.energy_tol,
            max_iters: self.max_iters,
            seed: self.seed,
            update_mode: match self.update {
                Update::Shadow => UpdateMode::Shadow,
                Update::Full => UpdateMode::FullTomography,
            },
            line_search: LineSearchConfig {
                initial_step: self.line_search_step,
                max_evals: self.line_search_evals,
                ..LineSearchConfig::default()
            },
            target_energy: None,
        };
        cfg.validate()?;
        if !(cfg.line_search.initial_step > 0.0) {
            bail!("line_search_step must be > 0");
        }
        Ok(cfg)
    }
}
