//! Contracted quantum eigensolver driver.
//!
//! Each iteration prepares `Λ±` for the current state, measures `M` shadows
//! (or the full two-body residual), turns them into anti-Hermitian generators
//! and applies them one after another, each with its own line-searched
//! amplitude.

use std::time::{Duration, Instant};

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CqeError, Result};
use crate::fermion::{number_operator, sz_operator};
use crate::line_search::{line_search_eta, LineSearchConfig};
use crate::pauli::{PauliSum, SIMPLIFY_TOL};
use crate::rng::{self, StreamTag};
use crate::shadows::{
    build_shadow_generator, measure_shadow_residual_prepared, FullTomography, LambdaStates,
    Measurement,
};
use crate::statevector::{CompiledPauliSum, Statevector};

const HERMITIAN_TOL: f64 = 1e-12;
const STALL_WINDOW: usize = 5;
const STALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    Shadow,
    FullTomography,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimation {
    Exact,
    Shots(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqeConfig {
    pub m_shadows: usize,
    /// Per-iteration M; the last entry repeats. Overrides `m_shadows`.
    pub m_schedule: Option<Vec<usize>>,
    pub delta: f64,
    pub estimation: Estimation,
    pub threshold_tau: f64,
    pub conv_tol: f64,
    pub energy_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub update_mode: UpdateMode,
    pub line_search: LineSearchConfig,
    /// Stop as soon as the energy drops below this value.
    pub target_energy: Option<f64>,
}

impl Default for CqeConfig {
    fn default() -> Self {
        Self {
            m_shadows: 5,
            m_schedule: None,
            delta: 0.01,
            estimation: Estimation::Exact,
            threshold_tau: 0.0,
            conv_tol: 1e-6,
            energy_tol: 1e-3,
            max_iters: 100,
            seed: 0,
            update_mode: UpdateMode::Shadow,
            line_search: LineSearchConfig::default(),
            target_energy: None,
        }
    }
}

impl CqeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CqeError::InvalidConfig(m));
        if self.update_mode == UpdateMode::Shadow {
            if self.m_shadows == 0 && self.m_schedule.is_none() {
                return bad("m_shadows must be ≥ 1 in shadow mode".into());
            }
            if let Some(s) = &self.m_schedule {
                if s.is_empty() || s.contains(&0) {
                    return bad("M schedule must be nonempty with entries ≥ 1".into());
                }
            }
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.conv_tol > 0.0) || !(self.energy_tol > 0.0) {
            return bad("tolerances must be > 0".into());
        }
        if !(self.threshold_tau >= 0.0) {
            return bad(format!("threshold must be ≥ 0, got {}", self.threshold_tau));
        }
        if self.estimation == Estimation::Shots(0) {
            return bad("shots must be ≥ 1".into());
        }
        if self.line_search.max_evals == 0 {
            return bad("line search needs at least one evaluation".into());
        }
        Ok(())
    }

    /// M used at `iteration`.
    pub fn m_at(&self, iteration: usize) -> usize {
        match &self.m_schedule {
            Some(s) => s[iteration.min(s.len() - 1)],
            None => self.m_shadows,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    TargetReached,
    Stalled,
    MaxIterations,
}

/// State of iteration `iteration`: energy and residual of `|Ψ_n⟩` before the
/// update, counters including this iteration's measurement and update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub residual_norm: f64,
    pub cum_pauli_exp: usize,
    pub cum_circuits: usize,
    pub etas: Vec<f64>,
    pub number: f64,
    pub sz: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqeTrace {
    pub records: Vec<IterationRecord>,
    pub final_state: Statevector,
    pub termination: TerminationReason,
}

impl CqeTrace {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }

    /// Number of applied updates.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// First iteration whose energy is within `tol` of `e_ref`.
    pub fn iterations_to(&self, e_ref: f64, tol: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| (r.energy - e_ref).abs() < tol)
            .map(|r| r.iteration)
    }

    /// Counters of the first record within `tol` of `e_ref`.
    pub fn record_at_accuracy(&self, e_ref: f64, tol: f64) -> Option<&IterationRecord> {
        self.records.iter().find(|r| (r.energy - e_ref).abs() < tol)
    }
}

/// Drops generator terms with `|coefficient| < tau`.
pub fn threshold_generator(g: &PauliSum, tau: f64) -> PauliSum {
    if tau <= 0.0 {
        return g.clone();
    }
    g.simplify(tau)
}

/// Work done in one iteration, for circuit accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationWork {
    pub update_mode: UpdateMode,
    pub m_shadows: usize,
    /// Distinct circuits of one full-residual measurement.
    pub tomography_circuits: usize,
    /// Surviving Pauli terms of each generator applied with `η ≠ 0`.
    pub applied_terms: Vec<usize>,
}

/// `(pauli_exponentials, distinct_circuits)` added by one iteration.
pub fn count_circuits(work: &IterationWork) -> (usize, usize) {
    let paulis = work.applied_terms.iter().sum();
    let circuits = match work.update_mode {
        UpdateMode::Shadow => 2 * work.m_shadows,
        UpdateMode::FullTomography => work.tomography_circuits,
    };
    (paulis, circuits)
}

struct Measured {
    generators: Vec<PauliSum>,
    residual_norm: f64,
}

fn measure(
    cfg: &CqeConfig,
    iteration: usize,
    psi: &Statevector,
    h: &PauliSum,
    tomo: Option<&FullTomography>,
) -> Result<Measured> {
    let n = psi.n_qubits();
    let lambda = LambdaStates::prepare(psi, h, cfg.delta)?;
    let measurement = |index: usize| match cfg.estimation {
        Estimation::Exact => Measurement::Exact,
        Estimation::Shots(shots) => Measurement::Shots {
            shots,
            seed: rng::derive_seed(cfg.seed, &[iteration as u64, index as u64]),
        },
    };
    match tomo {
        None => {
            let m = cfg.m_at(iteration);
            let shadows = (0..m)
                .into_par_iter()
                .map(|t| {
                    let frame = crate::clifford::CliffordFrame::sample(
                        n,
                        &mut rng::stream(cfg.seed, StreamTag::Frame, iteration, t),
                    );
                    measure_shadow_residual_prepared(&lambda, &frame, measurement(t))
                })
                .collect::<Result<Vec<_>>>()?;
            let frob: f64 = shadows.iter().map(|s| s.frobenius_sq()).sum();
            let generators = shadows
                .iter()
                .map(|s| Ok(build_shadow_generator(s, n)?.generator))
                .collect::<Result<Vec<_>>>()?;
            Ok(Measured {
                generators,
                residual_norm: (frob / m as f64).sqrt(),
            })
        }
        Some(t) => {
            let elems = t.residual_elements(&lambda, measurement(0))?;
            let frob: f64 = elems.iter().map(|(_, a)| a.norm_sqr()).sum();
            Ok(Measured {
                generators: vec![t.generator(&elems)],
                residual_norm: frob.sqrt(),
            })
        }
    }
}

/// Runs the solver from `psi0` until the residual norm drops below
/// `conv_tol`, the energy stalls, the optional target is met, or
/// `max_iters` updates have been applied.
pub fn run_cqe(cfg: &CqeConfig, h: &PauliSum, psi0: &Statevector) -> Result<CqeTrace> {
    cfg.validate()?;
    h.ensure_hermitian(HERMITIAN_TOL)?;
    if h.n_qubits() != psi0.n_qubits() {
        return Err(CqeError::Dimension {
            expected: h.n_qubits(),
            found: psi0.n_qubits(),
        });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > crate::statevector::NORM_TOL {
        return Err(CqeError::NotNormalized(norm));
    }
    let n = psi0.n_qubits();
    let hc = CompiledPauliSum::new(h);
    let number = CompiledPauliSum::new(&number_operator(n));
    let sz = CompiledPauliSum::new(&sz_operator(n));
    let tomo = match cfg.update_mode {
        UpdateMode::Shadow => None,
        UpdateMode::FullTomography => Some(FullTomography::new(n)?),
    };

    let start = Instant::now();
    let mut psi = psi0.clone();
    let mut energy = psi.expectation_compiled(&hc)?.re;
    let mut records: Vec<IterationRecord> = Vec::new();
    let (mut cum_pauli, mut cum_circuits) = (0usize, 0usize);

    let abort = |iteration: usize, records: Vec<IterationRecord>, psi: Statevector| {
        CqeError::NonFiniteEnergy {
            iteration,
            trace: Box::new(CqeTrace {
                records,
                final_state: psi,
                termination: TerminationReason::MaxIterations,
            }),
        }
    };

    for iteration in 0..=cfg.max_iters {
        if !energy.is_finite() {
            return Err(abort(iteration, records, psi));
        }
        let measured = measure(cfg, iteration, &psi, h, tomo.as_ref())?;
        let mut record = IterationRecord {
            iteration,
            energy,
            residual_norm: measured.residual_norm,
            cum_pauli_exp: cum_pauli,
            cum_circuits,
            etas: Vec::new(),
            number: psi.expectation_compiled(&number)?.re,
            sz: psi.expectation_compiled(&sz)?.re,
            wall_time: Duration::ZERO,
        };
        let mut work = IterationWork {
            update_mode: cfg.update_mode,
            m_shadows: cfg.m_at(iteration),
            tomography_circuits: tomo.as_ref().map_or(0, |t| t.circuits_per_measurement()),
            applied_terms: Vec::new(),
        };

        let stop = if measured.residual_norm < cfg.conv_tol {
            Some(TerminationReason::Converged)
        } else if cfg.target_energy.is_some_and(|t| energy < t) {
            Some(TerminationReason::TargetReached)
        } else if iteration >= STALL_WINDOW
            && records[iteration - STALL_WINDOW].energy - energy < STALL_TOL
        {
            Some(TerminationReason::Stalled)
        } else if iteration == cfg.max_iters {
            Some(TerminationReason::MaxIterations)
        } else {
            None
        };

        if stop.is_none() {
            for g in &measured.generators {
                let g = threshold_generator(g, cfg.threshold_tau).simplify(SIMPLIFY_TOL);
                let r = line_search_eta(&psi, &g, &hc, energy, &cfg.line_search)?;
                if !r.energy.is_finite() {
                    records.push(record);
                    return Err(abort(iteration, records, psi));
                }
                record.etas.push(r.eta);
                if r.eta != 0.0 {
                    work.applied_terms.push(g.len());
                    psi = r.state;
                    energy = r.energy;
                }
            }
        }
        let (dp, dc) = count_circuits(&work);
        cum_pauli += dp;
        cum_circuits += dc;
        record.cum_pauli_exp = cum_pauli;
        record.cum_circuits = cum_circuits;
        record.wall_time = start.elapsed();
        debug!(
            "iter {iteration}: E = {:.12} |R| = {:.3e}",
            record.energy, record.residual_norm
        );
        records.push(record);
        if let Some(reason) = stop {
            info!(
                "stopped after {iteration} updates ({reason:?}), E = {:.12}",
                energy
            );
            return Ok(CqeTrace {
                records,
                final_state: psi,
                termination: reason,
            });
        }
    }
    unreachable!("loop returns at iteration == max_iters")
}
