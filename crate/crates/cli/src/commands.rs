use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use shadow_cqe::fcidump::read_fcidump;
use shadow_cqe::oracle::{fci_solve, hf_determinant, uniform_sector_state, SectorSpec};
use shadow_cqe::solver::{run_cqe, CqeTrace, TerminationReason};
use shadow_cqe::{qubit_hamiltonian, CqeError, PauliSum, Statevector};

use crate::args::{FciArgs, ReportArgs, RunArgs, Start, SweepArgs, SweepVar};
use crate::manifest::{Manifest, RunSpec};
use crate::output::{write_json, write_series_csv, write_trace_csv, Series};
use crate::Failure;

pub struct System {
    pub path: PathBuf,
    pub h: PauliSum,
    pub sector: SectorSpec,
    pub e_fci: f64,
    pub e_hf: f64,
}

impl System {
    pub fn load(path: &Path, sector: Option<[usize; 2]>) -> Result<Self, Failure> {
        let ints = read_fcidump(path).map_err(|e| {
            let code_parse = matches!(e, CqeError::Parse { .. } | CqeError::MissingHeaderKey(_) | CqeError::Io(_));
            let err = anyhow!(e).context(format!("cannot load FCIDUMP {}", path.display()));
            if code_parse {
                Failure::Parse(err)
            } else {
                Failure::Usage(err)
            }
        })?;
        let sector = match sector {
            Some([a, b]) => SectorSpec::new(a, b),
            None => {
                let s = SectorSpec::from_electrons(ints.n_electrons, ints.ms2).ok_or_else(|| {
                    Failure::Parse(anyhow!(
                        "{}: NELEC={} and MS2={} do not define a sector",
                        path.display(),
                        ints.n_electrons,
                        ints.ms2
                    ))
                })?;
                if ints.n_electrons % 2 == 1 {
                    eprintln!(
                        "note: {} has {} electrons; using the sector (n_alpha, n_beta) = ({}, {}) from MS2 = {} (S_z = {}/2). Override with --sector.",
                        path.display(),
                        ints.n_electrons,
                        s.n_alpha,
                        s.n_beta,
                        ints.ms2,
                        ints.ms2
                    );
                }
                s
            }
        };
        let h = qubit_hamiltonian(&ints).map_err(|e| Failure::Usage(e.into()))?;
        let r = h.n_qubits();
        let fci = fci_solve(&h, Some(sector)).map_err(|e| Failure::Usage(e.into()))?;
        let hf = hf_determinant(sector, r).map_err(|e| Failure::Usage(e.into()))?;
        let e_hf = hf.expectation(&h).map_err(|e| Failure::Usage(e.into()))?.re;
        Ok(Self {
            path: path.to_path_buf(),
            h,
            sector,
            e_fci: fci.energy,
            e_hf,
        })
    }

    pub fn geometry(&self) -> Option<f64> {
        geometry_of(&self.path).map(|g| g.1)
    }

    fn start_state(&self, start: Start) -> shadow_cqe::Result<Statevector> {
        let r = self.h.n_qubits();
        match start {
            Start::Uniform => uniform_sector_state(self.sector, r),
            Start::Hf => hf_determinant(self.sector, r),
        }
    }
}

/// `("0.7", 0.7)` from a path like `h3_R_0.7.fcidump`.
pub fn geometry_of(path: &Path) -> Option<(String, f64)> {
    let stem = path.file_stem()?.to_str()?;
    let token = &stem[stem.rfind("_R_")? + 3..];
    Some((token.to_string(), token.parse().ok()?))
}

/// Every `h3_R_<value>.fcidump` in `dir`, sorted by value.
fn geometry_files(dir: &Path) -> Result<Vec<(String, f64, PathBuf)>, Failure> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .map_err(Failure::Usage)?;
    let mut out = Vec::new();
    for e in entries {
        let p = e.map_err(|e| Failure::Usage(e.into()))?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("h3_R_") && name.ends_with(".fcidump") {
            if let Some((tok, v)) = geometry_of(&p) {
                out.push((tok, v, p));
            }
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
        .map_err(Failure::Usage)
}

#[derive(Serialize)]
struct FciSummary {
    fcidump: String,
    geometry: Option<f64>,
    sector: [usize; 2],
    n_qubits: usize,
    e_fci: f64,
    e_hf: f64,
}

pub fn fci(args: FciArgs) -> Result<(), Failure> {
    let m = Manifest::from_flags(&args.common, None)?;
    let sys = System::load(m.fcidump()?, m.sector)?;
    let out = m.out_dir();
    create_dir(&out)?;
    let s = FciSummary {
        fcidump: sys.path.display().to_string(),
        geometry: sys.geometry(),
        sector: [sys.sector.n_alpha, sys.sector.n_beta],
        n_qubits: sys.h.n_qubits(),
        e_fci: sys.e_fci,
        e_hf: sys.e_hf,
    };
    write_json(&out.join("fci.json"), &s).map_err(Failure::Usage)?;
    println!("E_FCI = {:.12}", s.e_fci);
    println!("E_HF  = {:.12}", s.e_hf);
    println!("E_HF - E_FCI = {:.6e}", s.e_hf - s.e_fci);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub experiment: Option<String>,
    pub fcidump: String,
    pub geometry: Option<f64>,
    pub sector: [usize; 2],
    pub config: RunSpec,
    pub termination: TerminationReason,
    pub iterations: usize,
    pub iters_to_converge: Option<usize>,
    pub final_energy: f64,
    pub e_fci: f64,
    pub e_hf: f64,
    pub error: f64,
    pub converged: bool,
    pub cum_pauli_exp: usize,
    pub cum_circuits: usize,
}

/// Runs the solver and writes trace, summary, plot data and timing log into
/// `out`. A non-finite energy still leaves the partial trace behind.
fn execute(
    sys: &System,
    spec: &RunSpec,
    experiment: Option<String>,
    out: &Path,
    timing: bool,
) -> Result<(RunSummary, CqeTrace), Failure> {
    let cfg = spec.config().map_err(Failure::Usage)?;
    let psi0 = sys.start_state(spec.start).map_err(|e| Failure::Usage(e.into()))?;
    create_dir(out)?;
    let started = SystemTime::now();
    let trace = match run_cqe(&cfg, &sys.h, &psi0) {
        Ok(t) => t,
        Err(CqeError::NonFiniteEnergy { iteration, trace }) => {
            write_trace_csv(&out.join("trace.csv"), &trace, timing).map_err(Failure::Usage)?;
            return Err(Failure::NotConverged(format!(
                "non-finite energy at iteration {iteration}; partial trace in {}",
                out.display()
            )));
        }
        Err(e) => return Err(Failure::Usage(e.into())),
    };
    write_log(&out.join("run.log"), started, &trace).map_err(Failure::Usage)?;

    let last = trace.records.last().expect("trace has the initial record");
    let error = trace.final_energy() - sys.e_fci;
    let summary = RunSummary {
        experiment,
        fcidump: sys.path.display().to_string(),
        geometry: sys.geometry(),
        sector: [sys.sector.n_alpha, sys.sector.n_beta],
        config: spec.clone(),
        termination: trace.termination,
        iterations: trace.iterations(),
        iters_to_converge: trace.iterations_to(sys.e_fci, spec.energy_tol),
        final_energy: trace.final_energy(),
        e_fci: sys.e_fci,
        e_hf: sys.e_hf,
        error,
        converged: error.abs() < spec.energy_tol,
        cum_pauli_exp: last.cum_pauli_exp,
        cum_circuits: last.cum_circuits,
    };
    write_trace_csv(&out.join("trace.csv"), &trace, timing).map_err(Failure::Usage)?;
    write_json(&out.join("summary.json"), &summary).map_err(Failure::Usage)?;
    let plots = [
        series(&trace, sys.e_fci, "iter", "", |r| r.iteration as f64),
        series(&trace, sys.e_fci, "cum_pauli_exp", "", |r| r.cum_pauli_exp as f64),
        series(&trace, sys.e_fci, "cum_circuits", "", |r| r.cum_circuits as f64),
    ];
    write_series_csv(&out.join("plot.csv"), &plots).map_err(Failure::Usage)?;
    Ok((summary, trace))
}

fn series(
    trace: &CqeTrace,
    e_fci: f64,
    x: &str,
    label: &str,
    f: impl Fn(&shadow_cqe::solver::IterationRecord) -> f64,
) -> Series {
    Series {
        x_name: format!("{x}{label}"),
        y_name: if label.is_empty() { format!("error_vs_{x}") } else { format!("error{label}") },
        points: trace.records.iter().map(|r| (f(r), r.energy - e_fci)).collect(),
    }
}

fn write_log(path: &Path, started: SystemTime, trace: &CqeTrace) -> anyhow::Result<()> {
    let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let mut s = format!("started_unix {:.3}\n", unix(started));
    for r in &trace.records {
        writeln!(s, "iter {} wall_ms {:.3}", r.iteration, r.wall_time.as_secs_f64() * 1e3)?;
    }
    writeln!(s, "finished_unix {:.3}", unix(SystemTime::now()))?;
    fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}

pub fn run(args: RunArgs) -> Result<(), Failure> {
    let m = Manifest::from_flags(&args.common, Some(&args.solver))?;
    let spec = m.resolve()?;
    spec.config().map_err(Failure::Usage)?;
    let sys = System::load(m.fcidump()?, m.sector)?;
    let out = m.out_dir();
    let (s, _) = execute(&sys, &spec, m.experiment.clone(), &out, args.solver.timing)?;
    println!(
        "{:?} after {} iterations: E = {:.12}, E_FCI = {:.12}, error = {:.3e}",
        s.termination, s.iterations, s.final_energy, s.e_fci, s.error
    );
    if s.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "|E - E_FCI| = {:.3e} is not below {:.1e}",
            s.error.abs(),
            spec.energy_tol
        )))
    }
}

#[derive(Serialize)]
struct AggregateRow {
    value: f64,
    iters_to_converge: Option<usize>,
    final_error: Option<f64>,
    cum_pauli_exp: Option<usize>,
    cum_circuits: Option<usize>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    r: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_hf: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_fci: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_cqe: Option<Option<f64>>,
    status: String,
}

struct SubRun {
    label: String,
    value: f64,
    fcidump: PathBuf,
}

pub fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let base = Manifest::from_flags(&args.common, Some(&args.solver))?;
    base.resolve()?;
    let var = args.variable;
    let mut runs: Vec<SubRun> = match var {
        SweepVar::Geometry => {
            let dir = match (&args.dir, &base.fcidump) {
                (Some(d), _) => d.clone(),
                (None, Some(f)) => f.parent().map(Path::to_path_buf).unwrap_or_default(),
                (None, None) => PathBuf::from("fixtures"),
            };
            let files = geometry_files(&dir)?;
            if files.is_empty() {
                return Err(Failure::Usage(anyhow!("no h3_R_<value>.fcidump files in {}", dir.display())));
            }
            let mut picked = Vec::new();
            for (tok, v, p) in files {
                if args.values.is_empty() || args.values.iter().any(|x| (x - v).abs() < 1e-9) {
                    picked.push(SubRun { label: tok, value: v, fcidump: p });
                }
            }
            for x in &args.values {
                if !picked.iter().any(|s| (s.value - x).abs() < 1e-9) {
                    return Err(Failure::Usage(anyhow!("no fixture for R = {x} in {}", dir.display())));
                }
            }
            picked
        }
        SweepVar::M | SweepVar::Threshold => {
            if args.values.is_empty() {
                return Err(Failure::Usage(anyhow!("--values is required for a {} sweep", var.name())));
            }
            let f = base.fcidump()?.to_path_buf();
            args.values
                .iter()
                .map(|&v| {
                    if var == SweepVar::M && (v.fract() != 0.0 || v < 0.0) {
                        return Err(Failure::Usage(anyhow!("M values must be whole numbers, got {v}")));
                    }
                    Ok(SubRun { label: v.to_string(), value: v, fcidump: f.clone() })
                })
                .collect::<Result<_, _>>()?
        }
    };
    runs.sort_by(|a, b| a.value.total_cmp(&b.value));

    let out = base.out_dir();
    create_dir(&out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| Failure::Usage(e.into()))?;
    let results: Vec<Result<(RunSummary, CqeTrace), Failure>> = pool.install(|| {
        runs.par_iter()
            .map(|s| {
                let mut m = base.clone();
                m.fcidump = Some(s.fcidump.clone());
                match var {
                    SweepVar::M => {
                        m.m = Some(s.value as usize);
                        m.m_schedule = None;
                    }
                    SweepVar::Threshold => m.tau = Some(s.value),
                    SweepVar::Geometry => {}
                }
                let spec = m.resolve()?;
                let sys = System::load(&s.fcidump, m.sector)?;
                let dir = out.join(format!("{}_{}", var.name(), s.label));
                info!("sweep {} = {} -> {}", var.name(), s.label, dir.display());
                execute(&sys, &spec, m.experiment.clone(), &dir, args.solver.timing)
            })
            .collect()
    });

    let geometry = var == SweepVar::Geometry;
    let mut w = csv::Writer::from_path(out.join("aggregate.csv"))
        .with_context(|| format!("cannot create {}", out.join("aggregate.csv").display()))
        .map_err(Failure::Usage)?;
    let mut first_failure = None;
    let mut plots = [Vec::new(), Vec::new(), Vec::new()];
    let mut dissociation = [Vec::new(), Vec::new(), Vec::new()];
    for (s, res) in runs.iter().zip(results) {
        let row = match res {
            Ok((sum, trace)) => {
                let at = trace
                    .record_at_accuracy(sum.e_fci, sum.config.energy_tol)
                    .unwrap_or_else(|| trace.records.last().expect("nonempty trace"));
                let label = format!("_{}={}", var.name(), s.label);
                plots[0].push(series(&trace, sum.e_fci, "iter", &label, |r| r.iteration as f64));
                plots[1].push(series(&trace, sum.e_fci, "cum_pauli_exp", &label, |r| r.cum_pauli_exp as f64));
                plots[2].push(series(&trace, sum.e_fci, "cum_circuits", &label, |r| r.cum_circuits as f64));
                dissociation[0].push((s.value, sum.e_hf));
                dissociation[1].push((s.value, sum.e_fci));
                dissociation[2].push((s.value, sum.final_energy));
                println!(
                    "{} = {}: {:?}, error {:.3e}, iterations to {:.0e}: {}",
                    var.name(),
                    s.label,
                    sum.termination,
                    sum.error,
                    sum.config.energy_tol,
                    sum.iters_to_converge.map_or("-".into(), |i| i.to_string())
                );
                AggregateRow {
                    value: s.value,
                    iters_to_converge: sum.iters_to_converge,
                    final_error: Some(sum.error),
                    cum_pauli_exp: Some(at.cum_pauli_exp),
                    cum_circuits: Some(at.cum_circuits),
                    r: geometry.then_some(sum.geometry),
                    e_hf: geometry.then_some(Some(sum.e_hf)),
                    e_fci: geometry.then_some(Some(sum.e_fci)),
                    e_cqe: geometry.then_some(Some(sum.final_energy)),
                    status: if sum.converged { "converged" } else { "not_converged" }.into(),
                }
            }
            Err(f) => {
                let msg = format!("{:#}", f.error());
                eprintln!("{} = {}: failed: {msg}", var.name(), s.label);
                let row = AggregateRow {
                    value: s.value,
                    iters_to_converge: None,
                    final_error: None,
                    cum_pauli_exp: None,
                    cum_circuits: None,
                    r: geometry.then_some(Some(s.value)),
                    e_hf: geometry.then_some(None),
                    e_fci: geometry.then_some(None),
                    e_cqe: geometry.then_some(None),
                    status: format!("failed: {msg}"),
                };
                first_failure.get_or_insert(f);
                row
            }
        };
        w.serialize(row).map_err(|e| Failure::Usage(e.into()))?;
    }
    w.flush().map_err(|e| Failure::Usage(e.into()))?;

    let plot = |name: &str, s: &[Series]| write_series_csv(&out.join(name), s).map_err(Failure::Usage);
    if geometry {
        let names = ["e_hf", "e_fci", "e_cqe"];
        let s: Vec<Series> = names
            .iter()
            .zip(dissociation)
            .map(|(n, points)| Series {
                x_name: format!("R_{n}"),
                y_name: n.to_string(),
                points,
            })
            .collect();
        plot("plot_dissociation.csv", &s)?;
    }
    let [by_iter, by_depth, by_circuits] = plots;
    plot("plot_convergence.csv", &by_iter)?;
    plot("plot_depth.csv", &by_depth)?;
    plot("plot_circuits.csv", &by_circuits)?;
    first_failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct Golden {
    e_fci: f64,
    e_hf: f64,
}

pub fn report(args: ReportArgs) -> Result<(), Failure> {
    let files = geometry_files(&args.dir)?;
    if files.is_empty() {
        return Err(Failure::Usage(anyhow!("no h3_R_<value>.fcidump files in {}", args.dir.display())));
    }
    let mut golden = BTreeMap::new();
    for (tok, _, p) in files {
        let sys = System::load(&p, None)?;
        println!("R = {tok}: E_FCI = {:.12}, E_HF = {:.12}", sys.e_fci, sys.e_hf);
        golden.insert(tok, Golden { e_fci: sys.e_fci, e_hf: sys.e_hf });
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_json(&args.out, &golden).map_err(Failure::Usage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_from_file_name() {
        assert_eq!(geometry_of(Path::new("x/h3_R_0.7.fcidump")), Some(("0.7".into(), 0.7)));
        assert_eq!(geometry_of(Path::new("h2_R_0.7414.fcidump")), Some(("0.7414".into(), 0.7414)));
        assert_eq!(geometry_of(Path::new("h3.fcidump")), None);
    }
}
