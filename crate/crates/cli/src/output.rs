use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use shadow_cqe::solver::CqeTrace;

#[derive(Serialize)]
struct TraceRow {
    iter: usize,
    energy: f64,
    residual_norm: f64,
    cum_pauli_exp: usize,
    cum_circuits: usize,
    eta_min: Option<f64>,
    eta_max: Option<f64>,
    wall_ms: f64,
}

pub fn write_trace_csv(path: &Path, trace: &CqeTrace, timing: bool) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    for r in &trace.records {
        let applied = r.etas.iter().copied().filter(|e| *e != 0.0);
        w.serialize(TraceRow {
            iter: r.iteration,
            energy: r.energy,
            residual_norm: r.residual_norm,
            cum_pauli_exp: r.cum_pauli_exp,
            cum_circuits: r.cum_circuits,
            eta_min: applied.clone().reduce(f64::min),
            eta_max: applied.reduce(f64::max),
            wall_ms: if timing { r.wall_time.as_secs_f64() * 1e3 } else { 0.0 },
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Named `(x, y)` series side by side, two columns each; shorter series are
/// padded with empty cells.
pub struct Series {
    pub x_name: String,
    pub y_name: String,
    pub points: Vec<(f64, f64)>,
}

pub fn write_series_csv(path: &Path, series: &[Series]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    let header: Vec<&str> = series
        .iter()
        .flat_map(|s| [s.x_name.as_str(), s.y_name.as_str()])
        .collect();
    w.write_record(&header)?;
    let rows = series.iter().map(|s| s.points.len()).max().unwrap_or(0);
    for i in 0..rows {
        let rec: Vec<String> = series
            .iter()
            .flat_map(|s| match s.points.get(i) {
                Some((x, y)) => [x.to_string(), y.to_string()],
                None => [String::new(), String::new()],
            })
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
