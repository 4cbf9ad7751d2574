use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shadow-cqe"));
    c.env_remove("SHADOW_CQE_SEED").env("RUST_LOG", "error");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fci_on_h2_orders_energies() {
    let out = tempfile::tempdir().unwrap();
    let f = fixture("h2_R_0.7414.fcidump");
    let o = run(&["fci", "--fcidump", f.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.path().join("fci.json")).unwrap()).unwrap();
    let (e_fci, e_hf) = (v["e_fci"].as_f64().unwrap(), v["e_hf"].as_f64().unwrap());
    assert!(e_hf >= e_fci);
    assert!((e_fci + 1.137270174661).abs() < 1e-9);
    assert_eq!(v["sector"], serde_json::json!([1, 1]));
}

#[test]
fn missing_file_names_the_path() {
    let o = run(&["fci", "--fcidump", "no/such/h2.fcidump"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no/such/h2.fcidump"), "{}", stderr(&o));
}

#[test]
fn malformed_header_cites_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("h2_R_0.7414.fcidump")).unwrap();
    let broken = text.replacen("NELEC= 2,", "", 1);
    assert_ne!(broken, text);
    let p = dir.path().join("broken.fcidump");
    fs::write(&p, broken).unwrap();
    let o = run(&["fci", "--fcidump", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NELEC"), "{}", stderr(&o));
}

#[test]
fn zero_shadows_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("h2_R_0.7414.fcidump");
    let o = run(&["run", "--fcidump", f.to_str().unwrap(), "--m", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("m_shadows"), "{}", stderr(&o));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(run(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--sector", "2"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn repeated_run_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let f = fixture("h2_R_0.7414.fcidump");
    fs::write(
        &manifest,
        serde_json::json!({"fcidump": f, "m": 3, "mode": "shots", "shots": 2000, "max_iters": 5, "seed": 11}).to_string(),
    )
    .unwrap();
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    for o in &outs {
        let r = run(&["run", "--manifest", manifest.to_str().unwrap(), "--out", o.to_str().unwrap()]);
        assert!(matches!(r.status.code(), Some(0 | 3)), "{}", stderr(&r));
    }
    for name in ["trace.csv", "summary.json", "plot.csv"] {
        let a = fs::read(outs[0].join(name)).unwrap();
        let b = fs::read(outs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    let csv = fs::read_to_string(outs[0].join("trace.csv")).unwrap();
    assert!(csv.starts_with("iter,energy,residual_norm,cum_pauli_exp,cum_circuits,eta_min,eta_max,wall_ms\n"));
}

#[test]
fn flags_override_manifest_and_env_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let f = fixture("h2_R_0.7414.fcidump");
    fs::write(&manifest, serde_json::json!({"fcidump": f, "m": 3, "max_iters": 2, "delta": 0.05}).to_string()).unwrap();
    let out = dir.path().join("o");
    let o = bin()
        .args(["run", "--manifest", manifest.to_str().unwrap(), "--m", "4", "--out", out.to_str().unwrap()])
        .env("SHADOW_CQE_SEED", "42")
        .output()
        .unwrap();
    assert!(matches!(o.status.code(), Some(0 | 3)), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["m"], 4);
    assert_eq!(v["config"]["delta"], 0.05);
    assert_eq!(v["config"]["seed"], 42);
}

#[test]
fn run_exit_code_tracks_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("h3_R_0.7.fcidump");
    let ok = run(&["run", "--fcidump", f.to_str().unwrap(), "--update", "full", "--out", dir.path().join("a").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let short = run(&[
        "run", "--fcidump", f.to_str().unwrap(), "--update", "full", "--max-iters", "1",
        "--out", dir.path().join("b").to_str().unwrap(),
    ]);
    assert_eq!(short.status.code(), Some(3));
}

#[test]
fn sweep_aggregate_is_sorted_and_matches_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("h2_R_0.7414.fcidump");
    let o = run(&[
        "sweep", "--var", "m", "--values", "5,1,3", "--fcidump", f.to_str().unwrap(),
        "--max-iters", "5", "--jobs", "2", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("aggregate.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "value");
    assert_eq!(&headers[2], "final_error");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let values: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(values, vec![1.0, 3.0, 5.0]);
    for (r, m) in rows.iter().zip(["1", "3", "5"]) {
        let s: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("m_{m}/summary.json"))).unwrap()).unwrap();
        assert_eq!(r[2].parse::<f64>().unwrap(), s["error"].as_f64().unwrap());
    }
}

#[test]
fn sweep_records_failed_runs_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("h2_R_0.7414.fcidump");
    let o = run(&[
        "sweep", "--var", "m", "--values", "0,2", "--fcidump", f.to_str().unwrap(),
        "--max-iters", "2", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
    let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    let lines: Vec<&str> = agg.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("failed"), "{agg}");
    assert!(!lines[2].contains("failed"), "{agg}");
    assert!(dir.path().join("m_2/summary.json").exists());
}

#[test]
fn geometry_sweep_lists_dissociation_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep", "--var", "geometry", "--values", "0.7,2.5", "--dir", fixture("").to_str().unwrap(),
        "--update", "full", "--start", "hf", "--max-iters", "3", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert!(agg.starts_with("value,iters_to_converge,final_error,cum_pauli_exp,cum_circuits,R,e_hf,e_fci,e_cqe,status\n"));
    assert_eq!(agg.lines().count(), 3);
    assert!(dir.path().join("plot_dissociation.csv").exists());
}

#[test]
fn report_reproduces_committed_golden_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("golden.json");
    let o = run(&["report", "--dir", fixture("").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fresh: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let committed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture("golden.json")).unwrap()).unwrap();
    let fresh = fresh.as_object().unwrap();
    assert_eq!(fresh.len(), 6);
    for (geom, v) in committed.as_object().unwrap() {
        for key in ["e_fci", "e_hf"] {
            let (a, b) = (fresh[geom][key].as_f64().unwrap(), v[key].as_f64().unwrap());
            assert!((a - b).abs() < 1e-10, "{geom} {key}: {a} vs {b}");
        }
    }
}
