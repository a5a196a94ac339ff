use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lez(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lez")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn sudden_momentum() {
    let out = lez(&["ks", "0.5", "1.5"]);
    assert!(out.status.success());
    let v = json(&out);
    let closed = 2.0 * ((0.5f64 * 0.5).sqrt() / (1.5f64 * 2.5).sqrt()).atan();
    assert!((num(&v["k_s"]) - closed).abs() < 1e-14);
    assert!((num(&v["k_s"]) - 0.50536).abs() < 1e-5);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["metadata"]["command"], "ks");
}

#[test]
fn errors_are_json_with_exit_codes() {
    let same_phase = lez(&["ks", "0.5", "0.9"]);
    assert_eq!(same_phase.status.code(), Some(3));
    let v = json(&same_phase);
    assert_eq!(v["error"]["kind"], "no_real_solution");
    assert_eq!(v["error"]["exit_code"], 3);

    let odd = lez(&["oracle-check", "--N", "7"]);
    assert_eq!(odd.status.code(), Some(2));
    assert_eq!(json(&odd)["error"]["kind"], "invalid_parameter");

    let unknown = lez(&["ks", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(json(&unknown)["error"]["kind"], "usage");

    let no_root = lez(&[
        "find-tau", "--hi", "0.5", "--hf", "0.9", "--N", "50", "--k-index", "6", "--tau-min", "1e-3", "--tau-max", "1e3",
    ]);
    assert_eq!(no_root.status.code(), Some(3));
    assert_eq!(json(&no_root)["error"]["kind"], "no_root_in_range");
}

#[test]
fn critical_duration_of_a_chain_mode() {
    let v = json(&lez(&["find-tau", "--hi", "0.5", "--hf", "1.5", "--N", "50", "--k-index", "2"]));
    let tau = num(&v["tau_c"]);
    assert!((tau - 9.37734).abs() < 1e-4, "{tau}");
    assert!(num(&v["residual"]).abs() <= 1e-10);

    let small = lez(&["find-tau", "--hi", "0.25", "--hf", "2.25", "--N", "8", "--k-index", "1"]);
    assert!(small.status.success());
    assert!(num(&json(&small)["tau_c"]).is_finite());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"hi": 0.25, "hf": 2.25}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = json(&lez(&["ks", "--config", cfg]));
    assert_eq!(num(&from_file["h_i"]), 0.25);
    assert_eq!(num(&from_file["h_f"]), 2.25);

    let flagged = json(&lez(&["ks", "--config", cfg, "--hf", "1.5"]));
    assert_eq!(num(&flagged["h_i"]), 0.25);
    assert_eq!(num(&flagged["h_f"]), 1.5);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"hi": 0.25, "typo": 1}"#).unwrap();
    assert_eq!(lez(&["ks", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn trivial_quench_rate_is_zero() {
    let out = lez(&["rate-scan", "--hi", "0.7", "--hf", "0.7", "--N", "20", "--tau", "2", "--tf-max", "5", "--tf-step", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t_f,echo,rate,exact_zero\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    for row in rows {
        assert!(row[2].parse::<f64>().unwrap().abs() < 1e-12);
        assert_eq!(row[3], "0");
    }
}

#[test]
fn traces_written_to_files_with_sidecar_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rate.csv");
    let args = [
        "rate-scan", "--hi", "0.5", "--hf", "1.5", "--N", "50", "--tau", "1", "--tf-max", "3", "--out",
        path.to_str().unwrap(), "--emit-gnuplot",
    ];
    assert!(lez(&args).status.success());
    let first = std::fs::read(&path).unwrap();
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("rate.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["metadata"]["command"], "rate-scan");
    let plot = std::fs::read_to_string(dir.path().join("rate.gp")).unwrap();
    assert!(plot.contains("rate.csv"));

    assert!(lez(&args).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), first);
    assert!(Path::new(&path).exists());
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["dtop", "--hi", "0.5", "--hf", "1.5", "--N", "20", "--tau", "1.3", "--tf-max", "4"];
    let a = lez(&args);
    let b = lez(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("t_f,winding,winding_rounded\n"));
}

#[test]
fn oracle_check_agrees() {
    let v = json(&lez(&["oracle-check", "--N", "8"]));
    assert!(num(&v["max_abs_dev"]) <= 1e-4);
    assert_eq!(v["hilbert_dim"], 128);
}

#[test]
fn phase_boundary_values() {
    // Gap closes where |M| = 3√3 t2 |sin θ|.
    let v = json(&lez(&["phase-boundary", "--t2", "1", "--M", "4.5"]));
    let theta: Vec<f64> = v["theta_c"].as_array().unwrap().iter().map(num).collect();
    assert_eq!(theta.len(), 4);
    for t in theta {
        assert!((3.0 * 3f64.sqrt() * t.sin().abs() - 4.5).abs() < 1e-12);
    }
    let none = json(&lez(&["phase-boundary", "--t2", "1", "--M", "6"]));
    assert!(none["theta_c"].as_array().unwrap().is_empty());
}
