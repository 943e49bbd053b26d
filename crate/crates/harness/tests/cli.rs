use std::fs;
use std::process::Command;

use wpt_harness::config::DEFAULT_SCENARIO;

fn wptlink(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wptlink")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn resonance_prints_capacitance() {
    let (code, out) = wptlink(&["resonance", "--inductance", "47uH"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("C = 33.4145 nF"), "{out}");
    let (_, json) = wptlink(&["--format", "json", "resonance", "-l", "24uH", "-f", "127kHz"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["capacitance_f"].as_f64().unwrap() - 65.4367e-9).abs() < 1e-13);
}

#[test]
fn bad_inputs_are_configuration_errors() {
    assert_eq!(wptlink(&["resonance", "--inductance", "47"]).0, 2);
    assert_eq!(wptlink(&["--config", "/nonexistent/scenario.cfg", "sweep"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, DEFAULT_SCENARIO.replace("l1 = 24uH", "l1 = -24uH")).unwrap();
    assert_eq!(wptlink(&["--config", path.to_str().unwrap(), "sweep"]).0, 2);
}

#[test]
fn sweep_writes_tables_and_regress_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _) = wptlink(&["--config", "table1", "--out", out, "sweep"]);
    assert_eq!(code, 0);
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 9);
    assert!(dir.path().join("sweep_status.csv").exists());

    let csv = dir.path().join("sweep.csv");
    let (code, fit) = wptlink(&["regress", "--input", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let slope: f64 = fit.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(slope < 0.0);
}

#[test]
fn sweep_failing_requirement_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strict.cfg");
    fs::write(&path, DEFAULT_SCENARIO.replace("v_min = 7V", "v_min = 70V")).unwrap();
    let (code, _) = wptlink(&["--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "sweep"]);
    assert_eq!(code, 1);
}

#[test]
fn dosimetry_reports_compliance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = wptlink(&["--out", dir.path().to_str().unwrap(), "--format", "json", "dosimetry"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["max_compliant_current_a"].as_f64().unwrap() > 1.0);
    let map = fs::read_to_string(dir.path().join("fieldmap.csv")).unwrap();
    assert_eq!(map.lines().next().unwrap(), "x_m,y_m,z_m,e_vpm,j_apm2,b_t");
}

#[test]
fn simulate_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) =
        wptlink(&["--config", "table1", "--out", dir.path().to_str().unwrap(), "simulate", "--distance", "1cm", "--duration", "1ms"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("f_lock_hz"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("t_s,i1_a"));
}
