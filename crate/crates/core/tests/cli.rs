use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn critset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critset")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn decompose_counts_simplices() {
    let dir = tempfile::tempdir().unwrap();
    let out = critset(&["decompose", "--d", "2", "--delta", "0.5", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cubes_per_axis"], 2);
    assert_eq!(v["simplices"], "16");
    let dump: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("simplices.json")).unwrap()).unwrap();
    assert!(dump.to_string().len() > 100);

    let out = critset(&["decompose", "--d", "3"]);
    assert_eq!(json(&out)["simplices"], "24");
    assert_eq!(critset(&["decompose", "--d", "0"]).status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_with_config_code() {
    assert_eq!(critset(&["bound", "--d", "2", "--eps", "0.1"]).status.code(), Some(2));
    assert_eq!(critset(&["bound", "--d", "2", "--modulus", "holder:1,1", "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(critset(&["perturb", "--d", "2", "--modulus", "holder:1,1", "--eps", "1"]).status.code(), Some(2));
}

#[test]
fn bound_reports_out_of_range_rows() {
    let out = critset(&["bound", "--d", "2", "--modulus", "holder:1,1", "--eps", "100,1e9", "--adversary"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["upper"]["theorem"].as_f64().unwrap() > 0.0);
    assert!(!rows[1]["errors"].as_array().unwrap().is_empty());
    assert_eq!(v["command"], "bound");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn bound_table_lists_each_epsilon() {
    let out = critset(&["bound", "--d", "2", "--modulus", "holder:1,0.5", "--eps", "0.1,0.01", "--table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 3, "{text}");
}

#[test]
fn runs_are_deterministic() {
    let args = ["perturb", "-f", "sin(3*x1)*cos(3*x2)", "--d", "2", "--modulus", "holder:18,1", "--eps", "3000", "--samples", "500", "--resolution", "64"];
    let a = critset(&args);
    let b = critset(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn affine_map_has_no_critical_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = critset(&[
        "perturb", "-f", "3*x1 - x2", "--d", "2", "--modulus", "holder:0,1", "--eps", "0.001", "--resolution", "32",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let row = &v["results"][0];
    assert_eq!(row["certificate"]["critical_set_free"], true);
    assert_eq!(row["measurement"]["unmasked"]["value"].as_f64(), Some(0.0));
    assert_eq!(row["c1_check"]["violations"], 0);
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
    assert!(dir.path().join("critical_set_0.csv").exists());
}

#[test]
fn high_dimension_measurement_is_reported_not_fatal() {
    let out = critset(&["perturb", "-f", "x1*x2 + x3*x4", "--d", "4", "--modulus", "holder:2,1", "--delta", "1", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let row = &v["results"][0];
    assert!(row["measurement"].is_null());
    assert!(!row["errors"].as_array().unwrap().is_empty());
    assert!(row["certificate"].is_object());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "d = 2\nepsilon = [0.5]\nseed = 3\n[modulus]\ntype = \"holder\"\nC = 1.0\nalpha = 1.0\n").unwrap();
    let cfg = path.to_str().unwrap();
    let v = json(&critset(&["bound", "--config", cfg]));
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["epsilon"][0], 0.5);
    let w = json(&critset(&["bound", "--config", cfg, "--eps", "0.25", "--seed", "4"]));
    assert_eq!(w["config"]["seed"], 4);
    assert_eq!(w["config"]["epsilon"][0], 0.25);
    assert_ne!(v["config_hash"], w["config_hash"]);
}

#[test]
fn measure_reports_critical_set_of_f() {
    let out = critset(&["measure", "-f", "(x1-0.5)^2 + x2", "--d", "2", "--resolution", "128"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let length = v["results"]["zero_set"]["value"].as_f64().unwrap();
    assert!((length - 1.0).abs() < 1e-9, "{length}");
}

#[test]
fn adversary_certificate_and_sheets() {
    let eps = 2f64.powi(-11).to_string();
    let out = critset(&["adversary", "--d", "1", "--modulus", "holder:1,1", "--eps", &eps, "--lines", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let row = &v["results"][0];
    assert_eq!(row["certificate"]["n0"], 2);
    assert_eq!(row["certificate"]["count_bound"], 18);
    assert!(row["sheets"]["count"].as_u64().unwrap() >= 18);

    let out = critset(&["adversary", "--d", "2", "--modulus", "holder:1,1", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(critset(&["adversary", "--d", "2", "--modulus", "estimate:8", "--eps", "0.001"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let out = critset(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}
