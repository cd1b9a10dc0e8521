//! End-to-end runs of the `fockfilter` binary.

// CLI output is rounded to six significant digits, so 0.707107 is intended.
#![allow(clippy::approx_constant)]

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockfilter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("circuits")
        .join(name)
        .display()
        .to_string()
}

fn pair(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn operator_diagonal() {
    let v = json(&["operator"]);
    let m = &v["matrix"];
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == j && (i == 0 || i == 3) { 0.25 } else { 0.0 };
            assert_eq!(pair(&m[i][j]), (expected, 0.0), "({i}, {j})");
        }
    }
    assert_eq!(v["acceptance"]["HH"], 0.0625);
    assert_eq!(v["acceptance"]["HV"], 0.0);
    assert_eq!(v["compensation_phase"], 0.0);
}

#[test]
fn operator_without_attenuator() {
    let v = json(&["operator", "--attenuator-r", "0"]);
    assert_eq!(pair(&v["matrix"][3][3]), (0.5, 0.0));
    assert_eq!(pair(&v["matrix"][0][0]), (0.25, 0.0));
}

#[test]
fn operator_csv_shape() {
    let out = run(&["operator", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 8);
    }
}

#[test]
fn invalid_attenuator_is_usage_error() {
    let out = run(&["operator", "--attenuator-r", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn entangle_scenario() {
    let v = json(&["scenario", "entangle"]);
    assert_eq!(v["acceptance"], 0.03125);
    assert_eq!(v["concurrence"], 1.0);
    let out = v["output"].as_array().unwrap();
    assert_eq!(out.len(), 2);
    for (term, label) in out.iter().zip(["HH", "VV"]) {
        assert_eq!(term["label"], label);
        assert_eq!(pair(&term["amplitude"]), (0.707107, 0.0));
    }
}

#[test]
fn ghz4_scenario_text() {
    let out = run(&["scenario", "ghz4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("HHHH: [0.707107, 0]"), "{text}");
    assert!(text.contains("acceptance: 0.03125"), "{text}");
}

#[test]
fn encode2_scenario() {
    let v = json(&["scenario", "encode2", "--ch", "0.6", "--cv", "0.8"]);
    let out = v["output"].as_array().unwrap();
    assert_eq!(pair(&out[0]["amplitude"]), (0.6, 0.0));
    assert_eq!(pair(&out[1]["amplitude"]), (0.8, 0.0));
    assert_eq!(v["acceptance"], 0.03125);
}

#[test]
fn negative_and_complex_coefficients() {
    let v = json(&["scenario", "encode3", "--ch", "0.6i", "--cv", "-0.8"]);
    let out = v["output"].as_array().unwrap();
    assert_eq!(out[0]["label"], "HHH");
    assert_eq!(pair(&out[0]["amplitude"]), (0.0, 0.6));
    assert_eq!(pair(&out[1]["amplitude"]), (-0.8, 0.0));
}

#[test]
fn unnormalized_qubit_is_usage_error() {
    let out = run(&["scenario", "encode2", "--ch", "1", "--cv", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_scenario_is_usage_error() {
    let out = run(&["scenario", "teleport"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_scenario_is_deterministic() {
    let a = run(&["scenario", "max-entangled", "--seed", "42", "--format", "json"]);
    let b = run(&["scenario", "max-entangled", "--seed", "42", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["concurrence"], 1.0);
}

#[test]
fn error_analysis_reference_point() {
    let v = json(&["error-analysis", "--eta", "0.88"]);
    let s = &v["simulated"];
    assert_eq!(s["misread_2_as_1"], 0.2112);
    let hv = s["hv_error_rate"].as_f64().unwrap();
    assert!((0.04..=0.06).contains(&hv));
    assert_eq!(s["dark_counts_per_pulse"], 1e-5);
    assert_eq!(v["reference"]["misread_2_as_1"], 0.19);
    assert_eq!(v["reference"]["mixture_entangled_fraction"], 0.7);
}

#[test]
fn error_analysis_ideal_limit() {
    let v = json(&["error-analysis", "--eta", "1.0"]);
    let s = &v["simulated"];
    for key in ["misread_2_as_1", "hv_error_rate", "false_transmission_prob", "mixture_single_photon_fraction"] {
        assert_eq!(s[key], 0.0, "{key}");
    }
}

#[test]
fn error_analysis_side_by_side_text() {
    let out = run(&["error-analysis", "--dark-rate", "1e4", "--window", "1e-9"]);
    let text = stdout(&out);
    assert!(text.contains("reference"), "{text}");
    let line = text.lines().find(|l| l.starts_with("dark_counts_per_pulse")).unwrap();
    assert!(line.contains("0.00001"), "{line}");
}

#[test]
fn error_analysis_invalid_eta() {
    assert_eq!(run(&["error-analysis", "--eta", "1.2"]).status.code(), Some(2));
    assert_eq!(run(&["error-analysis", "--window", "-1"]).status.code(), Some(2));
}

#[test]
fn sweep_is_ordered() {
    let v = json(&["sweep", "--eta-from", "0.8", "--eta-to", "1.0", "--steps", "5"]);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let etas: Vec<f64> = rows.iter().map(|r| r["eta"].as_f64().unwrap()).collect();
    assert!(etas.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(rows[4]["hv_error_rate"], 0.0);
    let csv = stdout(&run(&["sweep", "--steps", "3", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn circuit_filter_fixture() {
    let v = json(&["circuit", &fixture("filter.json"), "--polarization", "HH"]);
    assert_eq!(v["acceptance"], 0.0625);
    let v = json(&["circuit", &fixture("filter.json"), "--input", "p1H,p2V"]);
    assert_eq!(v["acceptance"], 0.0);
}

#[test]
fn circuit_bs_fixture_bunches() {
    let v = json(&["circuit", &fixture("bs_half.json")]);
    let terms = v["branches"][0]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    for t in terms {
        assert_eq!(pair(&t["amplitude"]), (0.0, 0.707107));
        assert_eq!(t["occupation"].as_object().unwrap().values().next().unwrap(), 2);
    }
}

#[test]
fn circuit_mz_fixture() {
    let v = json(&["circuit", &fixture("mz_core.json")]);
    assert_eq!(v["acceptance"], 0.0625);
    let v = json(&["circuit", &fixture("mz_core.json"), "--input", "h1"]);
    assert_eq!(v["acceptance"], 0.0);
    assert!(v["branches"].as_array().unwrap().is_empty());
}

#[test]
fn circuit_errors() {
    let dir = std::env::temp_dir().join(format!("fockfilter-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"modes\": [\"a\"],").unwrap();
    let out = run(&["circuit", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let undeclared = dir.join("undeclared.json");
    std::fs::write(
        &undeclared,
        r#"{"modes":["a"],"inputs":["a"],"outputs":["a"],"elements":[{"type":"phase","mode":"b","phi":0}]}"#,
    )
    .unwrap();
    let out = run(&["circuit", undeclared.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("element 0"));

    // overfilling a mode past its photon cap fails at run time
    let capped = dir.join("capped.json");
    std::fs::write(
        &capped,
        r#"{"modes":["a","b"],"inputs":["a","b"],"outputs":["a","b"],"elements":[{"type":"inject","mode":"a","photons":8}]}"#,
    )
    .unwrap();
    let out = run(&["circuit", capped.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(run(&["circuit", "/nonexistent/x.json"]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["circuit", &fixture("filter.json"), "--polarization", "VV", "--format", "csv"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
