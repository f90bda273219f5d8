use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_framecheck"));
    cmd.args(args).arg("--out").arg(dir.join("out")).arg("--quiet");
    if let Some(c) = config {
        let path = dir.join("config.json");
        fs::write(&path, c).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn default_verify_passes() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["verify"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(d.path(), "report.json");
    assert_eq!(r["passed"], Value::Bool(true));
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.len() >= 20);
    for c in checks {
        assert!(c["identity"].as_str().is_some_and(|s| !s.is_empty()));
        if let Some(rate) = c["rate"].as_f64() {
            assert!((3.0..=5.0).contains(&rate), "{c}");
        }
    }
}

#[test]
fn zero_tolerance_fails_verify() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["verify"], Some(r#"{"tolerances": {"structure_dtheta1": 0}}"#));
    assert_eq!(o.status.code(), Some(1));
    let r = json(d.path(), "report.json");
    assert_eq!(r["passed"], Value::Bool(false));
    let failed: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == Value::Bool(false))
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["structure_dtheta1"]);
}

#[test]
fn sphere_verify_is_a_precondition_error() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["verify"], Some(r#"{"surface": {"kind": "sphere", "radius": 1.0}}"#));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("precondition"), "{}", stderr(&o));
}

#[test]
fn config_errors_name_the_field() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["verify"], Some("{\n  \"net\": {\"a\": \"wide\"}\n}"));
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("net.a") && e.contains("line 2"), "{e}");

    let o = run(d.path(), &["verify"], Some(r#"{"tolerances": {"made_up": 1.0}}"#));
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["net"], Some(r#"{"net": {"n": 7}}"#));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn surface_info_reports_curvature() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["surface-info"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = json(d.path(), "report.json");
    let k = &r["gaussian_curvature"];
    assert!((k["min"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert!((k["max"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert!(r["notices"].as_array().unwrap().is_empty());

    let o = run(d.path(), &["surface-info"], Some(r#"{"surface": {"kind": "sphere"}}"#));
    assert_eq!(o.status.code(), Some(0));
    let r = json(d.path(), "report.json");
    assert!((r["gaussian_curvature"]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r["alpha"], Value::Null);
    assert!(!r["notices"].as_array().unwrap().is_empty());

    let o = run(d.path(), &["surface-info"], Some(r#"{"surface": {"kind": "plane"}}"#));
    assert_eq!(o.status.code(), Some(0));
    let r = json(d.path(), "report.json");
    assert_eq!(r["gaussian_curvature"]["max"].as_f64(), Some(0.0));
    assert!(r["notices"][0].as_str().unwrap().contains("unavailable"));
}

#[test]
fn net_csv_is_complete_and_deterministic() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"net": {"a": 0.5, "n": 50}}"#;
    assert_eq!(run(d.path(), &["net"], Some(cfg)).status.code(), Some(0));
    let first = fs::read(d.path().join("out/net.csv")).unwrap();
    let summary = fs::read(d.path().join("out/net_summary.json")).unwrap();
    assert_eq!(run(d.path(), &["net"], Some(cfg)).status.code(), Some(0));
    assert_eq!(first, fs::read(d.path().join("out/net.csv")).unwrap());
    assert_eq!(summary, fs::read(d.path().join("out/net_summary.json")).unwrap());

    let mut rdr = csv::Reader::from_reader(first.as_slice());
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["i", "j", "x1", "x2", "u", "v", "theta", "valid"]
    );
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows += 1;
        if &rec[7] == "true" {
            let theta: f64 = rec[6].parse().unwrap();
            assert!(theta > 0.0 && theta < PI);
        }
    }
    assert!(rows <= 51 * 51);
}

#[test]
fn zero_width_net_is_a_single_row() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["net"], Some(r#"{"net": {"a": 0}}"#));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(d.path().join("out/net.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,0,0.00000000000e0,0.00000000000e0,1.50000000000e0,"));
}

#[test]
fn empty_net_reports_a_hint() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{
        "surface": {"kind": "custom", "x": "sech(u)*cos(v)", "y": "sech(u)*sin(v)", "z": "u - tanh(u)",
                    "domain": [1.0, 1.02, 0.0, 0.02]},
        "grid": {"domain": [1.0, 1.02, 0.0, 0.02], "n": 4},
        "net": {"origin": [1.01, 0.01], "a": 0.5, "n": 4}
    }"#;
    let o = run(d.path(), &["net"], Some(cfg));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("largest valid a"), "{}", stderr(&o));
}

#[test]
fn area_with_missing_corners_fails_with_hint() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["area"], Some(r#"{"net": {"origin": [0.3, 0.0], "a": 0.5, "n": 20}}"#));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("largest valid a"));
}

#[test]
fn area_on_default_net() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["area"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = json(d.path(), "report.json");
    assert!(r["area"]["relative_difference"].as_f64().unwrap() < 1e-4);
    assert!(r["area"]["corner_area"].as_f64().unwrap() < 2.0 * PI);
}

#[test]
fn hyperbolic_table() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["hyperbolic"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(d.path(), "hyperbolic.json");
    let rows = r["disk_area"].as_array().unwrap();
    let crit = rows
        .iter()
        .find(|row| (row["t"].as_f64().unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15)
        .unwrap();
    assert!((crit["quadrature"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-6 * 2.0 * PI);
    let last = rows.last().unwrap();
    assert_eq!(last["t"].as_f64(), Some(0.999));
    assert!(last["ratio_to_2pi"].as_f64().unwrap() > 900.0);
    for row in rows {
        assert!(row["invariance_residual"].as_f64().unwrap() < 1e-12);
    }
    let picard = r["picard"].as_array().unwrap();
    assert_eq!(picard.len(), 6);
    assert!(picard.iter().all(|p| p["certified"] == Value::Bool(true)));
}

#[test]
fn format_override_limits_outputs() {
    let d = TempDir::new().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_framecheck"));
    let out = d.path().join("out");
    let o = cmd
        .args(["net", "--quiet", "--format", "csv", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("net.csv").exists());
    assert!(!out.join("net_summary.json").exists());
}

#[test]
fn json_floats_have_seventeen_digits() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["net"], Some(r#"{"net": {"a": 0}}"#));
    let text = fs::read_to_string(d.path().join("out/net_summary.json")).unwrap();
    assert!(text.contains("\"a\": 0.0000000000000000e0"), "{text}");
}
