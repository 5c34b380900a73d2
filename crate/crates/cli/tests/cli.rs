use std::process::{Command, Output};

use serde_json::Value;

fn cxmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cxmetric")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn type_agrees_across_methods() {
    let out = cxmetric(&["type", "--domain", "cxellipsoid:2,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["taylor"]["m"], 4);
    assert_eq!(v["regression"]["m"], 4);
    assert_eq!(v["consistent"], true);
}

#[test]
fn radius_slope_on_the_ball() {
    let out = cxmetric(&["radius", "--domain", "ball:2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let slope = v["scaling"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.02, "slope {slope}");
    assert_eq!(v["m_estimate"], 2);
}

#[test]
fn bounds_with_upper_are_ordered() {
    let out = cxmetric(&["bounds", "--upper", "--count", "8", "--delta-max", "1e-2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let rows = v["bounds"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let lower = row["lower"].as_f64().unwrap();
        let upper = row["upper"].as_f64().unwrap();
        assert!(lower > 0.0 && lower <= upper, "{lower} {upper}");
        assert_eq!(row["candidate"]["provenance"], "tangential_exp_limit");
    }
}

#[test]
fn normal_bounds_are_one_over_six_delta() {
    let out = cxmetric(&["bounds", "--dir", "normal", "--count", "8"]);
    assert_eq!(out.status.code(), Some(0));
    for row in json_stdout(&out)["bounds"].as_array().unwrap() {
        let delta = row["delta"].as_f64().unwrap();
        let lower = row["lower"].as_f64().unwrap();
        assert!((lower * 6.0 * delta - 1.0).abs() < 1e-10);
        assert_eq!(row["candidate"]["provenance"], "normal_eq416");
    }
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ball.csv");
    let json = dir.path().join("ball.json");
    for path in [&csv, &json] {
        let out = cxmetric(&["sweep", "--domain", "ball:2", "--seed", "3", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "delta,lower,upper,oracle,m_used,theta_star,R_xi,grad_ratio");
    assert_eq!(lines.count(), 16);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["schema"], "v1");
    let slope = report["exponent_upper"]["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.02, "slope {slope}");
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("run{i}.json"))).collect();
    for p in &paths {
        let out = cxmetric(&["sweep", "--domain", "cxellipsoid:2,1", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn verify_passes_for_constructed_candidates() {
    let out = cxmetric(&["verify", "--domain", "ball:2", "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let candidates = v["candidates"].as_array().unwrap();
    assert_eq!(candidates.len(), 3);
    assert!(candidates.iter().all(|c| c["report"]["passed"] == true));
}

#[test]
fn bnw_constants_are_positive() {
    let out = cxmetric(&["bnw", "--m", "3", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["all_positive"], true);
    assert!(v["min_constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["sweep", "--count", "3"][..],
        &["type", "--domain", "torus:2"],
        &["radius", "--delta-min", "0.5", "--delta-max", "0.1"],
        &["bounds", "--point", "0,0.5"],
        &["type", "--dir", "tangent:5"],
        &["sweep", "--methods", "magic"],
        &["bnw", "--m", "1"],
        &["sweep", "--bogus-flag"],
    ] {
        let out = cxmetric(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn custom_json_domain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quartic.json");
    // |z1|^4 + |z2|^2 - 1
    let spec = r#"{"n": 2, "rho": [
        {"coeff": 1.0, "powers": [[2, 2], [0, 0]]},
        {"coeff": 1.0, "powers": [[0, 0], [1, 1]]},
        {"coeff": -1.0, "powers": [[0, 0], [0, 0]]}
    ]}"#;
    std::fs::write(&path, spec).unwrap();
    let out = cxmetric(&["type", "--domain", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_stdout(&out)["taylor"]["m"], 4);
}
