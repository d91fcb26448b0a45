use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn volflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volflow")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

/// Residuals only; wall times differ between runs.
fn residuals(v: &Value) -> Vec<(String, String)> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (format!("{}:{}", c["name"], c["n"]), c["max_residual"].to_string()))
        .collect()
}

#[test]
fn verify_passes_on_full_range() {
    let o = volflow(&["verify", "--n", "2..5", "--trials", "200", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["max_residual"].as_f64().unwrap() < 1e-9, "{c}");
    }
}

#[test]
fn verify_is_deterministic() {
    let a = json(&volflow(&["verify", "--n", "2", "--trials", "1", "--seed", "0"]));
    let b = json(&volflow(&["verify", "--n", "2", "--trials", "1", "--seed", "0"]));
    assert_eq!(residuals(&a), residuals(&b));
    let c = json(&volflow(&["verify", "--n", "2", "--trials", "1", "--seed", "1"]));
    assert_ne!(residuals(&a), residuals(&c));
}

#[test]
fn thread_count_does_not_change_residuals() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_volflow"))
            .args(["compare", "--n", "2..4", "--trials", "30", "--seed", "9"])
            .env("VOLFLOW_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        residuals(&json(&o))
    };
    assert_eq!(run("1"), run("4"));
    let o = Command::new(env!("CARGO_BIN_EXE_volflow"))
        .args(["verify", "--n", "2"])
        .env("VOLFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn tiny_tolerance_fails_with_code_1() {
    let o = volflow(&["verify", "--n", "2", "--trials", "2", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["pass"], false);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["max_residual"].as_f64().unwrap() > 0.0));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&volflow(&["verify", "--n", "1"])), 2);
    assert_eq!(code(&volflow(&["verify", "--trials", "0"])), 2);
    assert_eq!(code(&volflow(&["verify", "--format", "xml"])), 2);
    assert_eq!(code(&volflow(&["verify", "--tol", "-1"])), 2);
    assert_eq!(code(&volflow(&["rate"])), 2);
    assert_eq!(code(&volflow(&["rate", "--input", "/nonexistent/jets.json"])), 2);
    assert_eq!(code(&volflow(&["nonsense"])), 2);
}

#[test]
fn compare_reports_calibrated_signs() {
    for n in ["2", "3", "5"] {
        let o = volflow(&["compare", "--n", n, "--trials", "100"]);
        assert_eq!(code(&o), 0, "n={n}: {}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert!(v["notes"].as_array().unwrap().iter().any(|s| s.as_str().unwrap().contains("calibrated sign -1")));
    }
}

#[test]
fn veronese_prints_matrices() {
    let o = volflow(&["veronese", "--n", "4", "--trials", "20"]);
    assert_eq!(code(&o), 0);
    let notes = json(&o)["notes"].clone();
    assert_eq!(notes[0], "sigma_4(H) = [[3, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -3]]");
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS veronese_trace n=4"));
}

const HODGSON: &str = r#"{"n": 2, "cusps": [{"hodgson": {"l1": 0.7, "theta1": 0.2, "l2": 1.9, "theta2": -0.4,
    "dl1": 0.1, "dtheta1": 0.8, "dl2": -0.3, "dtheta2": 0.25}}]}"#;

const UNIPOTENT: &str = r#"{"n": 3, "cusps": [{
    "a":  [[[0,0],[1,2],[3,0]], [[0,0],[0,0],[0.5,0.5]], [[0,0],[0,0],[0,0]]],
    "b":  [[[0,0],[0,1],[0,0]], [[0,0],[0,0],[2,0]], [[0,0],[0,0],[0,0]]],
    "da": [[[0,0],[4,0],[1,1]], [[0,0],[0,0],[0,-3]], [[0,0],[0,0],[0,0]]],
    "db": [[[0,0],[1,1],[0,0]], [[0,0],[0,0],[1,0]], [[0,0],[0,0],[0,0]]]
}]}"#;

fn cusp(a: f64, b: f64, da: f64, db: f64) -> String {
    let d = |x: f64, y: f64| format!(r#"{{"diag": [[{x}, {y}], [{}, {}]]}}"#, -x, -y);
    format!(r#"{{"a": {}, "b": {}, "da": {}, "db": {}}}"#, d(a, 0.3), d(b, -0.2), d(0.1, da), d(-0.4, db))
}

#[test]
fn rate_fixtures() {
    let dir = tempfile::tempdir().unwrap();

    let o = volflow(&["rate", "--input", &write(dir.path(), "h.json", HODGSON)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let expected = 0.5 * (1.9 * 0.8 - 0.7 * 0.25);
    assert!((v["total"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((v["cusps"][0]["hodgson"].as_f64().unwrap() - expected).abs() < 1e-15);
    assert!(v["difference"].as_f64().unwrap() < 1e-12);

    let o = volflow(&["rate", "--input", &write(dir.path(), "u.json", UNIPOTENT)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["total"].as_f64().unwrap(), 0.0);

    let (c1, c2) = (cusp(0.5, 1.2, 0.7, -0.3), cusp(-0.8, 0.4, 0.2, 0.9));
    let single = |c: &str, name: &str| {
        let o = volflow(&["rate", "--input", &write(dir.path(), name, &format!(r#"{{"n": 2, "cusps": [{c}]}}"#))]);
        json(&o)["total"].as_f64().unwrap()
    };
    let both = json(&volflow(&[
        "rate",
        "--input",
        &write(dir.path(), "two.json", &format!(r#"{{"n": 2, "cusps": [{c1}, {c2}]}}"#)),
    ]));
    let sum = single(&c1, "one.json") + single(&c2, "other.json");
    assert!((both["total"].as_f64().unwrap() - sum).abs() < 1e-14);
    assert_eq!(both["cusps"].as_array().unwrap().len(), 2);
}

#[test]
fn rate_schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"{"n": 2, "cusps": [{"a": {"diag": [[0,0],[0,0]]}, "b": {"diag": [[0,0],[0,0]]},
        "da": {"diag": [[0,0],[0,0]]}, "db": [[[0,0],[0,0]], [[1,0],[0,0]]]}]}"#;
    let o = volflow(&["rate", "--input", &write(dir.path(), "bad.json", bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cusps[0].db"));
    let o = volflow(&["rate", "--input", &write(dir.path(), "junk.json", "not json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn rate_csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.csv");
    let o = volflow(&[
        "rate",
        "--input",
        &write(dir.path(), "h.json", HODGSON),
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("cusp,rate,zeta,hodgson\n0,"));
}

#[test]
fn fig8_radial_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.json", r#"{"u0": [0.1, 0.05], "kind": "radial", "samples": 33}"#);
    let o = volflow(&["fig8", "--input", &input]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 33);
    let slope = v["quartic"]["slope"].as_f64().unwrap();
    assert!(slope > 3.5 && slope < 4.5, "slope {slope}");
    assert!(v["summary"]["tau"][1].as_f64().unwrap() > 0.0);

    let o = volflow(&["fig8", "--input", &input, "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u_re,u_im,v_re,v_im,vol,rate,rate_fd,int_rate"));
    assert_eq!(lines.count(), 33);
    assert!(!text.contains(';'));
}

#[test]
fn fig8_zero_and_malformed_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = volflow(&[
        "fig8",
        "--input",
        &write(dir.path(), "z.json", r#"{"u0": [0, 0], "kind": "radial", "samples": 9}"#),
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["rate"] == 0.0));
    assert!(v.get("quartic").is_none());

    let o =
        volflow(&["fig8", "--input", &write(dir.path(), "m.json", r#"{"u0": [0.1], "kind": "radial", "samples": 9}"#)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("u0"));
}

#[test]
fn fig8_list_path() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<String> = (0..11)
        .map(|k| format!(r#"{{"t": {}, "u": [{}, {}]}}"#, k as f64 / 10.0, 0.01 * k as f64, 0.005 * k as f64))
        .collect();
    let body = format!(r#"{{"kind": "list", "samples": [{}]}}"#, samples.join(","));
    let o = volflow(&["fig8", "--input", &write(dir.path(), "l.json", &body)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    // A linear list path is the radial path u(t) = t·(0.1 + 0.05i).
    let radial = json(&volflow(&[
        "fig8",
        "--input",
        &write(dir.path(), "r.json", r#"{"u0": [0.1, 0.05], "kind": "radial", "samples": 11}"#),
    ]));
    let (a, b) = (v["summary"]["integral"].as_f64().unwrap(), radial["summary"]["integral"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-9 * b.abs());
}
