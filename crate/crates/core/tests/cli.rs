use std::path::Path;
use std::process::{Command, Output};

fn ftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftlab"))
        .args(args)
        .env_remove("FTLAB_CENSUS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (
        header,
        lines
            .map(|l| l.split(',').map(String::from).collect())
            .collect(),
    )
}

fn threshold_of(o: &Output) -> f64 {
    let (h, rows) = csv_rows(&stdout(o));
    let i = h.iter().position(|c| c == "threshold").unwrap();
    rows[0][i].parse().unwrap()
}

#[test]
fn threshold_level_100_matches_abstract() {
    let o = ftlab(&[
        "threshold",
        "--rm",
        "0.1",
        "--rr",
        "1.0",
        "--tr",
        "10",
        "--level",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let t = threshold_of(&o);
    assert!(((t - 1.96e-6) / 1.96e-6).abs() <= 0.03, "{t}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.96"));
}

#[test]
fn threshold_json_and_csv_agree() {
    let args = [
        "threshold",
        "--rm",
        "0.1",
        "--rr",
        "1.0",
        "--tr",
        "10",
        "--level",
        "3",
    ];
    let csv = threshold_of(&ftlab(&args));
    let json = ftlab(&[&args[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["threshold"].as_f64().unwrap(), csv);
    assert_eq!(v["level"], 3);
}

#[test]
fn missing_level_is_usage_error() {
    let o = ftlab(&["threshold", "--rm", "0.1", "--rr", "1.0", "--tr", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn no_root_exit_code() {
    let o = ftlab(&[
        "threshold",
        "--rm",
        "1e5",
        "--rr",
        "1",
        "--tr",
        "10",
        "--level",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let args = ["curve", "--levels", "1,2,3,4,5,100", "--points", "9"];
    let a = ftlab(&args);
    let b = ftlab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let (h, rows) = csv_rows(&stdout(&a));
    assert_eq!(h, ["p0S", "p1T", "p2T", "p3T", "p4T", "p5T", "p100T"]);
    assert_eq!(rows.len(), 9);
    for row in &rows {
        for cell in row {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), *cell);
        }
    }
}

#[test]
fn curve_crosses_level_one_at_the_level_threshold() {
    let t2 = threshold_of(&ftlab(&[
        "threshold",
        "--rm",
        "0.1",
        "--rr",
        "1",
        "--tr",
        "10",
        "--level",
        "2",
    ]));
    let o = ftlab(&[
        "curve",
        "--levels",
        "1,2",
        "--pmin",
        &format!("{}", t2 * 0.9),
        "--pmax",
        &format!("{}", t2 * 1.1),
        "--points",
        "2",
    ]);
    let (_, rows) = csv_rows(&stdout(&o));
    let v = |r: usize, c: usize| rows[r][c].parse::<f64>().unwrap();
    assert!(v(0, 2) < v(0, 1));
    assert!(v(1, 2) > v(1, 1));
}

#[test]
fn single_point_curve_and_sweep_rejected() {
    assert_eq!(ftlab(&["curve", "--points", "1"]).status.code(), Some(1));
    assert_eq!(
        ftlab(&["sweep", "--vary", "tr", "--points", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ftlab(&["sweep", "--vary", "tr", "--from", "10", "--to", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_tr_starts_at_one() {
    let o = ftlab(&[
        "sweep", "--vary", "tr", "--from", "1", "--to", "1000", "--points", "4", "--rm", "0.1",
        "--rr", "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(h, ["tr", "threshold", "iterations", "residual"]);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 1.0);
    let first: f64 = rows[0][1].parse().unwrap();
    assert!(((first - 2.05e-6) / 2.05e-6).abs() <= 0.03, "{first}");
}

#[test]
fn census_print_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("census.json");
    let p = path.to_str().unwrap();
    assert_eq!(
        ftlab(&["census", "print", "--out", p]).status.code(),
        Some(0)
    );
    assert_eq!(ftlab(&["census", "validate", p]).status.code(), Some(0));
    let with_env = Command::new(env!("CARGO_BIN_EXE_ftlab"))
        .args(["census", "validate"])
        .env("FTLAB_CENSUS", p)
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(0));
}

fn invalid_census(dir: &Path) -> String {
    let out = ftlab(&["census", "print"]);
    let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    v["leveln"]["memory"]["readout"]["base"] = serde_json::json!(1.0);
    let path = dir.join("bad.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn invalid_census_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = invalid_census(dir.path());
    let o = ftlab(&["census", "validate", &bad]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(!stdout(&o).is_empty());
    let o = Command::new(env!("CARGO_BIN_EXE_ftlab"))
        .args([
            "threshold",
            "--rm",
            "0.1",
            "--rr",
            "1",
            "--tr",
            "10",
            "--level",
            "2",
        ])
        .env("FTLAB_CENSUS", &bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        ftlab(&["census", "validate", "/nonexistent.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn census_extract_memory() {
    let o = ftlab(&["census", "extract", "--gadget", "memory", "--level", "n"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(h[0], "kind");
    let readout = rows.iter().find(|r| r[0] == "readout").unwrap();
    assert_eq!(readout[1].parse::<f64>().unwrap(), 28.0);
    assert!(rows.iter().any(|r| r[0] == "depth"));
    let e = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(e.contains('%'), "{e}");
}

#[test]
fn circuit_json() {
    let o = ftlab(&["circuit", "--gadget", "memory"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["layers"].as_array().unwrap().len() > 10);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        ftlab(&["verify", "--component", "swap-routine"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ftlab(&["verify", "--component", "naive-swap"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        ftlab(&["verify", "--component", "warp-drive"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn verify_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = ftlab(&[
        "verify",
        "--component",
        "memory-exrec",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["summary"]["max_weight"], 1);
    assert_eq!(v["summary"]["pass"], true);
    let rec = &v["records"][0];
    for key in ["step", "site", "fault", "residual_weight", "pass"] {
        assert!(rec.get(key).is_some(), "{key}");
    }
}
