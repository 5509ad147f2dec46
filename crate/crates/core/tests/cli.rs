use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_dispersion");

fn dispersion(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("DISPERSION_OUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("DISPERSION_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_twice_gives_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"pipeline": "online_full_info", "seeds": [1, 2], "family": "knapsack", "T": 100, "learner": "ewf", "name": "r"}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = dispersion(&["run", &cfg], Some(dir));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["summary.json", "trajectory_seed1.csv", "trajectory_seed2.csv"] {
        let x = std::fs::read(a.join("r").join(file)).unwrap();
        let y = std::fs::read(b.join("r").join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let csv = std::fs::read_to_string(a.join("r/trajectory_seed1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,rho,u_t,cum_regret"));
    assert_eq!(csv.lines().count(), 101);

    let report = dispersion(&["report", &a.join("r").to_string_lossy()], None);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("overall: PASS"));
}

#[test]
fn config_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"pipeline": "sideways", "seeds": [1], "T": 10}"#,
    );
    let out = dispersion(&["run", &cfg], Some(tmp.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pipeline"));

    let cfg = write(tmp.path(), "d.json", r#"{"pipeline": "bandit", "T": 10}"#);
    let out = dispersion(&["run", &cfg], Some(tmp.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeds"));
}

#[test]
fn extract_curve_prints_json() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = write(
        tmp.path(),
        "k.json",
        r#"{"family": "knapsack", "n": 2, "values": [0.25, 0.5], "sizes": [2, 4], "capacity": 5}"#,
    );
    let out = dispersion(&["extract-curve", &inst, "--family", "knapsack", "--B", "10"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // The two scores tie where 0.25 / 2^rho = 0.5 / 4^rho.
    assert_eq!(v["fn"]["breakpoints"], serde_json::json!([1.0]));

    let out = dispersion(&["extract-curve", &inst, "--family", "tsp"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_selects_suites() {
    let out = dispersion(&["verify", "c4"], None);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("PASS C4"), "{text}");
    let out = dispersion(&["verify", "nonsense"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_rejects_missing_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dispersion(&["report", &tmp.path().to_string_lossy()], None);
    assert_eq!(out.status.code(), Some(2));
}
