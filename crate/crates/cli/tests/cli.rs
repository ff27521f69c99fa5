use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qc_lab(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qc-lab"));
    cmd.args(args).env_remove(qc_lab::SEED_ENV);
    if let Some(s) = seed_env {
        cmd.env(qc_lab::SEED_ENV, s);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn bootstrap_writes_the_ledger_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"scenario": "bootstrap", "params": {"q0": 2.5}}"#);
    let out = tmp.path().join("out");
    let o = qc_lab(&["run", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("bootstrap/bootstrap.csv")).unwrap();
    assert_eq!(csv, "q_0,q_1,q_2\n2.5,3.333333,10.0\n");
    let r = report(&out.join("bootstrap"));
    assert_eq!(r["scalars"]["k0"], 2.0);
    assert!(out.join("bootstrap/timing.json").exists());
}

#[test]
fn w0_sharpness_flags_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"scenario": "w0-sharpness", "params": {"a_values": [0.25]}, "grid": {"n_r": 64, "n_theta": 128}}"#,
    );
    let out = tmp.path().join("out");
    let o = qc_lab(&["run", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out.join("w0-sharpness"));
    let names: Vec<&str> = r["flags"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["dilatation_bound", "L2_convergent", "L2.5_divergent", "non_lipschitz"]);
    assert!(r["flags"].as_array().unwrap().iter().all(|f| f["passed"] == true));
    let svg = fs::read_to_string(out.join("w0-sharpness/integrability.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("malformed.json", "{\"scenario\": "),
        ("unknown.json", r#"{"scenario": "no-such-scenario"}"#),
        ("field.json", r#"{"scenario": "bootstrap", "colour": "red"}"#),
        ("param.json", r#"{"scenario": "bootstrap", "params": {"q": 2.5}}"#),
        ("tol.json", r#"{"scenario": "bootstrap", "tolerances": {"doubling_identity": 0}}"#),
        ("tolname.json", r#"{"scenario": "bootstrap", "tolerances": {"nonsense": 1.0}}"#),
        ("grid.json", r#"{"scenario": "bootstrap", "grid": {"n_r": 8}}"#),
    ];
    for (name, body) in cases {
        let cfg = write_config(tmp.path(), name, body);
        let o = qc_lab(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = qc_lab(&["run", tmp.path().join("missing.json").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    // Nothing ran, so nothing was written.
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn failing_flag_exits_with_one_and_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"scenario": "w0-sharpness", "params": {"a_values": [0.25]},
            "grid": {"n_r": 32, "n_theta": 64}, "tolerances": {"witness_ratio": 3.0}}"#,
    );
    let o = qc_lab(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("non_lipschitz"), "{err}");
    assert!(!err.contains("dilatation_bound"));
}

#[test]
fn numerical_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // q0 = 16/7 lands exactly on 4 after three steps.
    let cfg = write_config(tmp.path(), "c.json", r#"{"scenario": "bootstrap", "params": {"q0": 2.2857142857142856}}"#);
    let o = qc_lab(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate exponent"));
}

#[test]
fn list_prints_anchors() {
    let o = qc_lab(&["list"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let row = |name: &str| text.lines().find(|l| l.starts_with(name)).unwrap().to_string();
    assert!(row("w0-sharpness").contains("Theorem 1 sharpness"));
    assert!(row("fkp-smirnov").contains("Theorem 3 / Lemma 4.5"));
    assert!(row("theorem2-trend").contains("Theorem 3.5 Eq. (3.10)"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn seed_env_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"scenario": "green-solver", "seed": 1, "grid": {"n_r": 16, "n_theta": 32}, "params": {"pairs": 50}}"#,
    );
    let run = |out: &str, env: Option<&str>| {
        let o = qc_lab(&["run", &cfg, "--out", tmp.path().join(out).to_str().unwrap()], env);
        assert_eq!(o.status.code(), Some(0));
        report(&tmp.path().join(out).join("green-solver"))
    };
    let a = run("a", None);
    let b = run("b", Some("77"));
    assert_eq!(a["seed"], 1);
    assert_eq!(b["seed"], 77);
    assert_ne!(a["scalars"]["gradient_max_ratio"], b["scalars"]["gradient_max_ratio"]);
    let o = qc_lab(&["run", &cfg, "--out", tmp.path().join("c").to_str().unwrap()], Some("x"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parallel_run_matches_sequential_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"seed": 3, "scenarios": [
            {"scenario": "bootstrap"},
            {"scenario": "green-solver", "grid": {"n_r": 16, "n_theta": 32}, "params": {"pairs": 20}},
            {"scenario": "bootstrap", "params": {"q0": 3.0}}
        ]}"#,
    );
    for (out, extra) in [("seq", None), ("par", Some("--parallel"))] {
        let root = tmp.path().join(out);
        let mut args = vec!["run", &cfg, "--out", root.to_str().unwrap()];
        args.extend(extra);
        assert_eq!(qc_lab(&args, None).status.code(), Some(0));
    }
    for d in ["bootstrap", "green-solver", "bootstrap-2"] {
        let a = fs::read(tmp.path().join("seq").join(d).join("report.json")).unwrap();
        let b = fs::read(tmp.path().join("par").join(d).join("report.json")).unwrap();
        assert_eq!(a, b, "{d}");
    }
    let second = report(&tmp.path().join("par/bootstrap-2"));
    assert_eq!(second["series"]["sequence"], serde_json::json!([3.0, 6.0]));
}
