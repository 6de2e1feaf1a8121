use std::path::Path;
use std::process::Command;

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn qplab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qplab"))
        .args(args)
        .output()
        .unwrap()
}

fn small(kind: &str, extra: &str) -> String {
    format!(
        r#"{{ "schema_version": 1, "kind": "{kind}",
  "model": {{ "lambda": 2.0, "alpha": "golden", "phase": {{ "theta": "1/4" }} }},
  "window": 60{extra} }}"#
    )
}

#[test]
fn malformed_config_exits_two_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        &small("spectrum", "").replace("2.0", "[2.0]"),
    );
    let out = qplab(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("model.lambda") && err.contains("line"),
        "{err}"
    );
    let out = qplab(&[
        "spectrum",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = qplab(&["sideways", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_run_writes_tagged_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small("delta", ""));
    let out_dir = dir.path().join("out");
    let out = qplab(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("spectrum_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["kind"], "spectrum");
    assert_eq!(
        summary["config"]["output"]["dir"],
        out_dir.to_str().unwrap()
    );
    assert!(summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["theorem"].is_string()));
    let csv = std::fs::read_to_string(out_dir.join("spectrum_eigenfunctions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 122);
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.starts_with("truncated-eigenproblem,")));
}

#[test]
fn failing_diagnostic_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#", "grids": { "lyapunov_n": [200] }, "tolerances": { "lyapunov_rel": 1e-9 }"#;
    let cfg = write_config(dir.path(), "c.json", &small("lyapunov", extra));
    let out = qplab(&[
        "lyapunov",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL [lyapunov-exponent]"));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#", "grids": { "lyapunov_n": [100, 1000], "energy_count": 6 }"#;
    let cfg = write_config(dir.path(), "c.json", &small("lyapunov", extra));
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let o = dir.path().join(format!("t{threads}"));
        let out = qplab(&[
            "lyapunov",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            o.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let summary = std::fs::read_to_string(o.join("lyapunov_summary.json")).unwrap();
        // the output directory is part of the recorded config
        let summary = summary.replace(o.to_str().unwrap(), "OUT");
        outputs.push((summary, std::fs::read(o.join("lyapunov_rows.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn precision_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small("delta", ""));
    let o = dir.path().join("o");
    let out = qplab(&[
        "delta",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
        "--precision-bits",
        "384",
    ]);
    assert!(out.status.code().is_some_and(|c| c <= 1));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(o.join("delta_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["precision_bits"], 384);
    assert_eq!(summary["config"]["kind"], "delta");
}
