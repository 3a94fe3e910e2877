use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shampoo-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const TOY: &str = r#"{ "problem": "toy_paper", "steps": 500, "hyper": { "toy": { "lambda": 0.001 } } }"#;

#[test]
fn missing_config_exits_2() {
    let out = lab(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.json"));
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{ not json"),
        (
            "unknown_key.json",
            r#"{ "problem": "toy_paper", "steps": 10, "hyper": { "toy": {} }, "colour": 1 }"#,
        ),
        (
            "interval.json",
            r#"{ "problem": "toy_paper", "steps": 10, "record_interval": 0, "hyper": { "toy": {} } }"#,
        ),
        (
            "negative.json",
            r#"{ "problem": "toy_paper", "steps": 10, "hyper": { "toy": {} }, "sweep": [0.1, -1] }"#,
        ),
        (
            "problem.json",
            r#"{ "problem": "rosenbrock", "steps": 10, "hyper": { "toy": {} } }"#,
        ),
    ];
    for (name, text) in cases {
        let path = write(dir.path(), name, text);
        let out = lab(&[
            "run",
            "--config",
            &path,
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run", "--config", "x.json", "--frobnicate"][..],
        &["launch"][..],
        &["schedule", "--K", "1e6"][..],
        &[
            "schedule", "--K", "1.5", "--L", "1", "--gap", "1", "--sigma2", "1", "--m", "2", "--n", "2",
        ][..],
        &["verify", "--trials", "many"][..],
    ] {
        let out = lab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.json", TOY);
    let blocker = write(dir.path(), "file", "");
    let out = lab(&["run", "--config", &cfg, "--out", &format!("{blocker}/sub")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schedule_prints_derived_settings() {
    let out = lab(&[
        "schedule", "--K", "1e6", "--L", "1", "--gap", "1", "--sigma2", "1", "--m", "2", "--n", "2", "--tau", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in [
        "theta = 0.999",
        "eta = 2.5e-4",
        "eps = 0.25",
        "lambda_max = 1.86338998124982",
    ] {
        assert!(text.contains(line), "missing {line} in\n{text}");
    }
}

#[test]
fn infeasible_schedule_exits_1() {
    let out = lab(&[
        "schedule", "--K", "1e6", "--L", "1", "--gap", "1", "--sigma2", "1", "--m", "2", "--n", "2", "--lambda", "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = lab(&[
        "schedule",
        "--K",
        "1e6",
        "--L",
        "1",
        "--gap",
        "1",
        "--sigma2",
        "1",
        "--m",
        "2",
        "--n",
        "2",
        "--eps-hat",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exponent_flags_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.json", TOY);
    let out_dir = dir.path().join("o");
    let out = lab(&[
        "run",
        "--config",
        &cfg,
        "--p",
        "inf",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["hyper"]["pq"]["p"], "inf");
    assert_eq!(summary["hyper"]["pq"]["q"], 1.0);
    let out = lab(&["run", "--config", &cfg, "--p", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_and_sweep_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.json", TOY);
    let run_dir = dir.path().join("run");
    let out = lab(&[
        "run",
        "--config",
        &cfg,
        "--steps",
        "1e3",
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for f in [
        "trace.csv",
        "summary.json",
        "grad_norm.svg",
        "distance.svg",
        "metadata.json",
    ] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let sweep_dir = dir.path().join("sweep");
    let out = lab(&[
        "sweep",
        "--config",
        &cfg,
        "--lambda",
        "0.01",
        "--lambda",
        "0",
        "--out",
        sweep_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for f in [
        "trace_lambda_1e-2.csv",
        "trace_lambda_0e0.csv",
        "summary.json",
        "grad_norm.svg",
        "distance.svg",
    ] {
        assert!(sweep_dir.join(f).exists(), "{f}");
    }
    assert!(!sweep_dir.join("failures.json").exists());
    let out = lab(&["sweep", "--config", &cfg, "--out", sweep_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "a sweep needs lambda values");
}

#[test]
fn verify_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&[
        "verify",
        "--trials",
        "20",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["total_violations"], 0);
    let on_disk: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(on_disk, report);
}
