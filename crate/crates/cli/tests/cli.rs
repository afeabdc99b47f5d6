//! End-to-end checks of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gwmon"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gwmon-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_two_type_model(path: &Path, p_cross: f64) {
    let law = |p: f64| serde_json::json!({"kind": "bernoulli", "p": p});
    let model = serde_json::json!({
        "p": 2,
        "offspring": [[law(0.5), law(p_cross)], [law(p_cross), law(0.5)]],
        "innovation": [
            {"kind": "poisson", "lambda": 1.0},
            {"kind": "poisson", "lambda": 1.0}
        ],
    });
    std::fs::write(path, serde_json::to_string(&model).unwrap()).unwrap();
}

#[test]
fn simulate_estimate_round_trip() {
    let dir = workdir("sim");
    let model = dir.join("model.json");
    write_two_type_model(&model, 0.2);
    let traj = dir.join("traj.csv");

    let status = bin()
        .args(["simulate", "--steps", "300", "--m", "150", "--seed", "5"])
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&traj)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(traj.exists());
    assert!(traj.with_extension("json").exists(), "sidecar written");

    let est_path = dir.join("est.json");
    let status = bin()
        .args(["estimate", "--flavor", "wcls"])
        .arg("--traj")
        .arg(&traj)
        .arg("--out")
        .arg(&est_path)
        .status()
        .unwrap();
    assert!(status.success());
    let est: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&est_path).unwrap()).unwrap();
    assert_eq!(est["flavor"], "wcls");
    assert_eq!(est["m"], 150);
    assert_eq!(est["mu_hat"]["rows"], 2);
}

#[test]
fn simulate_is_reproducible_per_seed() {
    let dir = workdir("repro");
    let model = dir.join("model.json");
    write_two_type_model(&model, 0.3);
    for name in ["a.csv", "b.csv"] {
        let status = bin()
            .args(["simulate", "--steps", "100", "--seed", "9"])
            .arg("--model")
            .arg(&model)
            .arg("--out")
            .arg(dir.join(name))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read_to_string(dir.join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn monitor_emits_events_and_verdict() {
    let dir = workdir("monitor");
    let model = dir.join("model.json");
    let star = dir.join("star.json");
    write_two_type_model(&model, 0.0);
    write_two_type_model(&star, 0.45);
    let full = dir.join("full.csv");

    let status = bin()
        .args(["simulate", "--steps", "500", "--m", "200", "--k-star", "50", "--seed", "11"])
        .arg("--model")
        .arg(&model)
        .arg("--change")
        .arg(&star)
        .arg("--out")
        .arg(&full)
        .status()
        .unwrap();
    assert!(status.success());

    // Stream: the post-training observations as bare `x1,x2` lines.
    let csv = std::fs::read_to_string(&full).unwrap();
    let stream: String = csv
        .lines()
        .skip(202) // header + observations 0..=200
        .map(|line| line.split_once(',').unwrap().1.to_string() + "\n")
        .collect();
    let stream_path = dir.join("stream.csv");
    std::fs::write(&stream_path, stream).unwrap();

    let table = dir.join("table.json");
    let status = bin()
        .args([
            "critvals", "--gamma", "0.25", "--dim", "1", "--alpha", "0.05,0.025", "--paths",
            "10000", "--grid", "1000", "--seed", "2",
        ])
        .arg("--out")
        .arg(&table)
        .status()
        .unwrap();
    assert!(status.success());

    let output = bin()
        .args(["monitor", "--m", "200", "--reduction", "1,2", "--alpha", "0.049375", "--horizon", "2"])
        .arg("--train")
        .arg(&full)
        .arg("--table")
        .arg(&table)
        .arg("--stream")
        .arg(&stream_path)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines.len() >= 2);
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["k"], 1);
    assert!(first["stat"].is_f64());
    let verdict: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
    // A 0 -> .45 cross change this large is always caught.
    assert_eq!(verdict["verdict"], "alarm");
    assert!(verdict["tau"].as_u64().unwrap() >= 50);
}

#[test]
fn study_writes_tables_and_manifest() {
    let dir = workdir("study");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"m":80,"t":1.0,"k_star":40,"replicates":5,"gamma":0.25,"alpha":0.05,"seed":3}"#,
    )
    .unwrap();
    let table = dir.join("table.json");
    let status = bin()
        .args([
            "critvals", "--gamma", "0.25", "--alpha", "0.05,0.025", "--paths", "10000",
            "--grid", "1000", "--seed", "2",
        ])
        .arg("--out")
        .arg(&table)
        .status()
        .unwrap();
    assert!(status.success());

    let out = dir.join("out");
    let status = bin()
        .args(["study", "--scenario", "ginar"])
        .arg("--config")
        .arg(&cfg)
        .arg("--table")
        .arg(&table)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["ginar_type1.csv", "ginar_type2.csv", "manifest.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["scenario"], "ginar_comparison");
    assert_eq!(manifest["config"]["replicates"], 5);
}

#[test]
fn usage_errors_exit_nonzero() {
    let status = bin().arg("--definitely-unknown-flag").status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin()
        .args(["study", "--scenario", "ginar", "--replicates", "0", "--out", "/tmp/never"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "replicate floor enforced by the parser");

    // Missing inputs surface as errors, not panics.
    let status = bin()
        .args(["estimate", "--traj", "/nonexistent/traj.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
