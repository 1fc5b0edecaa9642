//! End-to-end pipeline runs against the shipped small English config.

use std::path::Path;
use std::process::{Command, Output};

fn hireaudit(workspace: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hireaudit"))
        .arg("--workspace")
        .arg(workspace)
        .args(args)
        .output()
        .expect("spawn hireaudit")
}

fn expect_ok(workspace: &Path, args: &[&str]) -> String {
    let out = hireaudit(workspace, args);
    assert!(
        out.status.success(),
        "`hireaudit {}` failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn expect_err(workspace: &Path, args: &[&str]) -> String {
    let out = hireaudit(workspace, args);
    assert!(
        !out.status.success(),
        "`hireaudit {}` unexpectedly succeeded",
        args.join(" ")
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn full_pipeline_on_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();

    let out = expect_ok(ws, &["design", "--config", "desk-en"]);
    assert!(out.contains("405 profiles x 4 briefs = 1620 pairs"), "{out}");

    expect_ok(ws, &["render"]);
    let profiles = std::fs::read_to_string(ws.join("rendered/profiles.jsonl")).unwrap();
    assert_eq!(profiles.lines().count(), 405);

    let out = expect_ok(ws, &["score", "--seed", "9", "--runs", "2"]);
    assert!(out.contains("1620 pairs aggregated"), "{out}");
    assert!(ws.join("scores/aggregates.csv").exists());

    expect_ok(ws, &["rank", "--seed", "7"]);
    assert!(ws.join("scores/rank_manifest.json").exists());

    let out = expect_ok(ws, &["fit", "--model", "main", "--cluster", "brief"]);
    assert!(out.contains("clusters=4"), "{out}");
    expect_ok(ws, &["fit", "--model", "group:name=female_eu"]);
    expect_ok(ws, &["fit", "--model", "rank"]);

    let out = expect_ok(ws, &["report", "--svg"]);
    assert!(out.contains("report written"), "{out}");
    for name in [
        "coefficients.csv",
        "max_effects.csv",
        "normalized_weights.csv",
        "score_distribution.csv",
        "summary.md",
        "forest.svg",
        "interaction_name-female-eu.csv",
        "manifest.json",
    ] {
        assert!(ws.join("reports").join(name).exists(), "missing reports/{name}");
    }

    // The rank column of the joined weight table is populated.
    let weights = std::fs::read_to_string(ws.join("reports/normalized_weights.csv")).unwrap();
    assert!(weights.lines().any(|l| {
        let cols: Vec<&str> = l.split(',').collect();
        cols.len() >= 4 && !cols[3].is_empty() && cols[3] != "rank_share"
    }));
}

#[test]
fn score_refuses_populated_store_without_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    expect_ok(ws, &["design", "--config", "desk-en"]);
    expect_ok(ws, &["score", "--runs", "1", "--limit", "10"]);
    let err = expect_err(ws, &["score", "--runs", "1"]);
    assert!(err.contains("--resume"), "{err}");
    let out = expect_ok(ws, &["score", "--runs", "1", "--resume"]);
    assert!(out.contains("10 cached"), "{out}");
}

#[test]
fn stages_name_their_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();

    let err = expect_err(ws, &["render"]);
    assert!(err.contains("design/config.json") && err.contains("`hireaudit design`"), "{err}");

    expect_ok(ws, &["design", "--config", "desk-en"]);
    let err = expect_err(ws, &["fit", "--model", "main"]);
    assert!(err.contains("scores/manifest.json") && err.contains("score"), "{err}");

    let err = expect_err(ws, &["fit", "--model", "rank"]);
    assert!(err.contains("rank_manifest.json"), "{err}");

    let err = expect_err(ws, &["report"]);
    assert!(err.contains("fits/main.json"), "{err}");
}

#[test]
fn fit_rejects_malformed_model_and_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    expect_ok(ws, &["design", "--config", "desk-en"]);

    let err = expect_err(ws, &["fit", "--model", "nonsense"]);
    assert!(err.contains("unknown model"), "{err}");

    let err = expect_err(ws, &["fit", "--model", "main", "--cluster", "triple"]);
    assert!(err.contains("cluster by brief"), "{err}");

    let err = expect_err(ws, &["fit", "--model", "rank", "--cluster", "brief"]);
    assert!(err.contains("clusters by triple"), "{err}");
}
