//! Runs the built binary against the demo fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/demo")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_issueforge"))
        .arg("-q")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stages_chain_from_corpus_to_scores() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let corpus = demo().join("corpus");
    let reviews = demo().join("reviews.csv");
    let labelmap = demo().join("labelmap.tsv");

    ok(&["harvest", "--from", s(&corpus), "--out", s(&t.join("raw"))]);
    ok(&["filter", "--in", s(&t.join("raw")), "--out", s(&t.join("filtered"))]);
    let filtered = fs::read_to_string(t.join("filtered/repos.jsonl")).unwrap();
    assert_eq!(filtered.lines().count(), 4);

    ok(&[
        "labels", "--in", s(&t.join("filtered")), "--out", s(&t.join("labels.jsonl")),
        "--table", s(&t.join("table.tsv")),
    ]);
    assert!(fs::read_to_string(t.join("table.tsv")).unwrap().starts_with("surface\tfrequency"));
    ok(&[
        "extract", "--in", s(&t.join("filtered")), "--labels", s(&t.join("labels.jsonl")),
        "--out", s(&t.join("extracted.jsonl")), "--report", s(&t.join("extraction.json")),
    ]);
    ok(&["preprocess", "--in", s(&t.join("extracted.jsonl")), "--out", s(&t.join("docs.jsonl"))]);
    ok(&["templates", "--in", s(&t.join("filtered")), "--out", s(&t.join("templates.json"))]);
    ok(&["similar", "--in", s(&t.join("filtered")), "--query", "demo/notes", "--out", s(&t.join("similar.json"))]);
    let similar: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.join("similar.json")).unwrap()).unwrap();
    assert_eq!(similar["ranked"].as_array().unwrap().len(), 3);

    ok(&[
        "augment", "--primary", s(&reviews), "--labelmap", s(&labelmap), "--pool", s(&t.join("docs.jsonl")),
        "--method", "within-app", "--app", "demo/notes", "--seed", "7", "--ratio", "0.3",
        "--out", s(&t.join("augmented.jsonl")),
    ]);
    let rows = fs::read_to_string(t.join("augmented.jsonl")).unwrap().lines().count();
    assert_eq!(rows, 60 + 18);

    ok(&[
        "train-eval", "--data", s(&t.join("augmented.jsonl")), "--target", "bug", "--seed", "7",
        "--epochs", "200", "--lr", "1.0", "--out", s(&t.join("eval.json")),
    ]);
    let eval: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.join("eval.json")).unwrap()).unwrap();
    assert_eq!(eval["folds"].as_array().unwrap().len(), 5);

    ok(&[
        "sweep", "--primary", s(&reviews), "--labelmap", s(&labelmap), "--pool", s(&t.join("docs.jsonl")),
        "--method", "between-app", "--seed", "3", "--ratios", "0,0.5,1", "--out", s(&t.join("sweep")),
    ]);
    let trend = fs::read_to_string(t.join("sweep/trend.tsv")).unwrap();
    assert_eq!(trend.lines().count(), 1 + 3 * 2);
    assert!(t.join("sweep/augmented_r0.50.jsonl").exists());
}

#[test]
fn pipeline_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let stdout = ok(&["pipeline", "--config", s(&demo().join("config.json")), "--out", s(&out)]);
    assert!(stdout.contains("\"artifacts\":7"), "{stdout}");
    let text = ok(&["report", s(&out)]);
    assert!(text.contains("labeled relevant"));
    assert!(text.contains("within-context"));
}

#[test]
fn experiment_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    ok(&["pipeline", "--config", s(&demo().join("config.json")), "--out", s(&run_dir)]);
    let cfg = serde_json::json!({
        "seed": 5,
        "primary": {
            "name": "demo",
            "path": demo().join("reviews.csv"),
            "label_map": demo().join("labelmap.tsv"),
        },
        "pool": run_dir.join("docs.jsonl"),
        "corpus_dir": demo().join("corpus"),
        "augmentation": [
            {"name": "between", "method": "between-app", "ratio": 0.5},
            {"name": "context", "method": "within-context", "ratio": 0.3, "target_app": "demo/fit"},
        ],
        "hyper": {"epochs": 100, "learning_rate": 1.0, "l2": 0.0001},
    });
    let path = tmp.path().join("experiment.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = tmp.path().join("experiment.tsv");
    ok(&["experiment", "--config", s(&path), "--out", s(&out)]);
    let tsv = fs::read_to_string(out).unwrap();
    // header plus baseline and two models, two targets each
    assert_eq!(tsv.lines().count(), 1 + 3 * 2);
    assert!(tsv.lines().any(|l| l.starts_with("context\t")));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // missing config file
    let out = run(&["pipeline", "--config", s(&tmp.path().join("none.json")), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    // bad usage
    assert_eq!(run(&["pipeline"]).status.code(), Some(2));
    // stage failure: more folds than rows per class
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(demo().join("config.json")).unwrap()).unwrap();
    cfg["folds"] = 40.into();
    cfg["corpus_dir"] = demo().join("corpus").display().to_string().into();
    cfg["primary"]["path"] = demo().join("reviews.csv").display().to_string().into();
    cfg["primary"]["label_map"] = demo().join("labelmap.tsv").display().to_string().into();
    let path = tmp.path().join("config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = run(&["pipeline", "--config", s(&path), "--out", s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // logs are JSON lines
    let stderr = String::from_utf8_lossy(&out.stderr);
    for line in stderr.lines().filter(|l| !l.is_empty()) {
        serde_json::from_str::<serde_json::Value>(line).unwrap_or_else(|e| panic!("{line}: {e}"));
    }
    // report on an empty directory
    assert_eq!(run(&["report", s(tmp.path())]).status.code(), Some(2));
}
