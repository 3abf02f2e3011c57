use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uranus_core::forest::ForestParams;
use uranus_core::pipeline::{PipelineConfig, BUNDLE_FILE, PREDICTION_COLUMNS};

fn uranus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uranus"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn uranus")
}

fn ok(args: &[&str]) -> String {
    let out = uranus(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    uranus(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three training scenarios and a small forest config.
fn workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("data/train");
    ok(&[
        "synth", "--out", s(&train), "--seed", "5", "--pattern", "S1.3", "--pattern", "S2.1", "--pattern", "S3",
    ]);
    let mut cfg = PipelineConfig::new("data", 42);
    for p in [&mut cfg.forest.regression, &mut cfg.forest.classification] {
        *p = ForestParams { n_trees: 10, ..p.clone() };
    }
    cfg.cv_folds = 3;
    let path = dir.path().join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    (dir, path)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn train_predict_report_end_to_end() {
    let (dir, cfg) = workspace();
    let root = dir.path();
    let (a, b) = (root.join("model-a"), root.join("model-b"));
    let summary = ok(&["train", "--config", s(&cfg), "--out", s(&a)]);
    assert!(summary.contains("overall accuracy"), "{summary}");
    ok(&["train", "--config", s(&cfg), "--out", s(&b)]);
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 6);
    assert!(fa.iter().any(|(n, _)| n == BUNDLE_FILE));
    assert_eq!(fa, fb, "bundles differ between identical runs");

    let scen = root.join("data/train/Scenario 2.1");
    let (pa, pb) = (root.join("out/a.csv"), root.join("out/b.csv"));
    ok(&["predict", "--model", s(&a), "--scenario", s(&scen), "--out", s(&pa)]);
    ok(&["predict", "--model", s(&b), "--scenario", s(&scen), "--out", s(&pb)]);
    assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap());
    let header = fs::read_to_string(&pa).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, PREDICTION_COLUMNS.join(","));
    let truth = root.join("out/a.truth.csv");
    assert!(truth.exists());

    let json = root.join("report.json");
    let text = ok(&["report", "--pred", s(&pa), "--truth", s(&truth), "--json", s(&json)]);
    assert!(text.contains("latitude") && text.contains("confusion matrix"), "{text}");
    let r: serde_json::Value = serde_json::from_slice(&fs::read(&json).unwrap()).unwrap();
    assert_eq!(r["kind"], "evaluation");
    assert!(r["regression"]["latitude"]["r2"].as_f64().unwrap() > 0.9);

    let text = ok(&["report", "--pred", s(&pa)]);
    assert!(text.contains("predicted types"), "{text}");
}

#[test]
fn empty_scenario_predicts_an_empty_file() {
    let (dir, cfg) = workspace();
    let model = dir.path().join("m");
    ok(&["train", "--config", s(&cfg), "--out", s(&model)]);
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    for name in ["alvira", "arcus", "diana", "venus"] {
        let header = fs::read_to_string(dir.path().join(format!("data/train/Scenario 3/{name}.csv")))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        fs::write(empty.join(format!("{name}.csv")), header + "\n").unwrap();
    }
    let out = dir.path().join("empty.csv");
    ok(&["predict", "--model", s(&model), "--scenario", s(&empty), "--out", s(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1);
    assert!(!dir.path().join("empty.truth.csv").exists());
}

#[test]
fn exit_codes() {
    let (dir, cfg) = workspace();
    let root = dir.path();
    let scen = root.join("data/train/Scenario 3");

    // 2: configuration
    assert_eq!(code(&["train", "--config", s(&root.join("missing.json")), "--out", "x"]), 2);
    let bad = root.join("bad.json");
    fs::write(&bad, r#"{"data_root": "data", "seed": 1, "colour": "red"}"#).unwrap();
    assert_eq!(code(&["train", "--config", s(&bad), "--out", s(&root.join("m"))]), 2);
    fs::write(&bad, r#"{"data_root": "data"}"#).unwrap();
    assert_eq!(code(&["train", "--config", s(&bad), "--out", s(&root.join("m"))]), 2);
    fs::write(&bad, r#"{"data_root": "data", "seed": 1, "scenarios": ["Scenario 9.9"]}"#).unwrap();
    assert_eq!(code(&["train", "--config", s(&bad), "--out", s(&root.join("m"))]), 2);
    let noise = root.join("noise.json");
    fs::write(&noise, "{}").unwrap();
    assert_eq!(code(&["synth", "--out", s(&root.join("n")), "--seed", "1", "--noise", s(&noise)]), 2);
    assert_eq!(code(&["train", "--no-such-flag"]), 2);

    // 3: data
    let nolog = root.join("nolog/train");
    ok(&["synth", "--out", s(&nolog), "--seed", "1", "--pattern", "S1.1", "--no-log"]);
    fs::write(&bad, r#"{"data_root": "nolog", "seed": 1}"#).unwrap();
    let out = uranus(&["train", "--config", s(&bad), "--out", s(&root.join("m"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario incomplete"));
    assert!(!root.join("m").exists());
    let garbage = root.join("garbage.csv");
    fs::write(&garbage, "not,a,prediction\n1,2,3\n").unwrap();
    assert_eq!(code(&["report", "--pred", s(&garbage)]), 3);

    // 4: model
    let model = root.join("model");
    ok(&["train", "--config", s(&cfg), "--out", s(&model)]);
    let p = root.join("p.csv");
    assert_eq!(code(&["predict", "--model", s(&root.join("nope")), "--scenario", s(&scen), "--out", s(&p)]), 4);
    let out = uranus(&["predict", "--model", s(&cfg), "--scenario", s(&scen), "--out", s(&p)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a URANUS model"));
    fs::write(model.join("altitude.urns"), b"ZIP\x00 not a forest").unwrap();
    assert_eq!(code(&["predict", "--model", s(&model), "--scenario", s(&scen), "--out", s(&p)]), 4);
    assert!(!p.exists());
}

#[test]
fn analyze_rf_exports_signatures_and_series() {
    let (dir, cfg) = workspace();
    let out = dir.path().join("rf");
    let text = ok(&["analyze-rf", "--config", s(&cfg), "--out", s(&out)]);
    assert!(text.contains("Parrot Disco"), "{text}");
    let sig: serde_json::Value = serde_json::from_slice(&fs::read(out.join("signatures.json")).unwrap()).unwrap();
    let parrot = sig["frequency"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["drone_type"] == "ParrotDisco")
        .unwrap();
    assert_eq!(parrot["pmf"], serde_json::json!({"2440": 1.0}));
    let series = fs::read_to_string(out.join("distances/Scenario 2.1/Mavic2_arcus.csv")).unwrap();
    assert!(series.starts_with("timestamp,distance_m,alt_m\n"));
    assert!(series.lines().count() > 10);
}

#[test]
fn silhouette_on_four_points() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    fs::write(&csv, "x,label\n0,a\n1,a\n9,b\n10,b\n").unwrap();
    let plain = dir.path().join("x.csv");
    fs::write(&plain, "x\n0\n1\n9\n10\n").unwrap();
    for a in [
        vec!["silhouette", "--input", s(&csv), "--labels", "label"],
        vec!["silhouette", "--input", s(&plain), "--k", "2"],
    ] {
        let v: serde_json::Value = serde_json::from_str(&ok(&a)).unwrap();
        assert!((v["mean"].as_f64().unwrap() - 0.8886).abs() < 1e-4, "{v}");
    }
    fs::write(&csv, "x\n0\nfoo\n").unwrap();
    assert_eq!(code(&["silhouette", "--input", s(&csv)]), 3);
}

#[test]
fn synth_full_split_layout() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--out", s(dir.path()), "--seed", "3"]);
    let names = |split: &str| -> Vec<String> {
        let mut v: Vec<String> = fs::read_dir(dir.path().join(split))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names("train").len(), 7);
    assert_eq!(names("test").len(), 7);
    assert!(names("test").contains(&"Scenario 2.4".to_string()));
    assert!(dir.path().join("train/Scenario 1.1/drone_log.csv").exists());
    assert!(!dir.path().join("test/Scenario 1.2/drone_log.csv").exists());
}

#[test]
fn train_output_from_config() {
    let (dir, cfg) = workspace();
    assert_eq!(code(&["train", "--config", s(&cfg)]), 2);
    let mut v: serde_json::Value = serde_json::from_slice(&fs::read(&cfg).unwrap()).unwrap();
    v["output"] = "bundle".into();
    fs::write(&cfg, v.to_string()).unwrap();
    ok(&["train", "--config", s(&cfg)]);
    assert!(dir.path().join("bundle").join(BUNDLE_FILE).is_file());
}
