use std::collections::HashMap;
use std::fs;
use std::path::Path;

use clap::Parser;
use softattr::embeddings::FactorModel;
use softattr_cli::{run, Cli, CliError};

fn softattr(data: &Path, args: &[&str]) -> Result<String, CliError> {
    let mut argv = vec!["softattr", "--data-dir", data.to_str().unwrap()];
    argv.extend_from_slice(args);
    run(Cli::try_parse_from(argv).expect("arguments parse"))
}

fn corpus() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    softattr(&dir.path().join("data"), &["--seed", "4", "synth"]).unwrap();
    dir
}

fn read_scores(path: &Path) -> Vec<(String, f64)> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].to_string(), r[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn swd_evaluation_is_reproducible() {
    let tmp = corpus();
    let data = tmp.path().join("data");
    softattr(&data, &["embed"]).unwrap();
    let args = ["eval-softattr", "--method", "swd", "--folds", "10", "--seed", "7"];
    softattr(&data, &args).unwrap();
    let csv1 = fs::read(data.join("artifacts/eval_softattr.csv")).unwrap();
    let json1 = fs::read(data.join("artifacts/eval_softattr.json")).unwrap();
    softattr(&data, &args).unwrap();
    assert_eq!(fs::read(data.join("artifacts/eval_softattr.csv")).unwrap(), csv1);
    assert_eq!(fs::read(data.join("artifacts/eval_softattr.json")).unwrap(), json1);

    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with("attribute,method,metric,value,n_pairs,n_skipped\n"));
    assert!(text.lines().any(|l| l.starts_with("(mean),swd,gprime,")));
}

#[test]
fn centroid_scores_match_recomputation() {
    let tmp = corpus();
    let data = tmp.path().join("data");
    softattr(&data, &["embed"]).unwrap();
    softattr(&data, &["score", "--method", "tb-ic", "--attribute", "gritty"]).unwrap();
    softattr(&data, &["score", "--method", "cb-ic", "--attribute", "gritty", "--k", "5"]).unwrap();
    let base = read_scores(&data.join("artifacts/scores_tb-ic_gritty.csv"));
    let cb = read_scores(&data.join("artifacts/scores_cb-ic_gritty.csv"));
    let model = FactorModel::<f64>::load(&data.join("artifacts/model.json")).unwrap();

    let top: Vec<&str> = base.iter().filter(|(_, s)| *s > 0.0).take(5).map(|(id, _)| id.as_str()).collect();
    assert_eq!(top.len(), 5);
    let mut centroid = vec![0.0; model.dim()];
    for id in &top {
        for (c, x) in centroid.iter_mut().zip(model.item(id).unwrap()) {
            *c += x / 5.0;
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let got: HashMap<&str, f64> = cb.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    assert_eq!(got.len(), base.len());
    for id in model.item_ids() {
        let x = model.item(id).unwrap();
        let cos = x.iter().zip(&centroid).map(|(a, b)| a * b).sum::<f64>() / (norm(x) * norm(&centroid));
        assert!((got[id.as_str()] - cos).abs() < 1e-9, "{id}: {} vs {cos}", got[id.as_str()]);
    }
}

#[test]
fn failed_run_leaves_no_report() {
    let tmp = corpus();
    let data = tmp.path().join("data");
    // No embeddings yet, so every embedding method fails before writing.
    let err = softattr(&data, &["eval-softattr"]).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)), "{err}");
    assert!(!data.join("artifacts/eval_softattr.csv").exists());
    assert!(!data.join("artifacts/eval_softattr.json").exists());

    fs::write(data.join("judgments.jsonl"), "{\"rater_id\":\"r\"}\n").unwrap();
    assert!(softattr(&data, &["buckets"]).is_err());
    assert!(!data.join("artifacts/buckets.csv").exists());
}

#[test]
fn reports_cover_every_analysis() {
    let tmp = corpus();
    let data = tmp.path().join("data");
    softattr(&data, &["ingest"]).unwrap();
    softattr(&data, &["embed"]).unwrap();
    let movielens = softattr(&data, &["eval-movielens"]).unwrap();
    assert!(movielens.contains("wwd-rc"));
    softattr(&data, &["agree"]).unwrap();
    softattr(&data, &["buckets"]).unwrap();
    softattr(&data, &["curve", "--sizes", "5,20", "--reps", "2"]).unwrap();
    for f in ["ingest.json", "eval_movielens.csv", "eval_movielens.json", "agree.csv", "agree.json", "buckets.csv", "curve.csv", "curve.json"] {
        assert!(data.join("artifacts").join(f).exists(), "{f}");
    }
    let curve: serde_json::Value = serde_json::from_slice(&fs::read(data.join("artifacts/curve.json")).unwrap()).unwrap();
    assert_eq!(curve["points"].as_array().unwrap().len(), 2);
    let ingest: serde_json::Value = serde_json::from_slice(&fs::read(data.join("artifacts/ingest.json")).unwrap()).unwrap();
    assert_eq!(ingest["items"], 300);
}

#[test]
fn offline_tasks_use_only_seen_items() {
    let tmp = corpus();
    let data = tmp.path().join("data");
    let seen: Vec<String> = (0..15).map(|i| format!("m{:04}", i * 7)).collect();
    let out = tmp.path().join("tasks.jsonl");
    softattr(&data, &["sample-tasks", "--rater", "r", "--seen", &seen.join(","), "--count", "6", "--output", out.to_str().unwrap()]).unwrap();
    let lines: Vec<serde_json::Value> =
        fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    for t in &lines {
        let anchor = t["anchor"].as_str().unwrap();
        assert!(seen.iter().any(|s| s == anchor));
        for c in t["candidates"].as_array().unwrap() {
            assert!(seen.iter().any(|s| s == c.as_str().unwrap()));
            assert_ne!(c.as_str().unwrap(), anchor);
        }
    }
    assert!(softattr(&data, &["sample-tasks", "--rater", "r", "--seen", "nope"]).is_err());
}

#[test]
fn environment_and_file_settings_resolve() {
    let tmp = corpus();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "folds = 1\n").unwrap();
    let data = tmp.path().join("data");
    let err = softattr(&data, &["--config", cfg.to_str().unwrap(), "agree"]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    softattr(&data, &["--config", cfg.to_str().unwrap(), "--folds", "3", "agree"]).unwrap();
}
