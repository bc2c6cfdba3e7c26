use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use monoembed_core::clustering::Decomposition;
use monoembed_core::embedding::EmbeddingMatrix;
use monoembed_core::synthetic::gaussian_blobs;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoembed"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn analyze_minipet(dir: &Path) {
    let src = fixtures().join("minipet/src");
    let labels = fixtures().join("minipet/labels.json");
    ok(dir, &["analyze", "--src", src.to_str().unwrap(), "--app", "minipet", "--labels", labels.to_str().unwrap(), "--out", "corpus"]);
}

#[test]
fn analyze_writes_corpus_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    analyze_minipet(dir.path());
    for f in ["corpus.jsonl", "calls.jsonl", "interactions.jsonl", "manifest.json"] {
        assert!(dir.path().join("corpus").join(f).is_file(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("corpus/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "analyze");
    assert_eq!(manifest["input_hashes"].as_object().unwrap().len(), 2);
}

#[test]
fn analyze_of_empty_directory_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let out = run(dir.path(), &["analyze", "--src", "empty", "--out", "corpus"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tfidf_embedding_is_vocabulary_wide_and_projects_to_two_columns() {
    let dir = tempfile::tempdir().unwrap();
    analyze_minipet(dir.path());
    ok(dir.path(), &["embed", "--corpus", "corpus", "--provider", "tfidf", "--out", "emb.csv"]);
    let m = EmbeddingMatrix::read_csv(&dir.path().join("emb.csv")).unwrap();
    assert_eq!(m.n(), 12);
    assert!(m.m() > 12);
    ok(dir.path(), &["project", "--embedding", "emb.csv", "--corpus", "corpus", "--out", "pca.csv"]);
    let text = std::fs::read_to_string(dir.path().join("pca.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "class_id,x,y,service");
    assert_eq!(lines.len(), 13);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 4 && !l.ends_with(',')));
}

#[test]
fn unknown_provider_and_unsupported_algorithm_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["embed", "--corpus", "c", "--provider", "word2vec", "--out", "x"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["decompose", "--embedding", "e", "--algorithm", "optics", "--out", "x"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["embed", "--corpus", "c", "--provider", "remote", "--out", "x"]).status.code(), Some(2));
}

fn write_blobs(dir: &Path) {
    let (rows, _) = gaussian_blobs(20, 0.1, 42);
    EmbeddingMatrix::from_rows("blobs", "synthetic", rows)
        .unwrap()
        .write_csv(&dir.join("blobs.csv"))
        .unwrap();
}

#[test]
fn blob_csv_gives_three_services_with_and_without_standardization() {
    let dir = tempfile::tempdir().unwrap();
    write_blobs(dir.path());
    ok(dir.path(), &["decompose", "--embedding", "blobs.csv", "--out", "d.json"]);
    assert_eq!(Decomposition::read(&dir.path().join("d.json"), Some(60)).unwrap().k(), 3);
    // eps 3 separates the raw blobs but swallows their z-scores whole
    ok(dir.path(), &["decompose", "--embedding", "blobs.csv", "--algorithm", "dbscan", "--eps", "3", "--no-standardize", "--out", "raw.json"]);
    assert_eq!(Decomposition::read(&dir.path().join("raw.json"), Some(60)).unwrap().k(), 3);
    let scaled = run(dir.path(), &["decompose", "--embedding", "blobs.csv", "--algorithm", "dbscan", "--eps", "3", "--out", "z.json"]);
    assert_eq!(scaled.status.code(), Some(3));
}

#[test]
fn k_above_n_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_blobs(dir.path());
    let out = run(dir.path(), &["decompose", "--embedding", "blobs.csv", "--algorithm", "kmeans", "--k", "61", "--out", "d.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn non_convergence_still_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    write_blobs(dir.path());
    let out = run(dir.path(), &["decompose", "--embedding", "blobs.csv", "--max-iter", "10", "--out", "d.json"]);
    assert_eq!(out.status.code(), Some(5));
    let d = Decomposition::read(&dir.path().join("d.json"), Some(60)).unwrap();
    assert!(!d.converged);
}

#[test]
fn mining_a_fixture_list_keeps_two_of_three() {
    let dir = tempfile::tempdir().unwrap();
    let list = fixtures().join("repos/list.txt");
    ok(dir.path(), &["mine", "--list", list.to_str().unwrap(), "--out", "mined", "--offline"]);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("mined/mine_report.json")).unwrap()).unwrap();
    assert_eq!(report["accepted"], serde_json::json!(["shop", "bank"]));
    assert_eq!(report["rejected"][0]["repo"], "solo");
    let first = std::fs::read(dir.path().join("mined/shop/corpus.jsonl")).unwrap();
    ok(dir.path(), &["mine", "--list", list.to_str().unwrap(), "--out", "again", "--offline"]);
    assert_eq!(std::fs::read(dir.path().join("again/shop/corpus.jsonl")).unwrap(), first);
}

#[test]
fn discovery_from_search_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let page = fixtures().join("search/page-1.json");
    ok(dir.path(), &["mine", "--discover", "--search-fixture", page.to_str().unwrap(), "--discover-only", "--out", "disc"]);
    let found: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("disc/candidates.json")).unwrap()).unwrap();
    let urls: Vec<&str> = found.as_array().unwrap().iter().map(|c| c["url"].as_str().unwrap()).collect();
    assert_eq!(urls, ["https://github.com/acme/shop.git", "https://github.com/acme/bank.git"]);
}

#[test]
fn offline_discovery_without_cache_is_a_network_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["mine", "--discover", "--offline", "--cache", "cache", "--out", "disc"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn triplets_train_and_evaluate_a_projection() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let list = fixtures().join("repos/list.txt");
    ok(d, &["mine", "--list", list.to_str().unwrap(), "--out", "mined", "--offline"]);
    std::fs::write(d.join("holdout.txt"), "bank\n").unwrap();
    ok(d, &["triplets", "--corpora", "mined", "--k", "300", "--seed", "2", "--exclusions", "holdout.txt", "--out", "t.jsonl"]);
    let text = std::fs::read_to_string(d.join("t.jsonl")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains("\"repo\":\"shop\"")));
    ok(d, &["train", "--triplets", "t.jsonl", "--corpora", "mined", "--epochs", "10", "--dim-out", "4", "--seed", "1", "--out", "model.json"]);
    let history = std::fs::read_to_string(d.join("model.history.csv")).unwrap();
    assert_eq!(history.lines().count(), 12);
    ok(d, &["eval-embeddings", "--corpora", "mined", "--provider", "projection", "--model", "model.json", "--out", "q.json"]);
    let q: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("q.json")).unwrap()).unwrap();
    assert_eq!(q["provider"], "projection");
    assert_eq!(q["per_app"].as_object().unwrap().len(), 2);
    assert!(d.join("q.json.manifest.json").is_file());
}

#[test]
fn score_ranks_two_approaches_on_minipet() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    analyze_minipet(d);
    let traces = fixtures().join("minipet/traces.json");
    let split = fixtures().join("minipet/split.json");
    ok(d, &["embed", "--corpus", "corpus", "--provider", "tfidf", "--out", "emb.csv"]);
    ok(d, &["decompose", "--embedding", "emb.csv", "--algorithm", "kmeans", "--k", "3", "--out", "km.json"]);
    ok(d, &["eval-decomposition", "--decomposition", "km.json", "--corpus", "corpus", "--traces", traces.to_str().unwrap(), "--approach", "tfidf-kmeans", "--out", "reports/km.json"]);
    ok(d, &["eval-decomposition", "--decomposition", split.to_str().unwrap(), "--corpus", "corpus", "--traces", traces.to_str().unwrap(), "--approach", "expert", "--out", "reports/expert.json"]);
    let expert: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("reports/expert.json")).unwrap()).unwrap();
    let f = expert["fbeta"].as_f64().unwrap();
    assert!(f > 0.0 && f <= 1.0);
    let table = ok(d, &["score", "--reports", "reports", "--out", "score.json"]);
    assert!(table.contains("expert") && table.contains("tfidf-kmeans"));
    let scores: std::collections::BTreeMap<String, f64> =
        serde_json::from_slice(&std::fs::read(d.join("score.json")).unwrap()).unwrap();
    assert!((scores["expert"] + scores["tfidf-kmeans"]).abs() < 1e-12);
}

#[test]
fn score_with_one_approach_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    analyze_minipet(d);
    let split = fixtures().join("minipet/split.json");
    ok(d, &["eval-decomposition", "--decomposition", split.to_str().unwrap(), "--corpus", "corpus", "--out", "reports/expert.json"]);
    let out = run(d, &["score", "--reports", "reports", "--out", "score.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("standardization undefined"));
}
