use std::collections::BTreeMap;
use std::path::PathBuf;

use monoembed_core::clustering::Decomposition;
use monoembed_core::code_model::{parse_class_units, DependencyGraph, LabeledCorpus, ParseOptions};
use monoembed_core::embedding::{embed_calls_row, embed_tfidf};
use monoembed_core::evaluation::{metrics_report, UseCaseTraces};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/minipet")
}

fn golden<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let text = std::fs::read_to_string(fixture().join("golden").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn corpus() -> LabeledCorpus {
    let parsed = parse_class_units(&fixture().join("src"), &ParseOptions::default()).unwrap();
    assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
    let labels: BTreeMap<String, String> = serde_json::from_str(
        &std::fs::read_to_string(fixture().join("labels.json")).unwrap(),
    )
    .unwrap();
    LabeledCorpus::from_classes("minipet", parsed.classes)
        .with_labels_by_fqn(&labels)
        .unwrap()
}

fn edges(g: &DependencyGraph) -> Vec<[u64; 3]> {
    g.edges().map(|(s, d, w)| [s as u64, d as u64, w]).collect()
}

#[test]
fn classes_in_fqn_order() {
    let c = corpus();
    let fqns: Vec<String> = c.classes.iter().map(|c| c.fqn.clone()).collect();
    assert_eq!(fqns, golden::<Vec<String>>("classes.json"));
    c.validate().unwrap();
}

#[test]
fn call_graph_matches_hand_trace() {
    assert_eq!(edges(&corpus().calls), golden::<Vec<[u64; 3]>>("calls.json"));
}

#[test]
fn interaction_graph_matches_hand_trace() {
    assert_eq!(edges(&corpus().interactions), golden::<Vec<[u64; 3]>>("interactions.json"));
}

#[test]
fn calls_row_embedding_is_the_call_table() {
    let c = corpus();
    let m = embed_calls_row(&c, false).unwrap();
    let mut expected = vec![vec![0.0; 12]; 12];
    for [s, d, w] in golden::<Vec<[u64; 3]>>("calls.json") {
        expected[s as usize][d as usize] = w as f64;
    }
    assert_eq!(m.to_rows(), expected);
}

#[test]
fn tfidf_width_is_the_vocabulary() {
    let c = corpus();
    let vocab: std::collections::BTreeSet<&String> = c.classes.iter().flat_map(|c| c.terms.keys()).collect();
    let m = embed_tfidf(&c).unwrap();
    assert_eq!((m.n(), m.m()), (12, vocab.len()));
}

#[test]
fn metric_battery_matches_oracle() {
    let c = corpus();
    let split = Decomposition::read(&fixture().join("split.json"), Some(c.len())).unwrap();
    split.validate().unwrap();
    let traces = UseCaseTraces::read(&fixture().join("traces.json")).unwrap();
    let report = metrics_report(&split, &c, Some(&traces), "manual").unwrap();
    let oracle: BTreeMap<String, f64> = golden("metrics.json");
    let got = [
        ("chm", report.chm),
        ("chd", report.chd),
        ("bcp", report.bcp.unwrap()),
        ("icp", report.icp),
        ("ned", report.ned),
        ("cov", report.cov),
    ];
    for (name, value) in got {
        assert!((value - oracle[name]).abs() < 1e-9, "{name}: {value} vs {}", oracle[name]);
    }
}
