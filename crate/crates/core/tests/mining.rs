use std::collections::BTreeSet;
use std::path::PathBuf;

use monoembed_core::code_model::ParseOptions;
use monoembed_core::corpus_builder::{
    discover_repos, mine_repos, sample_triplets, FixtureSearchClient, RepoSource, SamplerConfig, DEFAULT_MIN_STARS,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn sources() -> Vec<RepoSource> {
    let base = fixtures().join("repos");
    ["shop", "bank", "solo"].iter().map(|e| RepoSource::parse(e, &base)).collect()
}

#[test]
fn three_repos_one_rejected() {
    let clones = tempfile::tempdir().unwrap();
    let out = mine_repos(&sources(), clones.path(), true, &ParseOptions::default()).unwrap();
    let names: Vec<&str> = out.accepted.iter().map(|c| c.app_name.as_str()).collect();
    assert_eq!(names, vec!["shop", "bank"]);
    assert_eq!(out.rejected.len(), 1);
    assert_eq!(out.rejected[0].0, "solo");
    assert_eq!(out.rejected[0].1.code(), "<2 services");

    let shop = &out.accepted[0];
    assert_eq!(shop.services(), vec!["catalog", "orders"]);
    assert_eq!(shop.len(), 6);
    let bank = &out.accepted[1];
    assert_eq!(bank.services(), vec!["accounts", "payments"]);
}

#[test]
fn triplets_over_mined_corpora_respect_labels() {
    let clones = tempfile::tempdir().unwrap();
    let corpora = mine_repos(&sources(), clones.path(), true, &ParseOptions::default()).unwrap().accepted;
    let triplets = sample_triplets(
        &corpora,
        &SamplerConfig {
            max_samples: 500,
            seed: 5,
            exclusions: BTreeSet::from(["bank".to_string()]),
        },
    )
    .unwrap();
    let shop = &corpora[0];
    let labels = shop.labels.as_ref().unwrap();
    let label = |fqn: &str| &labels[shop.class_id(fqn).unwrap()];
    assert!(!triplets.is_empty());
    for t in &triplets {
        assert_eq!(t.repo, "shop");
        assert_eq!(label(&t.anchor), label(&t.positive));
        assert_ne!(label(&t.anchor), label(&t.negative));
        assert_ne!(t.anchor, t.positive);
    }
}

#[test]
fn discovery_filters_fixture_search_results() {
    let client = FixtureSearchClient::new(vec![fixtures().join("search/page-1.json")]);
    let found = discover_repos(&client, &["microservices".to_string()], DEFAULT_MIN_STARS, 3).unwrap();
    let urls: Vec<&str> = found.iter().map(|c| c.url.as_str()).collect();
    assert_eq!(urls, vec!["https://github.com/acme/shop.git", "https://github.com/acme/bank.git"]);
    assert_eq!(found[1].repo_name(), "acme__bank");
}
