//! Hard-negative triplet sampling over labelled corpora.
//!
//! Each iteration picks a repository uniformly, then a service uniformly
//! among those with at least two classes, then two distinct classes of that
//! service (anchor, positive), then a negative uniformly over all classes of
//! the other services of the same repository. Exact duplicates are removed
//! after the loop, keeping first occurrences.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code_model::LabeledCorpus;
use crate::{Error, Result};

pub const TRIPLETS_FORMAT: &str = "monoembed-triplets-v1";

/// Anchor and positive share a service; the negative comes from another
/// service of the same repository. Classes are referenced by fqn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub repo: String,
    pub anchor: String,
    pub positive: String,
    pub negative: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Maximum number of sampling iterations (and so of triplets).
    pub max_samples: usize,
    pub seed: u64,
    /// Repositories never sampled (evaluation holdout).
    pub exclusions: BTreeSet<String>,
}

struct Eligible<'a> {
    corpus: &'a LabeledCorpus,
    /// service -> member class ids
    services: Vec<Vec<usize>>,
    /// indices into `services` with at least two members
    anchor_services: Vec<usize>,
}

fn eligibility<'a>(corpus: &'a LabeledCorpus, cfg: &SamplerConfig) -> std::result::Result<Eligible<'a>, String> {
    if cfg.exclusions.contains(&corpus.app_name) {
        return Err("excluded".into());
    }
    let Some(labels) = &corpus.labels else {
        return Err("unlabelled".into());
    };
    let mut by_service: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (id, label) in labels.iter().enumerate() {
        by_service.entry(label.as_str()).or_default().push(id);
    }
    if by_service.len() < 2 {
        return Err(format!("{} service(s), need 2", by_service.len()));
    }
    let services: Vec<Vec<usize>> = by_service.into_values().collect();
    let anchor_services: Vec<usize> = services
        .iter()
        .enumerate()
        .filter(|(_, members)| members.len() >= 2)
        .map(|(i, _)| i)
        .collect();
    if anchor_services.is_empty() {
        return Err("no service has two classes".into());
    }
    Ok(Eligible {
        corpus,
        services,
        anchor_services,
    })
}

pub fn sample_triplets(corpora: &[LabeledCorpus], cfg: &SamplerConfig) -> Result<Vec<Triplet>> {
    if cfg.max_samples == 0 {
        return Err(Error::invalid("sample count K must be positive"));
    }
    let mut eligible = Vec::new();
    let mut reasons = Vec::new();
    for corpus in corpora {
        match eligibility(corpus, cfg) {
            Ok(e) => eligible.push(e),
            Err(why) => reasons.push(format!("{}: {why}", corpus.app_name)),
        }
    }
    if eligible.is_empty() {
        let detail = if reasons.is_empty() {
            "no corpora given".to_string()
        } else {
            reasons.join("; ")
        };
        return Err(Error::invalid(format!("no eligible corpus for triplet sampling ({detail})")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..cfg.max_samples {
        let repo = eligible.choose(&mut rng).expect("non-empty");
        let service = *repo.anchor_services.choose(&mut rng).expect("non-empty");
        let members = &repo.services[service];
        let a = rng.random_range(0..members.len());
        let mut p = rng.random_range(0..members.len() - 1);
        if p >= a {
            p += 1;
        }
        let others = repo.corpus.len() - members.len();
        let mut pick = rng.random_range(0..others);
        let mut negative = 0;
        for (s, ids) in repo.services.iter().enumerate() {
            if s == service {
                continue;
            }
            if pick < ids.len() {
                negative = ids[pick];
                break;
            }
            pick -= ids.len();
        }
        let classes = &repo.corpus.classes;
        let triplet = Triplet {
            repo: repo.corpus.app_name.clone(),
            anchor: classes[members[a]].fqn.clone(),
            positive: classes[members[p]].fqn.clone(),
            negative: classes[negative].fqn.clone(),
        };
        if seen.insert(triplet.clone()) {
            out.push(triplet);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct TripletHeader {
    format: String,
    count: usize,
    seed: u64,
}

pub fn write_triplets(path: &Path, triplets: &[Triplet], seed: u64) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let header = TripletHeader {
        format: TRIPLETS_FORMAT.into(),
        count: triplets.len(),
        seed,
    };
    let mut emit = |line: String| out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e));
    emit(serde_json::to_string(&header)? + "\n")?;
    for t in triplets {
        emit(serde_json::to_string(t)? + "\n")?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a triplet file; returns the triplets and the recorded seed.
pub fn read_triplets(path: &Path) -> Result<(Vec<Triplet>, u64)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header: TripletHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line.map_err(|e| Error::io(path, e))?)?,
        None => return Err(Error::invalid(format!("{}: empty triplet file", path.display()))),
    };
    if header.format != TRIPLETS_FORMAT {
        return Err(Error::invalid(format!(
            "{}: unsupported format {:?}",
            path.display(),
            header.format
        )));
    }
    let mut triplets = Vec::with_capacity(header.count);
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            triplets.push(serde_json::from_str(&line)?);
        }
    }
    if triplets.len() != header.count {
        return Err(Error::invalid(format!(
            "{}: header count {} but {} triplets",
            path.display(),
            header.count,
            triplets.len()
        )));
    }
    Ok((triplets, header.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::labelled_corpus;

    fn cfg(k: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            max_samples: k,
            seed,
            exclusions: BTreeSet::new(),
        }
    }

    #[test]
    fn single_possible_negative() {
        let corpus = labelled_corpus("tiny", &[("s1", &["a", "b"]), ("s2", &["c"])]);
        let out = sample_triplets(&[corpus], &cfg(1, 7)).unwrap();
        assert_eq!(out.len(), 1);
        let t = &out[0];
        assert_eq!(t.negative, "c");
        assert!((t.anchor == "a" && t.positive == "b") || (t.anchor == "b" && t.positive == "a"));
    }

    #[test]
    fn dedup_bounds_tiny_space() {
        let corpus = labelled_corpus("tiny", &[("s1", &["a", "b"]), ("s2", &["c"])]);
        let out = sample_triplets(&[corpus], &cfg(10_000, 3)).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn excluded_only_repo_is_fatal() {
        let corpus = labelled_corpus("tiny", &[("s1", &["a", "b"]), ("s2", &["c"])]);
        let mut c = cfg(5, 1);
        c.exclusions.insert("tiny".into());
        let err = sample_triplets(&[corpus], &c).unwrap_err();
        assert!(err.to_string().contains("tiny: excluded"));
    }

    #[test]
    fn ineligible_reasons_are_listed() {
        let single = labelled_corpus("one", &[("s1", &["a", "b"])]);
        let singletons = labelled_corpus("two", &[("s1", &["a"]), ("s2", &["b"])]);
        let err = sample_triplets(&[single, singletons], &cfg(5, 1)).unwrap_err().to_string();
        assert!(err.contains("one: 1 service(s)"));
        assert!(err.contains("two: no service has two classes"));
    }

    #[test]
    fn file_roundtrip() {
        let corpus = labelled_corpus("r", &[("s1", &["a", "b", "c"]), ("s2", &["d", "e"])]);
        let triplets = sample_triplets(&[corpus], &cfg(50, 11)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        write_triplets(&path, &triplets, 11).unwrap();
        let (back, seed) = read_triplets(&path).unwrap();
        assert_eq!(back, triplets);
        assert_eq!(seed, 11);
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.starts_with(&format!(
            "{{\"format\":\"monoembed-triplets-v1\",\"count\":{},\"seed\":11}}\n",
            triplets.len()
        )));
    }
}
