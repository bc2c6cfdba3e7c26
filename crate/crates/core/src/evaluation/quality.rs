//! Embedding quality: balanced log loss between pairwise cosine similarities
//! and same-service labels, per application.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::code_model::LabeledCorpus;
use crate::embedding::{Embedder, EmbeddingMatrix};
use crate::{Error, Result};

pub const CLAMP_EPS: f64 = 1e-7;
pub const QUALITY_VERSION: &str = "quality-bce-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub provider: String,
    pub per_app: BTreeMap<String, f64>,
    pub mean: f64,
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// `-½ [mean ln s over positives + mean ln(1 − s) over negatives]` with `s`
/// clamped to `[ε, 1 − ε]`.
pub fn balanced_log_loss(similarities: &[f64], same: &[bool]) -> Result<f64> {
    let (mut pos, mut np, mut neg, mut nn) = (0.0, 0usize, 0.0, 0usize);
    for (&s, &label) in similarities.iter().zip(same) {
        let s = s.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
        if label {
            pos += s.ln();
            np += 1;
        } else {
            neg += (1.0 - s).ln();
            nn += 1;
        }
    }
    if np == 0 || nn == 0 {
        return Err(Error::invalid("need at least one same-service and one cross-service pair"));
    }
    Ok(-0.5 * (pos / np as f64 + neg / nn as f64))
}

/// Min-max normalizes raw similarities, then applies [`balanced_log_loss`].
pub fn score_similarities(raw: &[f64], same: &[bool]) -> Result<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::invalid("all pairwise similarities are identical"));
    }
    let normalized: Vec<f64> = raw.iter().map(|s| (s - lo) / (hi - lo)).collect();
    balanced_log_loss(&normalized, same)
}

/// Quality score of one standardized-on-the-fly embedding against labels.
pub fn quality_score(matrix: &EmbeddingMatrix, labels: &[String]) -> Result<f64> {
    let name = &matrix.app_name;
    if labels.len() != matrix.n() {
        return Err(Error::invalid(format!("{name}: {} labels for {} rows", labels.len(), matrix.n())));
    }
    let z = matrix.standardize()?;
    let n = z.n();
    let mut sims = Vec::with_capacity(n * (n - 1) / 2);
    let mut same = Vec::with_capacity(sims.capacity());
    for i in 0..n {
        for j in i + 1..n {
            sims.push(cosine(z.row(i), z.row(j)));
            same.push(labels[z.class_ids()[i]] == labels[z.class_ids()[j]]);
        }
    }
    if !same.contains(&true) || !same.contains(&false) {
        return Err(Error::invalid(format!(
            "{name}: need at least one same-service and one cross-service pair"
        )));
    }
    score_similarities(&sims, &same).map_err(|e| Error::invalid(format!("{name}: {e}")))
}

/// Scores every corpus with `embedder`; apps are reported in sorted order.
pub fn embedding_quality_score(embedder: &dyn Embedder, corpora: &[LabeledCorpus]) -> Result<QualityReport> {
    if corpora.is_empty() {
        return Err(Error::invalid("no corpora to score"));
    }
    let mut per_app = BTreeMap::new();
    for corpus in corpora {
        let labels = corpus
            .labels
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("{}: corpus has no service labels", corpus.app_name)))?;
        if corpus.services().len() < 2 {
            return Err(Error::invalid(format!("{}: only one service", corpus.app_name)));
        }
        let matrix = embedder.embed(corpus)?;
        let score = quality_score(&matrix, labels)?;
        if per_app.insert(corpus.app_name.clone(), score).is_some() {
            return Err(Error::invalid(format!("duplicate app {}", corpus.app_name)));
        }
    }
    let mean = per_app.values().sum::<f64>() / per_app.len() as f64;
    Ok(QualityReport {
        provider: embedder.name(),
        per_app,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        let s = balanced_log_loss(&[1.0, 0.0, 1.0, 0.0], &[true, false, true, false]).unwrap();
        let expected = -0.5 * (2.0 * (1.0 - CLAMP_EPS).ln());
        assert_eq!(s, expected);
        assert!((s - 1e-7).abs() < 1e-12);
    }

    #[test]
    fn uninformative() {
        let s = balanced_log_loss(&[0.5; 6], &[true, false, false, true, false, false]).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn constant_similarities_are_rejected() {
        assert!(score_similarities(&[0.3, 0.3], &[true, false]).is_err());
    }

    #[test]
    fn zero_vector_cosine() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
        assert!((cosine(&[1.0, 0.0], &[2.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_embedding_scores_near_zero() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let m = EmbeddingMatrix::from_rows("b", "x", rows).unwrap();
        let labels: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        assert!(quality_score(&m, &labels).unwrap() < 1e-6);
    }
}
