use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::code_model::{DependencyGraph, LabeledCorpus};
use crate::{Error, Result};

pub const TFIDF_VERSION: &str = "tfidf-smooth-v1";

/// Sorted term vocabulary with smoothed inverse document frequencies
/// `ln((1 + N) / (1 + df))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpace {
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
}

impl TermSpace {
    /// Fits vocabulary and idf over every class of every corpus.
    pub fn fit<'a>(corpora: impl IntoIterator<Item = &'a LabeledCorpus>) -> Result<Self> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        let mut docs = 0usize;
        for corpus in corpora {
            for class in &corpus.classes {
                docs += 1;
                for term in class.terms.keys() {
                    *df.entry(term.as_str()).or_insert(0) += 1;
                }
            }
        }
        if df.is_empty() {
            return Err(Error::invalid("no semantic terms"));
        }
        let n = docs as f64;
        Ok(Self {
            vocabulary: df.keys().map(|t| t.to_string()).collect(),
            idf: df
                .values()
                .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln())
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    fn index(&self) -> BTreeMap<&str, usize> {
        self.vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect()
    }

    /// Raw term counts per class; out-of-vocabulary terms are dropped.
    pub fn counts(&self, corpus: &LabeledCorpus) -> Vec<Vec<f64>> {
        let index = self.index();
        corpus
            .classes
            .iter()
            .map(|class| {
                let mut row = vec![0.0; self.dim()];
                for (term, &count) in &class.terms {
                    if let Some(&j) = index.get(term.as_str()) {
                        row[j] = count as f64;
                    }
                }
                row
            })
            .collect()
    }

    /// TF-IDF rows (`tf × idf`), not re-normalized.
    pub fn tfidf(&self, corpus: &LabeledCorpus) -> Vec<Vec<f64>> {
        let mut rows = self.counts(corpus);
        for row in &mut rows {
            for (v, idf) in row.iter_mut().zip(&self.idf) {
                *v *= idf;
            }
        }
        rows
    }
}

/// Term-count rows over the corpus vocabulary.
pub fn embed_bow(corpus: &LabeledCorpus) -> Result<EmbeddingMatrix> {
    let space = TermSpace::fit([corpus])?;
    EmbeddingMatrix::from_rows(&corpus.app_name, "bow", space.counts(corpus))
}

/// TF-IDF rows over the corpus vocabulary, with the corpus as document set.
pub fn embed_tfidf(corpus: &LabeledCorpus) -> Result<EmbeddingMatrix> {
    let space = TermSpace::fit([corpus])?;
    EmbeddingMatrix::from_rows(&corpus.app_name, "tfidf", space.tfidf(corpus))
}

fn adjacency(graph: &DependencyGraph, symmetric: bool) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; graph.n]; graph.n];
    for (s, d, w) in graph.edges() {
        rows[s][d] += w as f64;
        if symmetric {
            rows[d][s] += w as f64;
        }
    }
    rows
}

fn graph_matrix(corpus: &LabeledCorpus, graph: &DependencyGraph, provider: &str, symmetric: bool) -> Result<EmbeddingMatrix> {
    if graph.n == 0 {
        return Err(Error::invalid(format!("{}: corpus has no classes", corpus.app_name)));
    }
    EmbeddingMatrix::from_rows(&corpus.app_name, provider, adjacency(graph, symmetric))
}

/// Row `i` is the outgoing call weights of class `i`.
pub fn embed_calls_row(corpus: &LabeledCorpus, symmetric: bool) -> Result<EmbeddingMatrix> {
    graph_matrix(corpus, &corpus.calls, "calls_row", symmetric)
}

pub fn embed_interactions_row(corpus: &LabeledCorpus, symmetric: bool) -> Result<EmbeddingMatrix> {
    graph_matrix(corpus, &corpus.interactions, "interactions_row", symmetric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{ClassUnit, GraphKind, TermBag};

    fn corpus(bags: &[&[(&str, u32)]]) -> LabeledCorpus {
        let classes = bags
            .iter()
            .enumerate()
            .map(|(i, bag)| ClassUnit {
                id: i,
                fqn: format!("c{i}"),
                path: format!("c{i}.java"),
                source: String::new(),
                methods: vec![],
                terms: bag.iter().map(|(t, c)| (t.to_string(), *c)).collect::<TermBag>(),
            })
            .collect();
        LabeledCorpus::from_classes("t", classes)
    }

    #[test]
    fn disjoint_terms_give_identity_pattern() {
        let m = embed_bow(&corpus(&[&[("alpha", 1)], &[("beta", 1)]])).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn tfidf_cell_value() {
        let m = embed_tfidf(&corpus(&[&[("pet", 3)], &[("owner", 1)]])).unwrap();
        // columns sorted: owner, pet
        let expected = 3.0 * (3.0f64 / 2.0).ln();
        assert_eq!(m.get(0, 1), expected);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn identical_bags_identical_rows() {
        let m = embed_tfidf(&corpus(&[&[("a1", 2), ("b2", 1)], &[("a1", 2), ("b2", 1)], &[("c3", 1)]])).unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let err = embed_tfidf(&corpus(&[&[], &[]])).unwrap_err();
        assert_eq!(err.to_string(), "no semantic terms");
    }

    #[test]
    fn calls_rows_materialize_the_graph() {
        let mut c = corpus(&[&[], &[]]);
        c.calls = DependencyGraph::new(GraphKind::Calls, 2);
        c.calls.add(0, 1, 2).unwrap();
        assert_eq!(embed_calls_row(&c, false).unwrap().to_rows(), vec![vec![0.0, 2.0], vec![0.0, 0.0]]);
        assert_eq!(embed_calls_row(&c, true).unwrap().to_rows(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        c.calls = DependencyGraph::new(GraphKind::Calls, 2);
        assert_eq!(embed_calls_row(&c, false).unwrap().to_rows(), vec![vec![0.0; 2]; 2]);
    }
}
