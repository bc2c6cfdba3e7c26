//! Java static-analysis substrate: class units, dependency graphs and terms.

mod graph;
mod io;
mod parser;
pub mod terms;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use graph::{build_call_graph, build_graphs, build_interaction_graph};
pub use io::{
    read_corpus, read_graph, write_corpus, write_graph, CORPUS_FILE, CORPUS_FORMAT, CALLS_FILE,
    INTERACTIONS_FILE,
};
pub use parser::{assign_ids, parse_class_units, ParseOptions, ParsedClasses};
pub use terms::{extract_terms, TermBag};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Protected,
    Package,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSig {
    pub name: String,
    #[serde(rename = "params")]
    pub param_types: Vec<String>,
    #[serde(rename = "ret")]
    pub return_type: String,
    #[serde(rename = "vis")]
    pub visibility: Visibility,
}

/// One top-level Java type. Nested types are folded into their enclosing
/// top-level class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassUnit {
    pub id: usize,
    pub fqn: String,
    /// Source file, relative to the analysed root, `/`-separated.
    pub path: String,
    /// Package/import preamble followed by the type declaration.
    pub source: String,
    pub methods: Vec<MethodSig>,
    pub terms: TermBag,
}

impl ClassUnit {
    pub fn simple_name(&self) -> &str {
        self.fqn.rsplit('.').next().unwrap_or(&self.fqn)
    }

    pub fn package(&self) -> &str {
        self.fqn.rsplit_once('.').map(|(p, _)| p).unwrap_or("")
    }

    pub fn public_methods(&self) -> impl Iterator<Item = &MethodSig> {
        self.methods
            .iter()
            .filter(|m| m.visibility == Visibility::Public)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Calls,
    Interactions,
}

/// Weighted directed class graph. Weights are positive counts; self loops
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub kind: GraphKind,
    pub n: usize,
    edges: BTreeMap<(usize, usize), u64>,
}

impl DependencyGraph {
    pub fn new(kind: GraphKind, n: usize) -> Self {
        Self {
            kind,
            n,
            edges: BTreeMap::new(),
        }
    }

    /// Adds `weight` to edge `src -> dst`. Self loops and zero weights are ignored.
    pub fn add(&mut self, src: usize, dst: usize, weight: u64) -> Result<()> {
        if src >= self.n || dst >= self.n {
            return Err(Error::invalid(format!(
                "edge ({src}, {dst}) out of range for {} classes",
                self.n
            )));
        }
        if src != dst && weight > 0 {
            *self.edges.entry((src, dst)).or_insert(0) += weight;
        }
        Ok(())
    }

    pub fn weight(&self, src: usize, dst: usize) -> u64 {
        self.edges.get(&(src, dst)).copied().unwrap_or(0)
    }

    /// Edges as `(src, dst, weight)` in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(s, d), &w)| (s, d, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }
}

/// An application's classes, both dependency graphs and optional service labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub app_name: String,
    pub classes: Vec<ClassUnit>,
    pub calls: DependencyGraph,
    pub interactions: DependencyGraph,
    /// `labels[id]` is the owning service of class `id`.
    pub labels: Option<Vec<String>>,
}

impl LabeledCorpus {
    /// Builds graphs for `classes` (ids must already be `0..n` in fqn order).
    pub fn from_classes(app_name: impl Into<String>, classes: Vec<ClassUnit>) -> Self {
        let (calls, interactions) = build_graphs(&classes);
        Self {
            app_name: app_name.into(),
            classes,
            calls,
            interactions,
            labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_id(&self, fqn: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.fqn.as_str().cmp(fqn))
            .ok()
    }

    /// Attaches labels given as fqn -> service. Every class must be labelled.
    pub fn with_labels_by_fqn(mut self, labels: &BTreeMap<String, String>) -> Result<Self> {
        let mut out = Vec::with_capacity(self.classes.len());
        for class in &self.classes {
            let label = labels.get(&class.fqn).ok_or_else(|| {
                Error::invalid(format!("class {} has no service label", class.fqn))
            })?;
            out.push(label.clone());
        }
        self.labels = Some(out);
        Ok(self)
    }

    /// Distinct service names in sorted order.
    pub fn services(&self) -> Vec<String> {
        let mut names: Vec<String> = self.labels.iter().flatten().cloned().collect();
        names.sort();
        names.dedup();
        names
    }

    /// Checks the structural invariants of a corpus.
    pub fn validate(&self) -> Result<()> {
        let n = self.classes.len();
        for (i, class) in self.classes.iter().enumerate() {
            if class.id != i {
                return Err(Error::invalid(format!(
                    "{}: class {} has id {} at position {i}",
                    self.app_name, class.fqn, class.id
                )));
            }
            if i > 0 && self.classes[i - 1].fqn >= class.fqn {
                return Err(Error::invalid(format!(
                    "{}: classes not strictly ordered by fqn at {}",
                    self.app_name, class.fqn
                )));
            }
        }
        if self.calls.n != n || self.interactions.n != n {
            return Err(Error::invalid(format!(
                "{}: graph size does not match {n} classes",
                self.app_name
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::invalid(format!(
                    "{}: {} labels for {n} classes",
                    self.app_name,
                    labels.len()
                )));
            }
        }
        Ok(())
    }
}
