use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::remote::{embed_remote, RemoteConfig, DEFAULT_INSTRUCTION};
use super::{apply_projection, embed_bow, embed_calls_row, embed_interactions_row, embed_tfidf, EmbeddingMatrix, ProjectionModel};
use crate::code_model::LabeledCorpus;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Bow,
    Tfidf,
    CallsRow,
    InteractionsRow,
    Remote,
    Projection,
}

impl ProviderKind {
    pub const ALL: [ProviderKind; 6] = [
        ProviderKind::Bow,
        ProviderKind::Tfidf,
        ProviderKind::CallsRow,
        ProviderKind::InteractionsRow,
        ProviderKind::Remote,
        ProviderKind::Projection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProviderKind::Bow => "bow",
            ProviderKind::Tfidf => "tfidf",
            ProviderKind::CallsRow => "calls_row",
            ProviderKind::InteractionsRow => "interactions_row",
            ProviderKind::Remote => "remote",
            ProviderKind::Projection => "projection",
        }
    }
}

impl std::str::FromStr for ProviderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProviderKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| Error::invalid(format!("unknown provider {s:?}")))
    }
}

/// Resolved provider settings. `remote` is required for the remote kind and
/// `model_path` for the projection kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    /// Mirror the adjacency matrix for the graph-row providers.
    pub symmetric: bool,
    pub remote: Option<RemoteConfig>,
    pub model_path: Option<PathBuf>,
}

impl ProviderConfig {
    pub fn new(kind: ProviderKind) -> Self {
        Self {
            kind,
            symmetric: false,
            remote: None,
            model_path: None,
        }
    }

    /// Remote provider; `instruct` selects the default bounded-context
    /// instruction when no explicit one is given.
    pub fn remote(mut remote: RemoteConfig, instruct: bool) -> Self {
        if instruct && remote.instruction.is_none() {
            remote.instruction = Some(DEFAULT_INSTRUCTION.to_string());
        }
        Self {
            remote: Some(remote),
            ..Self::new(ProviderKind::Remote)
        }
    }
}

/// An embedding source for whole corpora.
pub trait Embedder {
    fn name(&self) -> String;
    fn embed(&self, corpus: &LabeledCorpus) -> Result<EmbeddingMatrix>;
}

/// Provider backed by a [`ProviderConfig`]; a projection model is loaded once.
pub struct ConfiguredEmbedder {
    cfg: ProviderConfig,
    model: Option<ProjectionModel>,
}

impl ConfiguredEmbedder {
    pub fn new(cfg: ProviderConfig) -> Result<Self> {
        let model = match cfg.kind {
            ProviderKind::Projection => {
                let path = cfg
                    .model_path
                    .as_ref()
                    .ok_or_else(|| Error::invalid("projection provider requires a model file"))?;
                Some(ProjectionModel::read(path)?)
            }
            ProviderKind::Remote if cfg.remote.is_none() => {
                return Err(Error::invalid("remote provider requires an endpoint and a model name"))
            }
            _ => None,
        };
        Ok(Self { cfg, model })
    }

    pub fn with_model(model: ProjectionModel) -> Self {
        Self {
            cfg: ProviderConfig::new(ProviderKind::Projection),
            model: Some(model),
        }
    }
}

impl Embedder for ConfiguredEmbedder {
    fn name(&self) -> String {
        self.cfg.kind.name().to_string()
    }

    fn embed(&self, corpus: &LabeledCorpus) -> Result<EmbeddingMatrix> {
        match self.cfg.kind {
            ProviderKind::Bow => embed_bow(corpus),
            ProviderKind::Tfidf => embed_tfidf(corpus),
            ProviderKind::CallsRow => embed_calls_row(corpus, self.cfg.symmetric),
            ProviderKind::InteractionsRow => embed_interactions_row(corpus, self.cfg.symmetric),
            ProviderKind::Remote => embed_remote(corpus, self.cfg.remote.as_ref().expect("checked in new")),
            ProviderKind::Projection => apply_projection(self.model.as_ref().expect("checked in new"), corpus),
        }
    }
}

/// Fixed precomputed matrices, looked up by app name.
pub struct PrecomputedEmbedder {
    pub name: String,
    pub matrices: std::collections::BTreeMap<String, EmbeddingMatrix>,
}

impl Embedder for PrecomputedEmbedder {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn embed(&self, corpus: &LabeledCorpus) -> Result<EmbeddingMatrix> {
        let m = self
            .matrices
            .get(&corpus.app_name)
            .ok_or_else(|| Error::invalid(format!("no precomputed embedding for {}", corpus.app_name)))?;
        if m.n() != corpus.len() {
            return Err(Error::invalid(format!(
                "{}: embedding has {} rows for {} classes",
                corpus.app_name,
                m.n(),
                corpus.len()
            )));
        }
        Ok(m.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse_both_spellings() {
        assert_eq!("calls_row".parse::<ProviderKind>().unwrap(), ProviderKind::CallsRow);
        assert_eq!("calls-row".parse::<ProviderKind>().unwrap(), ProviderKind::CallsRow);
        assert!("word2vec".parse::<ProviderKind>().is_err());
    }

    #[test]
    fn instruct_sets_default_instruction() {
        let cfg = ProviderConfig::remote(RemoteConfig::new("http://x", "m"), true);
        assert_eq!(cfg.remote.unwrap().instruction.as_deref(), Some(DEFAULT_INSTRUCTION));
    }

    #[test]
    fn remote_without_endpoint_is_rejected() {
        assert!(ConfiguredEmbedder::new(ProviderConfig::new(ProviderKind::Remote)).is_err());
        assert!(ConfiguredEmbedder::new(ProviderConfig::new(ProviderKind::Projection)).is_err());
    }
}
