//! Affine projection `e(c) = x(c)·W + b` trained with the triplet loss over
//! deterministic base features.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::baseline::TermSpace;
use super::loss::triplet_grad;
use super::EmbeddingMatrix;
use crate::code_model::LabeledCorpus;
use crate::corpus_builder::Triplet;
use crate::{Error, Result};

pub const PROJECTION_FORMAT: &str = "monoembed-projection-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseFeatures {
    Tfidf,
    Bow,
    /// Precomputed embeddings (e.g. from a remote provider) supplied by the caller.
    RemoteCached,
}

impl std::str::FromStr for BaseFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(Self::Tfidf),
            "bow" => Ok(Self::Bow),
            "remote-cached" => Ok(Self::RemoteCached),
            other => Err(Error::invalid(format!("unknown base features {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Triplet margin.
    pub alpha: f64,
    pub dim_out: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Triplets per optimizer step.
    pub batch: usize,
    pub seed: u64,
    pub base_features: BaseFeatures,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            dim_out: 32,
            epochs: 50,
            lr: 0.01,
            batch: 32,
            seed: 0,
            base_features: BaseFeatures::Tfidf,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if self.dim_out < 2 {
            return Err(Error::invalid("dim_out must be at least 2"));
        }
        if !(self.lr > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionModel {
    pub format: String,
    pub dim_in: usize,
    pub dim_out: usize,
    /// Row-major `dim_in × dim_out`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    /// Empty for cached base features.
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub config: TrainConfig,
}

impl ProjectionModel {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.b.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                let row = &self.w[i * self.dim_out..(i + 1) * self.dim_out];
                for (o, w) in out.iter_mut().zip(row) {
                    *o += xi * w;
                }
            }
        }
        out
    }

    fn term_space(&self) -> TermSpace {
        TermSpace {
            vocabulary: self.vocabulary.clone(),
            idf: self.idf.clone(),
        }
    }

    /// Base features of `corpus` under the frozen vocabulary.
    pub fn base_features(&self, corpus: &LabeledCorpus) -> Result<Vec<Vec<f64>>> {
        let space = self.term_space();
        match self.config.base_features {
            BaseFeatures::Tfidf => Ok(space.tfidf(corpus)),
            BaseFeatures::Bow => Ok(space.counts(corpus)),
            BaseFeatures::RemoteCached => Err(Error::invalid(
                "model was trained on cached embeddings; supply them with apply_projection_to",
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != PROJECTION_FORMAT {
            return Err(Error::invalid(format!("unsupported model format {:?}", self.format)));
        }
        if self.w.len() != self.dim_in * self.dim_out || self.b.len() != self.dim_out {
            return Err(Error::invalid("model parameter shapes do not match dim_in/dim_out"));
        }
        if self.config.base_features != BaseFeatures::RemoteCached
            && (self.vocabulary.len() != self.dim_in || self.idf.len() != self.dim_in)
        {
            return Err(Error::invalid("model vocabulary does not match dim_in"));
        }
        if self.w.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("model has non-finite parameters"));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: Self = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }
}

/// A trained model and the mean loss over all triplets before training
/// (entry 0) and after every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ProjectionModel,
    pub history: Vec<f64>,
}

/// Trains on TF-IDF or BoW features fitted over `corpora`.
pub fn train_projection(triplets: &[Triplet], corpora: &[LabeledCorpus], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let space = TermSpace::fit(corpora)?;
    let mut features = HashMap::new();
    for corpus in corpora {
        let rows = match cfg.base_features {
            BaseFeatures::Tfidf => space.tfidf(corpus),
            BaseFeatures::Bow => space.counts(corpus),
            BaseFeatures::RemoteCached => {
                return Err(Error::invalid("use train_projection_cached for cached base features"))
            }
        };
        features.insert(corpus.app_name.clone(), (corpus, rows));
    }
    train_inner(triplets, &features, space, cfg)
}

/// Trains on caller-supplied base embeddings, keyed by app name.
pub fn train_projection_cached(
    triplets: &[Triplet],
    corpora: &[LabeledCorpus],
    cached: &BTreeMap<String, EmbeddingMatrix>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut features = HashMap::new();
    for corpus in corpora {
        if let Some(m) = cached.get(&corpus.app_name) {
            if m.n() != corpus.len() {
                return Err(Error::invalid(format!(
                    "{}: cached embedding has {} rows for {} classes",
                    corpus.app_name,
                    m.n(),
                    corpus.len()
                )));
            }
            features.insert(corpus.app_name.clone(), (corpus, m.to_rows()));
        }
    }
    let space = TermSpace {
        vocabulary: Vec::new(),
        idf: Vec::new(),
    };
    let cfg = TrainConfig {
        base_features: BaseFeatures::RemoteCached,
        ..cfg.clone()
    };
    train_inner(triplets, &features, space, &cfg)
}

type FeatureTable<'a> = HashMap<String, (&'a LabeledCorpus, Vec<Vec<f64>>)>;

fn resolve<'f>(features: &'f FeatureTable<'_>, t: &Triplet) -> Result<[&'f [f64]; 3]> {
    let (corpus, rows) = features
        .get(&t.repo)
        .ok_or_else(|| Error::invalid(format!("triplet references unknown repository {}", t.repo)))?;
    let row = |fqn: &str| {
        corpus
            .class_id(fqn)
            .map(|id| rows[id].as_slice())
            .ok_or_else(|| Error::invalid(format!("triplet references unknown class {}:{fqn}", t.repo)))
    };
    Ok([row(&t.anchor)?, row(&t.positive)?, row(&t.negative)?])
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = Self::B1 * self.m[k] + (1.0 - Self::B1) * grad[k];
            self.v[k] = Self::B2 * self.v[k] + (1.0 - Self::B2) * grad[k] * grad[k];
            params[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + Self::EPS);
        }
    }
}

fn mean_loss(model: &ProjectionModel, resolved: &[[&[f64]; 3]], alpha: f64) -> Result<f64> {
    let mut total = 0.0;
    for [a, p, n] in resolved {
        total += super::loss::triplet_loss(&model.project(a), &model.project(p), &model.project(n), alpha)?;
    }
    Ok(total / resolved.len() as f64)
}

fn train_inner(triplets: &[Triplet], features: &FeatureTable<'_>, space: TermSpace, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if triplets.is_empty() {
        return Err(Error::invalid("no triplets to train on"));
    }
    let resolved = triplets
        .iter()
        .map(|t| resolve(features, t))
        .collect::<Result<Vec<_>>>()?;
    let dim_in = resolved[0][0].len();
    if dim_in == 0 {
        return Err(Error::invalid("base features are empty"));
    }
    let d = cfg.dim_out;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = Normal::new(0.0, 1.0 / (dim_in as f64).sqrt()).expect("finite std");
    let mut model = ProjectionModel {
        format: PROJECTION_FORMAT.into(),
        dim_in,
        dim_out: d,
        w: (0..dim_in * d).map(|_| init.sample(&mut rng)).collect(),
        b: vec![0.0; d],
        vocabulary: space.vocabulary,
        idf: space.idf,
        config: cfg.clone(),
    };

    let mut history = vec![mean_loss(&model, &resolved, cfg.alpha)?];
    let mut adam_w = Adam::new(model.w.len());
    let mut adam_b = Adam::new(d);
    let mut order: Vec<usize> = (0..resolved.len()).collect();
    let mut grad_w = vec![0.0; model.w.len()];
    let mut grad_b = vec![0.0; d];
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch) {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            grad_b.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / chunk.len() as f64;
            for &k in chunk {
                let [xa, xp, xn] = resolved[k];
                let g = triplet_grad(&model.project(xa), &model.project(xp), &model.project(xn), cfg.alpha)?;
                if !g.loss.is_finite() {
                    return Err(Error::invalid(format!(
                        "non-finite loss in epoch {epoch} on triplet {:?}",
                        triplets[k]
                    )));
                }
                if g.loss == 0.0 {
                    continue;
                }
                for (x, ge) in [(xa, &g.da), (xp, &g.dp), (xn, &g.dn)] {
                    for (i, &xi) in x.iter().enumerate() {
                        if xi != 0.0 {
                            let row = &mut grad_w[i * d..(i + 1) * d];
                            for (gw, gv) in row.iter_mut().zip(ge.iter()) {
                                *gw += scale * xi * gv;
                            }
                        }
                    }
                    for (gb, gv) in grad_b.iter_mut().zip(ge.iter()) {
                        *gb += scale * gv;
                    }
                }
            }
            adam_w.step(&mut model.w, &grad_w, cfg.lr);
            adam_b.step(&mut model.b, &grad_b, cfg.lr);
        }
        let loss = mean_loss(&model, &resolved, cfg.alpha)?;
        if !loss.is_finite() {
            return Err(Error::invalid(format!("non-finite mean loss after epoch {epoch}")));
        }
        log::debug!("epoch {epoch}: mean triplet loss {loss:.6}");
        history.push(loss);
    }
    Ok(TrainOutcome { model, history })
}

/// Projects every class of `corpus` with the model's frozen base features.
pub fn apply_projection(model: &ProjectionModel, corpus: &LabeledCorpus) -> Result<EmbeddingMatrix> {
    let rows = model
        .base_features(corpus)?
        .iter()
        .map(|x| model.project(x))
        .collect();
    EmbeddingMatrix::from_rows(&corpus.app_name, "projection", rows)
}

/// Projects precomputed base embeddings.
pub fn apply_projection_to(model: &ProjectionModel, base: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    if base.m() != model.dim_in {
        return Err(Error::DimensionMismatch {
            expected: model.dim_in,
            got: base.m(),
        });
    }
    let rows = base.rows().map(|x| model.project(x)).collect();
    EmbeddingMatrix::with_ids(&base.app_name, "projection", rows, base.class_ids().to_vec())
}

pub fn write_history(path: &Path, history: &[f64]) -> Result<()> {
    let mut text = String::from("epoch,loss\n");
    for (epoch, loss) in history.iter().enumerate() {
        text.push_str(&format!("{epoch},{loss:?}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{ClassUnit, TermBag};

    fn corpus(app: &str, bags: &[&[(&str, u32)]]) -> LabeledCorpus {
        let classes = bags
            .iter()
            .enumerate()
            .map(|(i, bag)| ClassUnit {
                id: i,
                fqn: format!("c{i}"),
                path: String::new(),
                source: String::new(),
                methods: vec![],
                terms: bag.iter().map(|(t, c)| (t.to_string(), *c)).collect::<TermBag>(),
            })
            .collect();
        LabeledCorpus::from_classes(app, classes)
    }

    fn triplet(a: &str, p: &str, n: &str) -> Triplet {
        Triplet {
            repo: "r".into(),
            anchor: a.into(),
            positive: p.into(),
            negative: n.into(),
        }
    }

    fn model_with(w: Vec<f64>, b: Vec<f64>, vocab: &[&str], idf: Vec<f64>) -> ProjectionModel {
        ProjectionModel {
            format: PROJECTION_FORMAT.into(),
            dim_in: vocab.len(),
            dim_out: b.len(),
            w,
            b,
            vocabulary: vocab.iter().map(|s| s.to_string()).collect(),
            idf,
            config: TrainConfig {
                base_features: BaseFeatures::Bow,
                ..TrainConfig::default()
            },
        }
    }

    #[test]
    fn identity_projection_returns_base_features() {
        let c = corpus("r", &[&[("aa", 2)], &[("bb", 3)]]);
        let m = model_with(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], &["aa", "bb"], vec![1.0, 1.0]);
        assert_eq!(apply_projection(&m, &c).unwrap().to_rows(), vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
    }

    #[test]
    fn bias_only_projection() {
        let c = corpus("r", &[&[("aa", 2)], &[("zz", 3)]]);
        let m = model_with(vec![0.0; 4], vec![0.5, -1.0], &["aa", "bb"], vec![1.0, 1.0]);
        let out = apply_projection(&m, &c).unwrap();
        assert!(out.rows().all(|r| r == [0.5, -1.0]));
    }

    #[test]
    fn zero_gradient_step_leaves_parameters() {
        // anchor and positive share features; negative is far away in a third term
        let c = corpus("r", &[&[("aa", 1)], &[("aa", 1)], &[("zz", 50)]]);
        let cfg = TrainConfig {
            alpha: 1e-3,
            dim_out: 2,
            epochs: 1,
            batch: 1,
            base_features: BaseFeatures::Bow,
            ..TrainConfig::default()
        };
        let mut frozen = cfg.clone();
        frozen.epochs = 0;
        let t = [triplet("c0", "c1", "c2")];
        let before = train_projection(&t, std::slice::from_ref(&c), &frozen).unwrap();
        let after = train_projection(&t, std::slice::from_ref(&c), &cfg).unwrap();
        assert_eq!(before.history[0], 0.0);
        assert_eq!(before.model.w, after.model.w);
        assert_eq!(before.model.b, after.model.b);
    }

    #[test]
    fn training_reduces_loss() {
        let c = corpus(
            "r",
            &[
                &[("order", 1), ("controller", 4)],
                &[("order", 1), ("repository", 4)],
                &[("payment", 1), ("controller", 4)],
                &[("payment", 1), ("repository", 4)],
            ],
        );
        let ts = vec![
            triplet("c0", "c1", "c2"),
            triplet("c1", "c0", "c3"),
            triplet("c2", "c3", "c0"),
            triplet("c3", "c2", "c1"),
        ];
        let cfg = TrainConfig {
            epochs: 100,
            dim_out: 4,
            batch: 2,
            lr: 0.05,
            ..TrainConfig::default()
        };
        let out = train_projection(&ts, &[c], &cfg).unwrap();
        assert!(out.history.last().unwrap() < &out.history[0]);
        assert_eq!(out.history.len(), 101);
    }

    #[test]
    fn empty_triplets_rejected() {
        let c = corpus("r", &[&[("aa", 1)]]);
        assert!(train_projection(&[], &[c], &TrainConfig::default()).is_err());
    }

    #[test]
    fn model_file_roundtrip() {
        let m = model_with(vec![1.0, 2.0, 3.0, 4.0], vec![0.1, 0.2], &["aa", "bb"], vec![0.5, 0.25]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.write(&p).unwrap();
        assert_eq!(ProjectionModel::read(&p).unwrap(), m);
    }

    #[test]
    fn cached_features_roundtrip_through_projection() {
        let c = corpus("r", &[&[], &[], &[]]);
        let base = EmbeddingMatrix::from_rows("r", "remote", vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![5.0, 5.0]]).unwrap();
        let cached = BTreeMap::from([("r".to_string(), base.clone())]);
        let cfg = TrainConfig {
            epochs: 3,
            dim_out: 2,
            ..TrainConfig::default()
        };
        let out = train_projection_cached(&[triplet("c0", "c1", "c2")], &[c], &cached, &cfg).unwrap();
        assert_eq!(out.model.config.base_features, BaseFeatures::RemoteCached);
        let projected = apply_projection_to(&out.model, &base).unwrap();
        assert_eq!(projected.n(), 3);
        assert_eq!(projected.m(), 2);
    }
}
