//! Partitioning of (standardized) embeddings into candidate services.

mod affinity;
mod dbscan;
mod decomposition;
mod kmeans;
mod ward;

use serde::{Deserialize, Serialize};

pub use affinity::{affinity_propagation, default_preference, similarity_matrix, CONVERGENCE_ITER, PREFERENCE_RAISES};
pub use dbscan::{dbscan, dbscan_labels, NoisePolicy};
pub use decomposition::Decomposition;
pub use kmeans::kmeans;
pub use ward::{ward, ward_linkage, Merge};

use crate::embedding::EmbeddingMatrix;
use crate::{Error, Result};

/// Raw cluster labels per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub converged: bool,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the closest centre; ties go to the lowest index.
pub(crate) fn nearest_center(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Affinity,
    Kmeans,
    Ward,
    Dbscan,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Affinity => "affinity",
            Algorithm::Kmeans => "kmeans",
            Algorithm::Ward => "ward",
            Algorithm::Dbscan => "dbscan",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affinity" | "affinity-propagation" => Ok(Algorithm::Affinity),
            "kmeans" | "k-means" => Ok(Algorithm::Kmeans),
            "ward" | "hierarchical" => Ok(Algorithm::Ward),
            "dbscan" => Ok(Algorithm::Dbscan),
            "hdbscan" | "optics" | "meanshift" | "mean-shift" => Err(Error::invalid(format!(
                "{s} is not supported; use affinity, kmeans, ward or dbscan"
            ))),
            other => Err(Error::invalid(format!("unknown clustering algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub algorithm: Algorithm,
    /// Target service count (kmeans, ward).
    pub k: Option<usize>,
    pub damping: f64,
    pub preference: Option<f64>,
    pub eps: f64,
    pub min_pts: usize,
    pub noise: NoisePolicy,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Affinity,
            k: None,
            damping: 0.65,
            preference: None,
            eps: 0.5,
            min_pts: 4,
            noise: NoisePolicy::Nearest,
            seed: 0,
            max_iter: 500,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.damping) {
            return Err(Error::invalid(format!("damping must be in [0.5, 1), got {}", self.damping)));
        }
        if matches!(self.algorithm, Algorithm::Kmeans | Algorithm::Ward) && self.k.is_none_or(|k| k < 2) {
            return Err(Error::invalid(format!("{} requires k >= 2", self.algorithm.name())));
        }
        if self.algorithm == Algorithm::Dbscan && (!(self.eps > 0.0) || self.min_pts == 0) {
            return Err(Error::invalid("dbscan needs eps > 0 and min_pts >= 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

/// Clusters `x` and returns a validated decomposition of its rows.
pub fn cluster(x: &EmbeddingMatrix, cfg: &ClusterConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let result = match cfg.algorithm {
        Algorithm::Affinity => affinity_propagation(x, cfg.damping, cfg.preference, cfg.max_iter, cfg.seed)?,
        Algorithm::Kmeans => kmeans(x, cfg.k.expect("validated"), cfg.max_iter, cfg.seed)?,
        Algorithm::Ward => ward(x, cfg.k.expect("validated"))?,
        Algorithm::Dbscan => {
            let (c, noise) = dbscan(x, cfg.eps, cfg.min_pts, cfg.noise)?;
            if noise > 0 {
                log::info!("dbscan: {noise} noise point(s) handled by the {:?} policy", cfg.noise);
            }
            c
        }
    };
    // rows are in class-id order for every matrix the pipeline produces
    let mut labels = vec![0; x.n()];
    for (row, &id) in x.class_ids().iter().enumerate() {
        if id >= x.n() {
            return Err(Error::invalid(format!("class id {id} out of range for {} rows", x.n())));
        }
        labels[id] = result.labels[row];
    }
    let d = Decomposition::from_labels(&x.app_name, &labels).with_meta(cfg.algorithm.name(), result.converged, cfg.seed);
    d.validate()?;
    Ok(d)
}
