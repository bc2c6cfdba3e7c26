//! Scoring of embeddings and decompositions.

mod aggregate;
mod fbeta;
mod metrics;
mod quality;

pub use aggregate::{aggregate_score, z_scores, WEIGHTS};
pub use fbeta::{pair_counts, pairwise_fbeta, DEFAULT_BETA};
pub use metrics::{bcp, chd, chm, cov, icp, metrics_report, ned, MetricsReport, UseCaseTraces, METRICS_VERSION, NED_BOUNDS};
pub use quality::{
    balanced_log_loss, cosine, embedding_quality_score, quality_score, score_similarities, QualityReport, CLAMP_EPS,
    QUALITY_VERSION,
};
