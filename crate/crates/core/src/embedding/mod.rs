//! Class embeddings: baseline encoders, a remote provider client, and a
//! locally trained contrastive projection.

mod baseline;
mod loss;
mod matrix;
pub mod mock;
mod pca;
mod projection;
mod provider;
pub mod remote;

pub use baseline::{embed_bow, embed_calls_row, embed_interactions_row, embed_tfidf, TermSpace, TFIDF_VERSION};
pub use loss::{euclidean, triplet_grad, triplet_loss, TripletGrad};
pub use matrix::{EmbeddingMatrix, EMBEDDING_FORMAT};
pub use pca::pca_2d;
pub use projection::{
    apply_projection, apply_projection_to, train_projection, train_projection_cached, write_history, BaseFeatures,
    ProjectionModel, TrainConfig, TrainOutcome, PROJECTION_FORMAT,
};
pub use provider::{ConfiguredEmbedder, Embedder, PrecomputedEmbedder, ProviderConfig, ProviderKind};
pub use remote::{embed_remote, RemoteConfig};
