//! Static analysis, class embeddings, clustering and evaluation for
//! decomposing Java monoliths into candidate microservices.
//!
//! The crate is organised as a pipeline:
//!
//! * [`code_model`] parses Java sources into class units, dependency graphs
//!   and term multisets.
//! * [`corpus_builder`] mines microservice repositories, labels classes with
//!   their owning service and samples contrastive triplets.
//! * [`embedding`] turns a corpus into a feature matrix (baselines, a remote
//!   provider, or a trained triplet-loss projection).
//! * [`clustering`] partitions standardized embeddings into a decomposition.
//! * [`evaluation`] scores embeddings and decompositions.

pub mod clustering;
pub mod code_model;
pub mod corpus_builder;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod synthetic;

pub use error::{Error, Result};
