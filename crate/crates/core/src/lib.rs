//! Multi-channel social profile classification with word embeddings.
//!
//! Pipeline: ingest line-delimited profile records, preprocess the five text
//! channels into token streams, train skip-gram embeddings with negative
//! sampling, aggregate token vectors into profile features, fit classifiers,
//! and evaluate with leakage-safe stratified cross-validation.
//!
//! All numeric stages are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below pin the default precision used by the CLI and file formats.

pub mod embed;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod ingest;
pub mod model;
pub mod preprocess;
pub mod scalar;
pub mod seeding;
pub mod stem;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar for the CLI and stock pipelines.
pub type Real = f64;

pub type EmbeddingModel = embed::EmbeddingModel<Real>;
pub type ProfileVector = features::ProfileVector<Real>;
pub type IdfTable = features::IdfTable<Real>;
pub type TrainedModel = model::TrainedModel<Real>;
