//! Soft-attribute critiquing toolkit.
//!
//! Scores items by natural-language soft attributes ("more violent", "less
//! predictable") using review text, collaborative-filtering embeddings and rater
//! judgments, and evaluates the resulting rankings against three-bucket
//! judgments. Numeric code is generic over [`Scalar`] (`f32`/`f64`); the
//! aliases below fix the common `f64` instantiations.

pub mod attrmodels;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod pipeline;
pub mod scalar;
pub mod synth;
pub mod tasksampler;
pub mod textrank;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FactorModelF64 = embeddings::FactorModel<f64>;
pub type FactorModelF32 = embeddings::FactorModel<f32>;
pub type ScoredListF64 = textrank::ScoredList<f64>;
pub type ScoredListF32 = textrank::ScoredList<f32>;
pub type CentroidModelF64 = attrmodels::CentroidModel<f64>;
pub type LinearAttributeModelF64 = attrmodels::LinearAttributeModel<f64>;
pub type LinearAttributeModelF32 = attrmodels::LinearAttributeModel<f32>;
pub type TrainConfigF64 = embeddings::TrainConfig<f64>;
pub type RankSvmConfigF64 = attrmodels::RankSvmConfig<f64>;
