//! Per-attribute term-based rankings used by the task sampler.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use softattr::attrmodels::TermBaseline;
use softattr::corpus::{ItemCatalog, ReviewStore, SoftAttribute};
use softattr::pipeline::{MethodParams, ScoringContext, TermIndexes};
use softattr::textrank::ScoredList;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRankings {
    pub attribute: SoftAttribute,
    pub ic: ScoredList<f64>,
    pub rc: ScoredList<f64>,
}

/// TB-IC and TB-RC rankings of the whole catalog for each attribute.
pub fn compute_rankings(
    catalog: &ItemCatalog,
    reviews: &ReviewStore,
    attributes: &[SoftAttribute],
) -> softattr::Result<Vec<AttributeRankings>> {
    let indexes = TermIndexes::build(reviews);
    let params = MethodParams::<f64>::default();
    let ctx = ScoringContext {
        catalog,
        indexes: &indexes,
        model: None,
        params: &params,
    };
    attributes
        .iter()
        .map(|a| {
            Ok(AttributeRankings {
                attribute: a.clone(),
                ic: ctx.term_ranking(a, TermBaseline::TbIc)?,
                rc: ctx.term_ranking(a, TermBaseline::TbRc)?,
            })
        })
        .collect()
}

pub fn save_rankings(path: &Path, rankings: &[AttributeRankings]) -> softattr::Result<()> {
    fs::write(path, serde_json::to_vec(rankings)?).map_err(|e| softattr::Error::io(path, e))
}

pub fn load_rankings(path: &Path) -> softattr::Result<Vec<AttributeRankings>> {
    let bytes = fs::read(path).map_err(|e| softattr::Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}
