use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_weighted_gamma, Aggregation, Scores};
use crate::attrmodels::{train_swd, AttributeScorer, RankSvmConfig};
use crate::corpus::{infer_all, Judgment};
use crate::embeddings::FactorModel;
use crate::{Error, Result, Scalar};

/// Rater-level fold assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: usize,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldSplit {
    /// Shuffles the sorted rater ids with `seed` and deals them round-robin.
    pub fn by_rater<'a>(
        raters: impl IntoIterator<Item = &'a str>,
        folds: usize,
        seed: u64,
    ) -> Result<Self> {
        if folds < 2 {
            return Err(Error::InvalidArgument(
                "cross-validation needs at least 2 folds".into(),
            ));
        }
        let mut ids: Vec<&str> = raters.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if ids.len() < folds {
            return Err(Error::InvalidArgument(format!(
                "{} raters cannot fill {folds} folds",
                ids.len()
            )));
        }
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let assignment = ids
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r.to_string(), i % folds))
            .collect();
        Ok(Self { folds, assignment })
    }

    pub fn fold_of(&self, rater: &str) -> Option<usize> {
        self.assignment.get(rater).copied()
    }

    pub fn raters_in(&self, fold: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(r, _)| r.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            aggregation: Aggregation::PerRater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSkip {
    pub fold: usize,
    pub attribute: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeCv {
    pub attribute: String,
    /// Mean over the folds where the attribute could be trained and evaluated.
    pub mean_gprime: Option<f64>,
    pub fold_values: Vec<Option<f64>>,
    pub judgments_used: usize,
    pub judgments_skipped: usize,
    pub decided_pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub per_attribute: Vec<AttributeCv>,
    /// Mean over attributes with a defined value.
    pub overall: Option<f64>,
    pub skipped: Vec<FoldSkip>,
}

/// Outcome of training on one rater subset and testing on another, for one attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitOutcome {
    Evaluated {
        mean: f64,
        used: usize,
        skipped: usize,
        decided: u64,
    },
    Skipped(String),
}

/// Trains SWD on `train` judgments and reports mean weighted gamma on `test`.
pub fn evaluate_swd_split<T: Scalar>(
    attribute: &str,
    train: &[&Judgment],
    test: &[&Judgment],
    model: &FactorModel<T>,
    cfg: &RankSvmConfig<T>,
    aggregation: Aggregation,
) -> Result<SplitOutcome> {
    if test.is_empty() {
        return Ok(SplitOutcome::Skipped("no test judgments".into()));
    }
    let prefs = infer_all(train.iter().copied());
    let lm = match train_swd(attribute, &prefs, model, cfg) {
        Ok((lm, _)) => lm,
        Err(Error::NoPreferences(_)) => {
            return Ok(SplitOutcome::Skipped("no training preferences".into()))
        }
        Err(e) => return Err(e),
    };
    let items: BTreeSet<&str> = test.iter().flat_map(|j| j.items()).collect();
    let scores: Scores<T> = lm.score_items(items, model)?;
    match mean_weighted_gamma(&scores, test.iter().copied(), aggregation) {
        Ok(m) => Ok(SplitOutcome::Evaluated {
            mean: m.mean,
            used: m.judgments_used,
            skipped: m.judgments_skipped,
            decided: m.decided_pairs,
        }),
        Err(Error::UndefinedMetric(_)) => Ok(SplitOutcome::Skipped(
            "every test judgment was skipped".into(),
        )),
        Err(e) => Err(e),
    }
}

fn by_attribute(judgments: &[Judgment]) -> BTreeMap<&str, Vec<&Judgment>> {
    let mut m: BTreeMap<&str, Vec<&Judgment>> = BTreeMap::new();
    for j in judgments {
        m.entry(j.attribute.as_str()).or_default().push(j);
    }
    m
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs every fold with training raters picked by `train_raters(fold, out_of_fold)`.
fn run_folds<T: Scalar, F>(
    judgments: &[Judgment],
    split: &FoldSplit,
    model: &FactorModel<T>,
    cfg: &RankSvmConfig<T>,
    aggregation: Aggregation,
    train_raters: F,
) -> Result<CvReport>
where
    F: Fn(usize, Vec<&str>) -> BTreeSet<String> + Sync,
{
    let attrs = by_attribute(judgments);
    let outcomes: Vec<Vec<(String, SplitOutcome)>> = (0..split.folds)
        .into_par_iter()
        .map(|fold| {
            let out_of_fold: Vec<&str> = split
                .assignment
                .iter()
                .filter(|(_, &f)| f != fold)
                .map(|(r, _)| r.as_str())
                .collect();
            let train_set = train_raters(fold, out_of_fold);
            attrs
                .iter()
                .map(|(attr, js)| {
                    let train: Vec<&Judgment> = js
                        .iter()
                        .copied()
                        .filter(|j| train_set.contains(&j.rater_id))
                        .collect();
                    let test: Vec<&Judgment> = js
                        .iter()
                        .copied()
                        .filter(|j| split.fold_of(&j.rater_id) == Some(fold))
                        .collect();
                    evaluate_swd_split(attr, &train, &test, model, cfg, aggregation)
                        .map(|o| (attr.to_string(), o))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_attribute = Vec::new();
    let mut skipped = Vec::new();
    for (ai, attr) in attrs.keys().enumerate() {
        let mut values = Vec::with_capacity(split.folds);
        let (mut used, mut sk, mut decided) = (0, 0, 0);
        for (fold, fold_out) in outcomes.iter().enumerate() {
            match &fold_out[ai].1 {
                SplitOutcome::Evaluated {
                    mean,
                    used: u,
                    skipped: s,
                    decided: d,
                } => {
                    values.push(Some(*mean));
                    used += u;
                    sk += s;
                    decided += d;
                }
                SplitOutcome::Skipped(reason) => {
                    values.push(None);
                    skipped.push(FoldSkip {
                        fold,
                        attribute: attr.to_string(),
                        reason: reason.clone(),
                    });
                }
            }
        }
        per_attribute.push(AttributeCv {
            attribute: attr.to_string(),
            mean_gprime: mean(values.iter().flatten().copied()),
            fold_values: values,
            judgments_used: used,
            judgments_skipped: sk,
            decided_pairs: decided,
        });
    }
    let overall = mean(per_attribute.iter().filter_map(|a| a.mean_gprime));
    Ok(CvReport {
        folds: split.folds,
        per_attribute,
        overall,
        skipped,
    })
}

/// k-fold cross-validation of SWD, split by rater.
pub fn crossval_swd<T: Scalar>(
    judgments: &[Judgment],
    model: &FactorModel<T>,
    cfg: &RankSvmConfig<T>,
    cv: &CvConfig,
) -> Result<CvReport> {
    let split = FoldSplit::by_rater(judgments.iter().map(|j| j.rater_id.as_str()), cv.folds, cv.seed)?;
    run_folds(judgments, &split, model, cfg, cv.aggregation, |_, raters| {
        raters.into_iter().map(str::to_string).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Requested training-rater count (capped by what each fold has).
    pub train_raters: usize,
    pub mean_gprime: Option<f64>,
    pub runs: usize,
}

/// Mean cross-validated weighted gamma when each fold trains on a random subsample
/// of `size` raters, averaged over `repetitions` subsamples per size.
pub fn learning_curve<T: Scalar>(
    judgments: &[Judgment],
    model: &FactorModel<T>,
    cfg: &RankSvmConfig<T>,
    cv: &CvConfig,
    sizes: &[usize],
    repetitions: usize,
) -> Result<Vec<CurvePoint>> {
    let split = FoldSplit::by_rater(judgments.iter().map(|j| j.rater_id.as_str()), cv.folds, cv.seed)?;
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let runs: Vec<Option<f64>> = (0..repetitions.max(1))
            .into_par_iter()
            .map(|rep| {
                let report = run_folds(judgments, &split, model, cfg, cv.aggregation, |fold, mut raters| {
                    let seed = cv
                        .seed
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add((size as u64) << 32 | (rep as u64) << 16 | fold as u64);
                    raters.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                    raters.into_iter().take(size).map(str::to_string).collect()
                })?;
                Ok(report.overall)
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(CurvePoint {
            train_raters: size,
            mean_gprime: mean(runs.iter().flatten().copied()),
            runs: runs.len(),
        });
    }
    Ok(points)
}
