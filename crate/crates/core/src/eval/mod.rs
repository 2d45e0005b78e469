//! Rank-correlation metrics and the evaluation harness.
//!
//! [`gamma`] is the Goodman-Kruskal gamma over positive/negative item splits;
//! [`weighted_gamma`] extends it to three-bucket judgments, counting pairs in
//! opposite outer buckets twice and placing the anchor in the middle bucket.

mod agreement;
mod crossval;
mod report;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{ItemId, Judgment};
use crate::{Error, Result};

pub use agreement::{
    agreement, agreement_table, assign_groups, pair_agreement, AgreementGroup, AgreementStats,
    VoteCounts,
};
pub use crossval::{
    crossval_swd, evaluate_swd_split, learning_curve, AttributeCv, CurvePoint, CvConfig, CvReport,
    FoldSkip, FoldSplit,
};
pub use report::{write_report_csv, ReportRow};

/// Item scores keyed by item id.
pub type Scores<T> = HashMap<ItemId, T>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    /// Concordant pairs (adjacent buckets for weighted gamma).
    pub ns: u64,
    pub nd: u64,
    /// Concordant / discordant pairs across the two outer buckets.
    pub nss: u64,
    pub ndd: u64,
}

impl PairCounts {
    pub fn gamma(&self) -> Option<f64> {
        let den = self.ns + self.nd;
        (den > 0).then(|| (self.ns as f64 - self.nd as f64) / den as f64)
    }

    pub fn weighted_gamma(&self) -> Option<f64> {
        let num = (self.ns as f64 - self.nd as f64) + 2.0 * (self.nss as f64 - self.ndd as f64);
        let den = (self.ns + self.nd) + 2 * (self.nss + self.ndd);
        (den > 0).then(|| num / den as f64)
    }

    /// Pairs that counted on either side.
    pub fn decided(&self) -> u64 {
        self.ns + self.nd + self.nss + self.ndd
    }
}

fn lookup<'a, T>(scores: &'a HashMap<ItemId, T>, id: &str) -> Result<&'a T> {
    scores.get(id).ok_or_else(|| Error::MissingScore(id.to_string()))
}

/// Classifies `(low, high)` by score: +1 concordant, -1 discordant, 0 tied.
fn direction<T: PartialOrd>(low: &T, high: &T) -> i8 {
    if high > low {
        1
    } else if high < low {
        -1
    } else {
        0
    }
}

/// Goodman-Kruskal gamma of `scores` against a binary positive/negative split.
///
/// Score-tied pairs count as neither concordant nor discordant.
pub fn gamma<T: PartialOrd, S: AsRef<str>>(
    scores: &HashMap<ItemId, T>,
    positives: &[S],
    negatives: &[S],
) -> Result<f64> {
    gamma_counts(scores, positives, negatives)?
        .gamma()
        .ok_or_else(|| Error::UndefinedMetric("every positive/negative pair is score-tied".into()))
}

pub fn gamma_counts<T: PartialOrd, S: AsRef<str>>(
    scores: &HashMap<ItemId, T>,
    positives: &[S],
    negatives: &[S],
) -> Result<PairCounts> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::InvalidArgument(
            "gamma needs non-empty positive and negative sets".into(),
        ));
    }
    let pos: HashSet<&str> = positives.iter().map(AsRef::as_ref).collect();
    if let Some(both) = negatives.iter().find(|n| pos.contains(n.as_ref())) {
        return Err(Error::InvalidArgument(format!(
            "item `{}` is both positive and negative",
            both.as_ref()
        )));
    }
    let neg_scores: Vec<&T> = negatives
        .iter()
        .map(|n| lookup(scores, n.as_ref()))
        .collect::<Result<_>>()?;
    let mut c = PairCounts::default();
    for p in positives {
        let sp = lookup(scores, p.as_ref())?;
        for sn in &neg_scores {
            match direction(*sn, sp) {
                1 => c.ns += 1,
                -1 => c.nd += 1,
                _ => {}
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightedGamma {
    Value(f64, PairCounts),
    /// Every candidate landed in the middle bucket, or all pairs were score-tied.
    Skipped,
}

impl WeightedGamma {
    pub fn value(&self) -> Option<f64> {
        match self {
            WeightedGamma::Value(v, _) => Some(*v),
            WeightedGamma::Skipped => None,
        }
    }
}

/// Weighted gamma of `scores` against one judgment.
pub fn weighted_gamma<T: PartialOrd>(
    scores: &HashMap<ItemId, T>,
    j: &Judgment,
) -> Result<WeightedGamma> {
    let less: Vec<&T> = j.less.iter().map(|id| lookup(scores, id)).collect::<Result<_>>()?;
    let more: Vec<&T> = j.more.iter().map(|id| lookup(scores, id)).collect::<Result<_>>()?;
    let middle: Vec<&T> = j
        .same
        .iter()
        .chain(std::iter::once(&j.anchor))
        .map(|id| lookup(scores, id))
        .collect::<Result<_>>()?;
    if less.is_empty() && more.is_empty() {
        return Ok(WeightedGamma::Skipped);
    }

    let mut c = PairCounts::default();
    let mut tally = |low: &T, high: &T, outer: bool| match (direction(low, high), outer) {
        (1, false) => c.ns += 1,
        (-1, false) => c.nd += 1,
        (1, true) => c.nss += 1,
        (-1, true) => c.ndd += 1,
        _ => {}
    };
    for lo in &less {
        for mid in &middle {
            tally(lo, mid, false);
        }
        for hi in &more {
            tally(lo, hi, true);
        }
    }
    for mid in &middle {
        for hi in &more {
            tally(mid, hi, false);
        }
    }
    Ok(match c.weighted_gamma() {
        Some(v) => WeightedGamma::Value(v, c),
        None => WeightedGamma::Skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Mean per rater first, then mean over raters.
    #[default]
    PerRater,
    /// Flat mean over all judgments.
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanGamma {
    pub mean: f64,
    pub judgments_used: usize,
    pub judgments_skipped: usize,
    pub raters: usize,
    /// Weighted pairs that decided a side, summed over used judgments.
    pub decided_pairs: u64,
}

/// Mean weighted gamma over judgments, skipping undefined ones.
pub fn mean_weighted_gamma<'a, T: PartialOrd>(
    scores: &HashMap<ItemId, T>,
    judgments: impl IntoIterator<Item = &'a Judgment>,
    aggregation: Aggregation,
) -> Result<MeanGamma> {
    let mut per_rater: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut skipped = 0;
    let mut used = 0;
    let mut decided = 0;
    for j in judgments {
        match weighted_gamma(scores, j)? {
            WeightedGamma::Value(v, c) => {
                per_rater.entry(j.rater_id.as_str()).or_default().push(v);
                used += 1;
                decided += c.decided();
            }
            WeightedGamma::Skipped => skipped += 1,
        }
    }
    if used == 0 {
        return Err(Error::UndefinedMetric(
            "no judgment with a defined weighted gamma".into(),
        ));
    }
    let mean = match aggregation {
        Aggregation::PerRater => {
            let rater_means: Vec<f64> = per_rater
                .values()
                .map(|v| v.iter().sum::<f64>() / v.len() as f64)
                .collect();
            rater_means.iter().sum::<f64>() / rater_means.len() as f64
        }
        Aggregation::Flat => {
            per_rater.values().flatten().sum::<f64>() / used as f64
        }
    };
    Ok(MeanGamma {
        mean,
        judgments_used: used,
        judgments_skipped: skipped,
        raters: per_rater.len(),
        decided_pairs: decided,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketMeans {
    pub less: f64,
    pub same: f64,
    pub more: f64,
    pub judgments: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketDistribution {
    pub per_attribute: BTreeMap<String, BucketMeans>,
    pub overall: BucketMeans,
}

fn bucket_means<'a>(js: impl IntoIterator<Item = &'a Judgment>) -> BucketMeans {
    let (mut l, mut s, mut m, mut n) = (0usize, 0usize, 0usize, 0usize);
    for j in js {
        l += j.less.len();
        s += j.same.len();
        m += j.more.len();
        n += 1;
    }
    if n == 0 {
        return BucketMeans::default();
    }
    let d = n as f64;
    BucketMeans {
        less: l as f64 / d,
        same: s as f64 / d,
        more: m as f64 / d,
        judgments: n,
    }
}

/// Mean bucket sizes per attribute and over all judgments.
pub fn bucket_distribution(judgments: &[Judgment]) -> BucketDistribution {
    let mut by_attr: BTreeMap<&str, Vec<&Judgment>> = BTreeMap::new();
    for j in judgments {
        by_attr.entry(j.attribute.as_str()).or_default().push(j);
    }
    BucketDistribution {
        per_attribute: by_attr
            .into_iter()
            .map(|(a, js)| (a.to_string(), bucket_means(js)))
            .collect(),
        overall: bucket_means(judgments),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(rows: &[(&str, f64)]) -> Scores<f64> {
        rows.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn gamma_extremes_and_mixed_case() {
        let s = scores(&[("a", 2.0), ("b", 3.0), ("c", 1.0)]);
        assert_eq!(gamma(&s, &["b"], &["a", "c"]).unwrap(), 1.0);
        assert_eq!(gamma(&s, &["c"], &["a", "b"]).unwrap(), -1.0);
        assert_eq!(gamma(&s, &["a"], &["b", "c"]).unwrap(), 0.0);
    }

    #[test]
    fn gamma_all_tied_is_undefined() {
        let s = scores(&[("a", 1.0), ("b", 1.0)]);
        assert!(matches!(gamma(&s, &["a"], &["b"]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn gamma_argument_errors() {
        let s = scores(&[("a", 1.0), ("b", 2.0)]);
        let empty: [&str; 0] = [];
        assert!(gamma(&s, &empty, &["b"]).is_err());
        assert!(gamma(&s, &["a"], &["a"]).is_err());
        assert!(matches!(gamma(&s, &["a"], &["zz"]), Err(Error::MissingScore(_))));
    }

    #[test]
    fn weighted_gamma_fully_concordant() {
        let j = Judgment::new("r", "a", "x", &["p"], &["q"], &["r"]);
        let s = scores(&[("p", 1.0), ("q", 2.0), ("x", 2.5), ("r", 4.0)]);
        assert_eq!(weighted_gamma(&s, &j).unwrap().value(), Some(1.0));
    }

    #[test]
    fn weighted_gamma_partial_inversion() {
        let j = Judgment::new("r", "a", "x", &["p"], &["q"], &["r"]);
        let s = scores(&[("p", 3.0), ("q", 2.0), ("x", 2.5), ("r", 4.0)]);
        match weighted_gamma(&s, &j).unwrap() {
            WeightedGamma::Value(v, c) => {
                assert_eq!(c, PairCounts { ns: 2, nd: 2, nss: 1, ndd: 0 });
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
            WeightedGamma::Skipped => panic!("should be defined"),
        }
    }

    #[test]
    fn all_middle_is_skipped() {
        let same: Vec<String> = (0..10).map(|i| format!("i{i}")).collect();
        let same_ref: Vec<&str> = same.iter().map(String::as_str).collect();
        let j = Judgment::new("r", "a", "x", &[], &same_ref, &[]);
        let mut s: Scores<f64> = same.iter().enumerate().map(|(i, id)| (id.clone(), i as f64)).collect();
        s.insert("x".into(), 0.5);
        assert_eq!(weighted_gamma(&s, &j).unwrap(), WeightedGamma::Skipped);
    }

    #[test]
    fn tied_scores_skip_when_nothing_decided() {
        let j = Judgment::new("r", "a", "x", &["p"], &[], &[]);
        let s = scores(&[("p", 1.0), ("x", 1.0)]);
        assert_eq!(weighted_gamma(&s, &j).unwrap(), WeightedGamma::Skipped);
    }

    #[test]
    fn missing_score_is_error() {
        let j = Judgment::new("r", "a", "x", &["p"], &[], &[]);
        let s = scores(&[("x", 1.0)]);
        assert!(matches!(weighted_gamma(&s, &j), Err(Error::MissingScore(_))));
    }

    #[test]
    fn mean_over_raters() {
        let s = scores(&[("p", 1.0), ("x", 2.0), ("q", 0.0)]);
        let good = Judgment::new("r1", "a", "x", &["p"], &[], &[]);
        let bad = Judgment::new("r2", "a", "x", &[], &[], &["p"]);
        let skip = Judgment::new("r2", "a", "x", &[], &["q"], &[]);
        let m = mean_weighted_gamma(&s, [&good], Aggregation::PerRater).unwrap();
        assert_eq!(m.mean, 1.0);
        let m = mean_weighted_gamma(&s, [&good, &bad, &skip], Aggregation::PerRater).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!((m.judgments_used, m.judgments_skipped, m.raters), (2, 1, 2));
        assert!(mean_weighted_gamma(&s, [&skip], Aggregation::Flat).is_err());
    }

    #[test]
    fn per_rater_and_flat_differ() {
        let s = scores(&[("p", 1.0), ("x", 2.0)]);
        let good = Judgment::new("r1", "a", "x", &["p"], &[], &[]);
        let bad = Judgment::new("r2", "a", "x", &[], &[], &["p"]);
        let js = [&good, &good, &bad];
        let per = mean_weighted_gamma(&s, js, Aggregation::PerRater).unwrap().mean;
        let flat = mean_weighted_gamma(&s, js, Aggregation::Flat).unwrap().mean;
        assert_eq!(per, 0.0);
        assert!((flat - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bucket_means_single_and_grouped() {
        let j = Judgment::new("r", "long", "x", &["a", "b", "c"], &["d", "e", "f"], &["g", "h", "i", "j"]);
        let d = bucket_distribution(&[j.clone()]);
        assert_eq!((d.overall.less, d.overall.same, d.overall.more), (3.0, 3.0, 4.0));
        let k = Judgment::new("r", "dark", "x", &[], &["a"], &[]);
        let d = bucket_distribution(&[j, k]);
        assert_eq!(d.per_attribute["dark"].same, 1.0);
        assert_eq!(d.overall.same, 2.0);
        assert_eq!(d.overall.judgments, 2);
    }
}
