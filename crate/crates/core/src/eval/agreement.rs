use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{infer_preferences, Judgment, Relation};

/// Votes on one unordered pair `(x, x')` with `x < x'` lexicographically.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteCounts {
    /// Votes that the attribute applies more to `x'`.
    pub prec: u32,
    pub approx: u32,
    /// Votes that the attribute applies more to `x`.
    pub succ: u32,
}

impl VoteCounts {
    pub fn total(&self) -> u32 {
        self.prec + self.approx + self.succ
    }
}

/// Expected directional agreement of two random votes, ties agreeing with either side.
pub fn pair_agreement(v: VoteCounts) -> f64 {
    let n = v.total() as f64;
    let p_prec = v.prec as f64 / n;
    let p_eq = v.approx as f64 / n;
    let p_succ = v.succ as f64 / n;
    p_prec * (p_prec + p_eq) + p_succ * (p_succ + p_eq) + p_eq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AgreementGroup {
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub attribute_id: String,
    /// `None` when no pair was voted on by two or more raters.
    pub agree: Option<f64>,
    pub distinct_pairs: usize,
    /// Votes cast on the counted pairs.
    pub total_comparisons: usize,
    /// Tie votes among `total_comparisons`.
    pub tie_count: usize,
    /// Pair instances over every judged pair, including single-rater pairs.
    pub all_votes: usize,
    pub group: Option<AgreementGroup>,
}

/// Inter-rater agreement for one attribute over pairs judged by at least two raters.
pub fn agreement(judgments: &[Judgment], attribute_id: &str) -> AgreementStats {
    let mut votes: BTreeMap<(String, String), (VoteCounts, BTreeSet<&str>)> = BTreeMap::new();
    let mut all_votes = 0;
    for j in judgments.iter().filter(|j| j.attribute == attribute_id) {
        for p in infer_preferences(j) {
            all_votes += 1;
            let (key, high_first) = if p.high < p.low {
                ((p.high, p.low), true)
            } else {
                ((p.low, p.high), false)
            };
            let entry = votes.entry(key).or_default();
            match (p.relation, high_first) {
                (Relation::Tie, _) => entry.0.approx += 1,
                (_, true) => entry.0.succ += 1,
                (_, false) => entry.0.prec += 1,
            }
            entry.1.insert(j.rater_id.as_str());
        }
    }

    let mut sum = 0.0;
    let mut pairs = 0;
    let mut comparisons = 0;
    let mut ties = 0;
    for (v, raters) in votes.values() {
        if raters.len() < 2 {
            continue;
        }
        sum += pair_agreement(*v);
        pairs += 1;
        comparisons += v.total() as usize;
        ties += v.approx as usize;
    }
    AgreementStats {
        attribute_id: attribute_id.to_string(),
        agree: (pairs > 0).then(|| sum / pairs as f64),
        distinct_pairs: pairs,
        total_comparisons: comparisons,
        tie_count: ties,
        all_votes,
        group: None,
    }
}

/// Splits attributes with a defined agreement into equal-size terciles.
///
/// Sorted by agreement descending, ties broken by attribute id; leftover slots go
/// to the higher groups first.
pub fn assign_groups(stats: &mut [AgreementStats]) {
    let mut order: Vec<usize> = (0..stats.len()).filter(|&i| stats[i].agree.is_some()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (stats[a].agree.unwrap(), stats[b].agree.unwrap());
        y.total_cmp(&x)
            .then_with(|| stats[a].attribute_id.cmp(&stats[b].attribute_id))
    });
    let n = order.len();
    let base = n / 3;
    let extra = n % 3;
    let high = base + usize::from(extra > 0);
    let medium = base + usize::from(extra > 1);
    for (rank, &i) in order.iter().enumerate() {
        stats[i].group = Some(if rank < high {
            AgreementGroup::High
        } else if rank < high + medium {
            AgreementGroup::Medium
        } else {
            AgreementGroup::Low
        });
    }
}

/// Agreement for every attribute present in `judgments`, with groups assigned.
pub fn agreement_table(judgments: &[Judgment]) -> Vec<AgreementStats> {
    let attrs: BTreeSet<&str> = judgments.iter().map(|j| j.attribute.as_str()).collect();
    let mut stats: Vec<AgreementStats> = attrs.into_iter().map(|a| agreement(judgments, a)).collect();
    assign_groups(&mut stats);
    stats
}
