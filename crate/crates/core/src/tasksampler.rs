//! Stage-2 annotation task generation.
//!
//! A rater's seen items are binned by each term-based baseline. The anchor comes
//! from items that are interior under both baselines, drawn proportionally to
//! popularity; candidates are a stratified draw of one item per bin per baseline.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attrmodels::TermBaseline;
use crate::corpus::ItemId;
use crate::textrank::ScoredList;
use crate::{Error, Result, Scalar};

pub const DEFAULT_BINS: usize = 5;
pub const MIN_CANDIDATES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeenSet {
    pub rater_id: String,
    pub items: BTreeSet<ItemId>,
}

impl SeenSet {
    pub fn new<I, S>(rater_id: impl Into<String>, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            rater_id: rater_id.into(),
            items: items.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinAssignment {
    pub attribute_id: String,
    pub baseline: TermBaseline,
    /// Highest-scoring bin first.
    pub bins: Vec<Vec<ItemId>>,
}

impl BinAssignment {
    pub fn bin_of(&self, item: &str) -> Option<usize> {
        self.bins.iter().position(|b| b.iter().any(|i| i == item))
    }

    pub fn is_extreme(&self, item: &str) -> bool {
        matches!(self.bin_of(item), Some(b) if b == 0 || b + 1 == self.bins.len())
    }
}

/// Sorts the seen items by baseline score and cuts them into `m` near-equal bins.
pub fn assign_bins<T: Scalar>(
    seen: &SeenSet,
    ranking: &ScoredList<T>,
    baseline: TermBaseline,
    m: usize,
) -> Result<BinAssignment> {
    if m < 3 {
        return Err(Error::InvalidArgument("need at least 3 bins".into()));
    }
    if seen.items.len() < m {
        return Err(Error::Sampler(format!(
            "rater `{}` has seen {} items, fewer than {m} bins",
            seen.rater_id,
            seen.items.len()
        )));
    }
    let ordered: Vec<ItemId> = ranking
        .ids()
        .filter(|id| seen.items.contains(*id))
        .map(str::to_string)
        .collect();
    if ordered.len() != seen.items.len() {
        return Err(Error::InvalidArgument(format!(
            "ranking for `{}` does not cover every seen item",
            ranking.attribute_id
        )));
    }
    let n = ordered.len();
    let (base, extra) = (n / m, n % m);
    let mut bins = Vec::with_capacity(m);
    let mut start = 0;
    for b in 0..m {
        let size = base + usize::from(b < extra);
        bins.push(ordered[start..start + size].to_vec());
        start += size;
    }
    Ok(BinAssignment {
        attribute_id: ranking.attribute_id.clone(),
        baseline,
        bins,
    })
}

/// Items outside the first and last bin under both baselines.
pub fn eligible_anchors(ic: &BinAssignment, rc: &BinAssignment) -> Result<BTreeSet<ItemId>> {
    let eligible: BTreeSet<ItemId> = ic
        .bins
        .iter()
        .flatten()
        .filter(|id| !ic.is_extreme(id) && rc.bin_of(id).is_some() && !rc.is_extreme(id))
        .cloned()
        .collect();
    if eligible.is_empty() {
        return Err(Error::Sampler(format!(
            "no interior anchor for attribute `{}`",
            ic.attribute_id
        )));
    }
    Ok(eligible)
}

fn weight(seen_counts: &HashMap<ItemId, u64>, id: &str) -> u64 {
    seen_counts.get(id).copied().unwrap_or(0).max(1)
}

/// Popularity-proportional draw; unseen counts are smoothed to weight 1.
fn weighted_pick<R: Rng + ?Sized>(
    pool: &[&ItemId],
    seen_counts: &HashMap<ItemId, u64>,
    rng: &mut R,
) -> Option<ItemId> {
    if pool.is_empty() {
        return None;
    }
    let weights: Vec<u64> = pool.iter().map(|id| weight(seen_counts, id)).collect();
    let dist = WeightedIndex::new(&weights).expect("weights are positive");
    Some(pool[dist.sample(rng)].clone())
}

pub fn sample_anchor<R: Rng + ?Sized>(
    eligible: &BTreeSet<ItemId>,
    seen_counts: &HashMap<ItemId, u64>,
    rng: &mut R,
) -> Result<ItemId> {
    let pool: Vec<&ItemId> = eligible.iter().collect();
    weighted_pick(&pool, seen_counts, rng)
        .ok_or_else(|| Error::Sampler("no eligible anchor".into()))
}

/// One popularity-weighted item per (baseline, bin), without replacement, shuffled.
///
/// A draw that collides with an earlier pick is redrawn once from the bin's
/// remaining items; if none remain the bin contributes nothing.
pub fn sample_candidates<R: Rng + ?Sized>(
    anchor: &str,
    ic: &BinAssignment,
    rc: &BinAssignment,
    seen_counts: &HashMap<ItemId, u64>,
    rng: &mut R,
) -> Result<Vec<ItemId>> {
    let mut picked: Vec<ItemId> = Vec::new();
    let mut taken: HashSet<ItemId> = HashSet::new();
    for assignment in [ic, rc] {
        for bin in &assignment.bins {
            let pool: Vec<&ItemId> = bin.iter().filter(|id| id.as_str() != anchor).collect();
            let Some(first) = weighted_pick(&pool, seen_counts, rng) else {
                continue;
            };
            let choice = if taken.contains(&first) {
                let rest: Vec<&ItemId> = pool.into_iter().filter(|id| !taken.contains(*id)).collect();
                weighted_pick(&rest, seen_counts, rng)
            } else {
                Some(first)
            };
            if let Some(id) = choice {
                taken.insert(id.clone());
                picked.push(id);
            }
        }
    }
    if picked.len() < MIN_CANDIDATES {
        return Err(Error::Sampler(format!(
            "only {} candidate(s) available",
            picked.len()
        )));
    }
    picked.shuffle(rng);
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDraw {
    pub anchor: ItemId,
    pub candidates: Vec<ItemId>,
}

/// Full Stage-2 draw for one rater and attribute.
pub fn generate_task<T: Scalar, R: Rng + ?Sized>(
    seen: &SeenSet,
    tb_ic: &ScoredList<T>,
    tb_rc: &ScoredList<T>,
    seen_counts: &HashMap<ItemId, u64>,
    bins: usize,
    rng: &mut R,
) -> Result<TaskDraw> {
    let ic = assign_bins(seen, tb_ic, TermBaseline::TbIc, bins)?;
    let rc = assign_bins(seen, tb_rc, TermBaseline::TbRc, bins)?;
    let eligible = eligible_anchors(&ic, &rc)?;
    let anchor = sample_anchor(&eligible, seen_counts, rng)?;
    let candidates = sample_candidates(&anchor, &ic, &rc, seen_counts, rng)?;
    Ok(TaskDraw { anchor, candidates })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub task_id: String,
    pub rater_id: String,
    pub attribute_id: String,
    pub anchor: ItemId,
    pub candidates: Vec<ItemId>,
    /// RFC 3339 timestamp.
    pub created_at: String,
}

/// Attributes ordered for scheduling: fewest collected judgments first, then by id.
pub fn schedule_attributes<'a>(
    attributes: impl IntoIterator<Item = &'a str>,
    judgment_counts: &HashMap<String, usize>,
) -> Vec<&'a str> {
    let mut v: Vec<&str> = attributes.into_iter().collect();
    v.sort_by_key(|a| (judgment_counts.get(*a).copied().unwrap_or(0), *a));
    v
}
