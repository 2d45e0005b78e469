use serde::{Deserialize, Serialize};

use super::{ItemId, Judgment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    /// `high` is much more `a` than `low` (opposite outer buckets).
    StrongMore,
    More,
    /// About the same; `high`/`low` are then just the lexicographic order of the ids.
    Tie,
}

impl Relation {
    /// Required score gap in the ranking-SVM constraint.
    pub fn margin(self) -> f64 {
        match self {
            Relation::StrongMore => 2.0,
            Relation::More => 1.0,
            Relation::Tie => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreferencePair {
    pub attribute: String,
    pub high: ItemId,
    pub low: ItemId,
    pub relation: Relation,
    /// `seq` of the judgment the pair was inferred from.
    pub source: usize,
}

/// Infers every pairwise relation implied by a three-bucket judgment.
///
/// Outer buckets against each other give strong preferences, outer against the
/// middle (same bucket plus anchor) give plain preferences, and pairs inside the
/// middle are ties. Two items in the same outer bucket are left unrelated.
pub fn infer_preferences(j: &Judgment) -> Vec<PreferencePair> {
    let middle: Vec<&ItemId> = j.same.iter().chain(std::iter::once(&j.anchor)).collect();
    let mut out = Vec::with_capacity(expected_pair_count(
        j.more.len(),
        j.same.len(),
        j.less.len(),
    ));
    let pair = |high: &ItemId, low: &ItemId, relation| PreferencePair {
        attribute: j.attribute.clone(),
        high: high.clone(),
        low: low.clone(),
        relation,
        source: j.seq,
    };

    for hi in &j.more {
        for lo in &j.less {
            out.push(pair(hi, lo, Relation::StrongMore));
        }
    }
    for hi in &j.more {
        for lo in &middle {
            out.push(pair(hi, lo, Relation::More));
        }
    }
    for hi in &middle {
        for lo in &j.less {
            out.push(pair(hi, lo, Relation::More));
        }
    }
    for (i, a) in middle.iter().enumerate() {
        for b in &middle[i + 1..] {
            let (first, second) = if a <= b { (a, b) } else { (b, a) };
            out.push(pair(first, second, Relation::Tie));
        }
    }
    out
}

/// Preferences from many judgments, in judgment order.
pub fn infer_all<'a>(judgments: impl IntoIterator<Item = &'a Judgment>) -> Vec<PreferencePair> {
    judgments.into_iter().flat_map(infer_preferences).collect()
}

/// Closed-form number of pairs for bucket sizes `more`, `same`, `less`.
pub fn expected_pair_count(more: usize, same: usize, less: usize) -> usize {
    let mid = same + 1;
    more * less + more * mid + mid * less + mid * same / 2
}
