use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{ItemId, TagAssignments};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagAttribute {
    /// Items where the tag's share of taggers reaches `alpha`.
    pub positives: BTreeSet<ItemId>,
    /// Surviving items nobody tagged with this tag.
    pub negatives: BTreeSet<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagCollection {
    pub alpha: f64,
    pub min_taggers: usize,
    /// Items that passed the minimum-tagger filter.
    pub items: BTreeSet<ItemId>,
    pub attributes: BTreeMap<String, TagAttribute>,
}

/// Builds the binary tag-based test collection.
///
/// Items tagged by fewer than `min_taggers` distinct users are dropped first.
/// The tag fraction of an item is (distinct users giving the tag) / (distinct
/// users giving any tag to the item).
pub fn build_tag_collection(
    tags: &TagAssignments,
    alpha: f64,
    min_taggers: usize,
) -> Result<TagCollection> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    if min_taggers == 0 {
        return Err(Error::InvalidArgument("min_taggers must be >= 1".into()));
    }

    let mut taggers: HashMap<&str, HashSet<&str>> = HashMap::new();
    let mut by_tag: BTreeMap<&str, HashMap<&str, HashSet<&str>>> = BTreeMap::new();
    for row in &tags.rows {
        taggers
            .entry(row.item_id.as_str())
            .or_default()
            .insert(row.user_id.as_str());
        by_tag
            .entry(row.tag.as_str())
            .or_default()
            .entry(row.item_id.as_str())
            .or_default()
            .insert(row.user_id.as_str());
    }

    let items: BTreeSet<ItemId> = taggers
        .iter()
        .filter(|(_, users)| users.len() >= min_taggers)
        .map(|(item, _)| item.to_string())
        .collect();

    let mut attributes = BTreeMap::new();
    for (tag, per_item) in by_tag {
        let mut positives = BTreeSet::new();
        let mut negatives = BTreeSet::new();
        for item in &items {
            let total = taggers[item.as_str()].len();
            match per_item.get(item.as_str()) {
                None => {
                    negatives.insert(item.clone());
                }
                Some(users) => {
                    if users.len() as f64 / total as f64 >= alpha {
                        positives.insert(item.clone());
                    }
                }
            }
        }
        if !positives.is_empty() {
            attributes.insert(
                tag.to_string(),
                TagAttribute {
                    positives,
                    negatives,
                },
            );
        }
    }

    Ok(TagCollection {
        alpha,
        min_taggers,
        items,
        attributes,
    })
}
