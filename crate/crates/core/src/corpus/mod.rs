//! Corpus data model: items, reviews, ratings, tag assignments and rater judgments.
//!
//! Everything here is immutable once loaded. The only derived structures are the
//! tag-based test collection ([`build_tag_collection`]) and the pairwise
//! preferences inferred from three-bucket judgments ([`infer_preferences`]).

mod io;
mod judgments;
mod prefs;
mod tags;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use io::{load_corpus, load_items, load_ratings, load_reviews, load_tags, CorpusPaths};
pub use judgments::{load_judgments, parse_judgments, write_judgments, Judgment};
pub use prefs::{infer_all, infer_preferences, expected_pair_count, PreferencePair, Relation};
pub use tags::{build_tag_collection, TagAttribute, TagCollection};

pub type ItemId = String;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub title: String,
    /// Number of raters who marked the item as seen; popularity weight for sampling.
    pub seen_count: u64,
    pub rating_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_url: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ItemCatalog {
    items: Vec<Item>,
    index: HashMap<ItemId, usize>,
}

impl ItemCatalog {
    /// Builds a catalog, rejecting duplicate ids.
    pub fn new(items: Vec<Item>) -> crate::Result<Self> {
        let mut index = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if index.insert(item.id.clone(), i).is_some() {
                return Err(crate::Error::InvalidArgument(format!(
                    "duplicate item id `{}`",
                    item.id
                )));
            }
        }
        Ok(Self { items, index })
    }

    /// Convenience constructor for catalogs where only ids matter.
    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let items = ids
            .into_iter()
            .map(|id| {
                let id = id.into();
                Item {
                    title: id.clone(),
                    id,
                    seen_count: 0,
                    rating_count: 0,
                    image_url: None,
                }
            })
            .collect();
        Self::new(items).expect("unique ids")
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items in file order.
    pub fn iter(&self) -> impl Iterator<Item = &Item> {
        self.items.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|it| it.id.as_str())
    }

    /// Popularity weights keyed by item id.
    pub fn seen_counts(&self) -> HashMap<ItemId, u64> {
        self.items
            .iter()
            .map(|it| (it.id.clone(), it.seen_count))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub item_id: ItemId,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct ReviewStore {
    reviews: Vec<Review>,
    by_item: BTreeMap<ItemId, Vec<usize>>,
}

impl ReviewStore {
    pub fn new(reviews: Vec<Review>) -> Self {
        let mut by_item: BTreeMap<ItemId, Vec<usize>> = BTreeMap::new();
        for (i, r) in reviews.iter().enumerate() {
            by_item.entry(r.item_id.clone()).or_default().push(i);
        }
        Self { reviews, by_item }
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Review> {
        self.reviews.iter()
    }

    /// Reviews linked to `item_id`, in file order.
    pub fn for_item<'a>(&'a self, item_id: &str) -> impl Iterator<Item = &'a Review> + 'a {
        self.by_item
            .get(item_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.reviews[i])
    }

    /// Item ids that have at least one review, sorted.
    pub fn items(&self) -> impl Iterator<Item = &str> {
        self.by_item.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTriple {
    pub user_id: String,
    pub item_id: ItemId,
    #[serde(rename = "rating")]
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RatingSet {
    triples: Vec<RatingTriple>,
}

impl RatingSet {
    /// Builds a rating set, rejecting a second rating for the same (user, item).
    pub fn new(triples: Vec<RatingTriple>) -> crate::Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(triples.len());
        for t in &triples {
            if !seen.insert((t.user_id.as_str(), t.item_id.as_str())) {
                return Err(crate::Error::InvalidArgument(format!(
                    "duplicate rating for user `{}` on item `{}`",
                    t.user_id, t.item_id
                )));
            }
        }
        Ok(Self { triples })
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RatingTriple> {
        self.triples.iter()
    }

    pub fn as_slice(&self) -> &[RatingTriple] {
        &self.triples
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagAssignment {
    pub user_id: String,
    pub item_id: ItemId,
    pub tag: String,
}

#[derive(Debug, Clone, Default)]
pub struct TagAssignments {
    pub rows: Vec<TagAssignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SoftAttribute {
    pub id: String,
    pub phrase: String,
}

impl SoftAttribute {
    pub fn new(phrase: impl Into<String>) -> Self {
        let phrase = phrase.into();
        Self {
            id: phrase.clone(),
            phrase,
        }
    }
}

/// Everything [`load_corpus`] reads.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub catalog: ItemCatalog,
    pub reviews: ReviewStore,
    pub ratings: RatingSet,
    pub tags: TagAssignments,
}
