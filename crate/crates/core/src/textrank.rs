//! BM25 retrieval over review text and the two term-based item rankers.
//!
//! Item-centric scoring concatenates all reviews of an item into one pseudo
//! document; review-centric scoring ranks reviews individually and sums the
//! scores per item.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{ItemCatalog, ItemId, ReviewStore, SoftAttribute};
use crate::{Error, Result, Scalar};

const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMode {
    /// One pseudo document per item.
    ItemDocs,
    /// One document per review.
    ReviewDocs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    /// Item id in item mode, review id in review mode.
    pub id: String,
    pub item_id: ItemId,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    pub mode: IndexMode,
    /// Sorted by document id; postings refer to positions in this vector.
    pub docs: Vec<Document>,
    pub postings: BTreeMap<String, Vec<(u32, u32)>>,
    pub avg_doc_length: f64,
}

pub fn build_index(reviews: &ReviewStore, mode: IndexMode) -> InvertedIndex {
    // (doc id, item id, tokens)
    let mut raw: Vec<(String, ItemId, Vec<String>)> = match mode {
        IndexMode::ItemDocs => reviews
            .items()
            .map(|item| {
                let tokens = reviews
                    .for_item(item)
                    .flat_map(|r| tokenize(&r.text))
                    .collect();
                (item.to_string(), item.to_string(), tokens)
            })
            .collect(),
        IndexMode::ReviewDocs => reviews
            .iter()
            .map(|r| (r.id.clone(), r.item_id.clone(), tokenize(&r.text)))
            .collect(),
    };
    raw.sort_by(|a, b| a.0.cmp(&b.0));

    let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    let mut docs = Vec::with_capacity(raw.len());
    let mut total_len = 0u64;
    for (doc_idx, (id, item_id, tokens)) in raw.into_iter().enumerate() {
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for (term, count) in tf {
            postings.entry(term).or_default().push((doc_idx as u32, count));
        }
        total_len += tokens.len() as u64;
        docs.push(Document {
            id,
            item_id,
            length: tokens.len() as u32,
        });
    }
    let avg_doc_length = if docs.is_empty() {
        0.0
    } else {
        total_len as f64 / docs.len() as f64
    };
    InvertedIndex {
        mode,
        docs,
        postings,
        avg_doc_length,
    }
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    /// Non-negative BM25 idf: ln((N - n + 0.5) / (n + 0.5) + 1).
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.postings.get(term).map_or(0, Vec::len) as f64;
        let total = self.docs.len() as f64;
        ((total - n + 0.5) / (n + 0.5) + 1.0).ln()
    }

    /// BM25 score of every document with a non-zero score, keyed by doc position.
    pub fn score_documents<T: Scalar>(&self, query: &str, params: Bm25Params) -> BTreeMap<u32, T> {
        let mut acc: BTreeMap<u32, T> = BTreeMap::new();
        if self.docs.is_empty() {
            return acc;
        }
        let k1 = T::lit(params.k1);
        let b = T::lit(params.b);
        let avgdl = T::lit(self.avg_doc_length);
        for term in tokenize(query) {
            let Some(list) = self.postings.get(&term) else {
                continue;
            };
            let idf = T::lit(self.idf(&term));
            for &(doc, tf) in list {
                let tf = T::lit(tf as f64);
                let len = T::lit(self.docs[doc as usize].length as f64);
                let norm = k1 * (T::one() - b + b * len / avgdl);
                *acc.entry(doc).or_insert_with(T::zero) += idf * tf * (k1 + T::one()) / (tf + norm);
            }
        }
        acc
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let envelope = serde_json::json!({ "version": CACHE_VERSION, "index": self });
        fs::write(path, serde_json::to_vec(&envelope)?).map_err(|e| Error::io(path, e))
    }

    /// Loads a cached index; `None` when missing, unreadable or from another version.
    pub fn load_cached(path: &Path) -> Option<Self> {
        #[derive(Deserialize)]
        struct Envelope {
            version: u32,
            index: InvertedIndex,
        }
        let bytes = fs::read(path).ok()?;
        let env: Envelope = serde_json::from_slice(&bytes).ok()?;
        (env.version == CACHE_VERSION).then_some(env.index)
    }
}

/// Items ordered by descending score, ties broken by ascending item id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredList<T> {
    pub attribute_id: String,
    pub entries: Vec<(ItemId, T)>,
}

impl<T: Scalar> ScoredList<T> {
    pub fn from_scores(
        attribute_id: impl Into<String>,
        scores: impl IntoIterator<Item = (ItemId, T)>,
    ) -> Self {
        let mut entries: Vec<(ItemId, T)> = scores.into_iter().collect();
        entries.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        Self {
            attribute_id: attribute_id.into(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn to_map(&self) -> HashMap<ItemId, T> {
        self.entries.iter().cloned().collect()
    }

    /// Keeps only the listed items, preserving order.
    pub fn restricted_to(&self, keep: impl Fn(&str) -> bool) -> Self {
        Self {
            attribute_id: self.attribute_id.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| keep(id))
                .cloned()
                .collect(),
        }
    }
}

fn require_mode(index: &InvertedIndex, mode: IndexMode) -> Result<()> {
    if index.mode != mode {
        return Err(Error::InvalidArgument(format!(
            "index built in {:?} mode, expected {:?}",
            index.mode, mode
        )));
    }
    Ok(())
}

/// Scores each catalog item by BM25 of its concatenated reviews; unreviewed items score 0.
pub fn score_item_centric<T: Scalar>(
    attribute: &SoftAttribute,
    index: &InvertedIndex,
    catalog: &ItemCatalog,
    params: Bm25Params,
) -> Result<ScoredList<T>> {
    require_mode(index, IndexMode::ItemDocs)?;
    let by_doc = index.score_documents::<T>(&attribute.phrase, params);
    let mut per_item: HashMap<&str, T> = HashMap::new();
    for (doc, s) in by_doc {
        per_item.insert(index.docs[doc as usize].item_id.as_str(), s);
    }
    Ok(ScoredList::from_scores(
        attribute.id.clone(),
        catalog.ids().map(|id| {
            (
                id.to_string(),
                per_item.get(id).copied().unwrap_or_else(T::zero),
            )
        }),
    ))
}

/// Scores each catalog item by the sum of BM25 scores of its reviews.
pub fn score_review_centric<T: Scalar>(
    attribute: &SoftAttribute,
    index: &InvertedIndex,
    catalog: &ItemCatalog,
    params: Bm25Params,
) -> Result<ScoredList<T>> {
    require_mode(index, IndexMode::ReviewDocs)?;
    let by_doc = index.score_documents::<T>(&attribute.phrase, params);
    let mut per_item: HashMap<&str, T> = HashMap::new();
    // BTreeMap iteration keeps the summation order fixed.
    for (doc, s) in by_doc {
        *per_item
            .entry(index.docs[doc as usize].item_id.as_str())
            .or_insert_with(T::zero) += s;
    }
    Ok(ScoredList::from_scores(
        attribute.id.clone(),
        catalog.ids().map(|id| {
            (
                id.to_string(),
                per_item.get(id).copied().unwrap_or_else(T::zero),
            )
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Review;

    fn review(id: &str, item: &str, text: &str) -> Review {
        Review {
            id: id.into(),
            item_id: item.into(),
            text: text.into(),
        }
    }

    fn store() -> ReviewStore {
        ReviewStore::new(vec![
            review("r1", "a", "A truly scary film."),
            review("r2", "a", "Not scary at all, just dull"),
            review("r3", "b", "Charming and warm"),
        ])
    }

    #[test]
    fn tokenizer_lowercases_and_splits_unicode() {
        assert_eq!(
            tokenize("Ça va? Très-BIEN!! 42x"),
            vec!["ça", "va", "très", "bien", "42x"]
        );
        assert!(tokenize("  ,;  ").is_empty());
    }

    #[test]
    fn document_counts_follow_mode() {
        assert_eq!(build_index(&store(), IndexMode::ItemDocs).doc_count(), 2);
        assert_eq!(build_index(&store(), IndexMode::ReviewDocs).doc_count(), 3);
    }

    #[test]
    fn avg_length_is_mean_and_postings_sorted() {
        let idx = build_index(&store(), IndexMode::ReviewDocs);
        let mean = idx.docs.iter().map(|d| d.length as f64).sum::<f64>() / 3.0;
        assert_eq!(idx.avg_doc_length, mean);
        for list in idx.postings.values() {
            assert!(list.windows(2).all(|w| idx.docs[w[0].0 as usize].id < idx.docs[w[1].0 as usize].id));
        }
    }

    #[test]
    fn absent_query_scores_zero_and_unreviewed_items_included() {
        let cat = ItemCatalog::from_ids(["a", "b", "c"]);
        let idx = build_index(&store(), IndexMode::ItemDocs);
        let list: ScoredList<f64> =
            score_item_centric(&SoftAttribute::new("zombie"), &idx, &cat, Bm25Params::default())
                .unwrap();
        assert_eq!(list.len(), 3);
        assert!(list.entries.iter().all(|(_, s)| *s == 0.0));
        assert_eq!(list.ids().collect::<Vec<_>>(), vec!["a", "b", "c"]);
    }

    #[test]
    fn single_document_index_ranks_its_item_first() {
        let cat = ItemCatalog::from_ids(["a", "z"]);
        let rs = ReviewStore::new(vec![review("r", "z", "gory gory mess")]);
        let idx = build_index(&rs, IndexMode::ItemDocs);
        let list: ScoredList<f64> =
            score_item_centric(&SoftAttribute::new("gory"), &idx, &cat, Bm25Params::default())
                .unwrap();
        assert_eq!(list.entries[0].0, "z");
        assert!(list.entries[0].1 > 0.0);
    }

    #[test]
    fn wrong_mode_rejected() {
        let cat = ItemCatalog::from_ids(["a"]);
        let idx = build_index(&store(), IndexMode::ReviewDocs);
        assert!(score_item_centric::<f64>(&SoftAttribute::new("x"), &idx, &cat, Bm25Params::default()).is_err());
    }

    #[test]
    fn cache_round_trip_and_version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("idx.json");
        let idx = build_index(&store(), IndexMode::ItemDocs);
        idx.save(&p).unwrap();
        assert_eq!(InvertedIndex::load_cached(&p).unwrap(), idx);
        fs::write(&p, r#"{"version":0,"index":{}}"#).unwrap();
        assert!(InvertedIndex::load_cached(&p).is_none());
    }

    #[test]
    fn works_in_f32() {
        let cat = ItemCatalog::from_ids(["a", "b"]);
        let idx = build_index(&store(), IndexMode::ReviewDocs);
        let list: ScoredList<f32> =
            score_review_centric(&SoftAttribute::new("scary"), &idx, &cat, Bm25Params::default())
                .unwrap();
        assert_eq!(list.entries[0].0, "a");
    }
}
