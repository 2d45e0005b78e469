use std::collections::HashMap;

use proptest::prelude::*;
use softattr::corpus::{ItemCatalog, Review, ReviewStore, SoftAttribute};
use softattr::textrank::{build_index, score_item_centric, score_review_centric, Bm25Params, IndexMode};

const FIXTURE: [(&str, &str); 20] = [
    ("m1", "A scary, scary film with gore."),
    ("m1", "Not that scary honestly; mostly talk."),
    ("m1", "Slow but rewarding."),
    ("m2", "Funny and warm. Very funny!"),
    ("m2", "The jokes land; funny throughout."),
    ("m3", "Dark, violent and scary at night."),
    ("m3", "Violent violent violent."),
    ("m3", "Too dark for me"),
    ("m3", "A SCARY ride"),
    ("m4", "Whimsical and sweet, a little slow."),
    ("m5", "Slow paced drama about a family."),
    ("m5", "Really slow. Paced like a glacier."),
    ("m5", "family drama"),
    ("m6", "Action filled from start to finish"),
    ("m6", "Action, action, action."),
    ("m6", "Explosions and car chases; filled with action"),
    ("m7", "Gory and scary; not for kids."),
    ("m7", "gore gore gore"),
    ("m8", "A quiet character study."),
    ("m8", "Nothing happens, beautifully."),
];

fn store() -> ReviewStore {
    ReviewStore::new(
        FIXTURE
            .iter()
            .enumerate()
            .map(|(i, (item, text))| Review {
                id: format!("r{i:02}"),
                item_id: item.to_string(),
                text: text.to_string(),
            })
            .collect(),
    )
}

fn catalog() -> ItemCatalog {
    ItemCatalog::from_ids((1..=9).map(|i| format!("m{i}")))
}

fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Textbook BM25 over an explicit list of documents.
fn oracle(docs: &[Vec<String>], query: &str) -> Vec<f64> {
    let (k1, b) = (1.2, 0.75);
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    docs.iter()
        .map(|d| {
            words(query)
                .iter()
                .map(|q| {
                    let df = docs.iter().filter(|x| x.contains(q)).count() as f64;
                    let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                    let tf = d.iter().filter(|w| *w == q).count() as f64;
                    idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * d.len() as f64 / avg))
                })
                .sum()
        })
        .collect()
}

fn item_oracle(query: &str) -> HashMap<String, f64> {
    let mut items: Vec<&str> = FIXTURE.iter().map(|(i, _)| *i).collect();
    items.dedup();
    let docs: Vec<Vec<String>> = items
        .iter()
        .map(|it| FIXTURE.iter().filter(|(i, _)| i == it).flat_map(|(_, t)| words(t)).collect())
        .collect();
    let s = oracle(&docs, query);
    let mut out: HashMap<String, f64> = items.iter().map(|i| i.to_string()).zip(s).collect();
    out.insert("m9".into(), 0.0);
    out
}

fn review_oracle(query: &str) -> HashMap<String, f64> {
    let docs: Vec<Vec<String>> = FIXTURE.iter().map(|(_, t)| words(t)).collect();
    let mut out: HashMap<String, f64> = (1..=9).map(|i| (format!("m{i}"), 0.0)).collect();
    for ((item, _), s) in FIXTURE.iter().zip(oracle(&docs, query)) {
        *out.get_mut(*item).unwrap() += s;
    }
    out
}

const QUERIES: [&str; 6] = ["scary", "funny", "slow paced", "action filled", "violent", "dark gory"];

#[test]
fn item_centric_matches_oracle() {
    let idx = build_index(&store(), IndexMode::ItemDocs);
    assert_eq!(idx.doc_count(), 8);
    for q in QUERIES {
        let got = score_item_centric::<f64>(&SoftAttribute::new(q), &idx, &catalog(), Bm25Params::default())
            .unwrap()
            .to_map();
        let want = item_oracle(q);
        assert_eq!(got.len(), 9);
        for (id, w) in &want {
            assert!((got[id] - w).abs() < 1e-9, "{q} {id}: {} vs {w}", got[id]);
        }
    }
}

#[test]
fn review_centric_matches_oracle() {
    let idx = build_index(&store(), IndexMode::ReviewDocs);
    assert_eq!(idx.doc_count(), 20);
    for q in QUERIES {
        let got = score_review_centric::<f64>(&SoftAttribute::new(q), &idx, &catalog(), Bm25Params::default())
            .unwrap()
            .to_map();
        let want = review_oracle(q);
        for (id, w) in &want {
            assert!((got[id] - w).abs() < 1e-9, "{q} {id}: {} vs {w}", got[id]);
        }
    }
}

#[test]
fn absent_term_scores_zero_everywhere() {
    let idx = build_index(&store(), IndexMode::ItemDocs);
    let s = score_item_centric::<f64>(&SoftAttribute::new("zombie"), &idx, &catalog(), Bm25Params::default()).unwrap();
    assert!(s.entries.iter().all(|(_, v)| *v == 0.0));
}

#[test]
fn ranking_orders_by_score_then_id() {
    let idx = build_index(&store(), IndexMode::ItemDocs);
    let s = score_item_centric::<f64>(&SoftAttribute::new("scary"), &idx, &catalog(), Bm25Params::default()).unwrap();
    for w in s.entries.windows(2) {
        assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
    }
    let again = score_item_centric::<f64>(&SoftAttribute::new("scary"), &idx, &catalog(), Bm25Params::default()).unwrap();
    assert_eq!(s, again);
}

#[test]
fn f32_scores_track_f64() {
    let idx = build_index(&store(), IndexMode::ReviewDocs);
    let a = score_review_centric::<f64>(&SoftAttribute::new("scary"), &idx, &catalog(), Bm25Params::default()).unwrap().to_map();
    let b = score_review_centric::<f32>(&SoftAttribute::new("scary"), &idx, &catalog(), Bm25Params::default()).unwrap().to_map();
    for (id, v) in a {
        assert!((b[&id] as f64 - v).abs() < 1e-5);
    }
}

proptest! {
    #[test]
    fn review_scores_sum_per_item(texts in proptest::collection::vec(("[a-c]", "(x|y|z| |,){1,12}"), 1..25), q in "(x|y|z)( (x|y))?") {
        let reviews = ReviewStore::new(
            texts.iter().enumerate().map(|(i, (item, t))| Review { id: format!("r{i:03}"), item_id: item.clone(), text: format!("w {t}") }).collect(),
        );
        let cat = ItemCatalog::from_ids(["a", "b", "c", "d"].map(String::from));
        let idx = build_index(&reviews, IndexMode::ReviewDocs);
        let per_doc = idx.score_documents::<f64>(&q, Bm25Params::default());
        let got = score_review_centric::<f64>(&SoftAttribute::new(q.clone()), &idx, &cat, Bm25Params::default()).unwrap().to_map();
        for id in ["a", "b", "c", "d"] {
            let want: f64 = per_doc.iter().filter(|(d, _)| idx.docs[**d as usize].item_id == id).map(|(_, s)| s).sum();
            prop_assert!((got[id] - want).abs() < 1e-12);
            prop_assert!(got[id] >= 0.0);
        }
    }
}
