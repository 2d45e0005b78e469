#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use softattr::corpus::Judgment;

/// Random judgment over items `i0..i{pool}`; buckets may be empty.
pub fn random_judgment<R: Rng>(rng: &mut R, pool: usize, max_candidates: usize, seq: usize) -> Judgment {
    let mut ids: Vec<String> = (0..pool).map(|i| format!("i{i}")).collect();
    ids.shuffle(rng);
    let n = rng.random_range(1..=max_candidates.min(pool - 1));
    let anchor = ids[0].clone();
    let (mut less, mut same, mut more) = (vec![], vec![], vec![]);
    for id in &ids[1..=n] {
        match rng.random_range(0..3) {
            0 => less.push(id.clone()),
            1 => same.push(id.clone()),
            _ => more.push(id.clone()),
        }
    }
    Judgment {
        rater_id: format!("r{}", rng.random_range(0..5)),
        attribute: "a".into(),
        anchor,
        less,
        same,
        more,
        seq,
    }
}

/// Integer-valued scores so that ties occur.
pub fn random_scores<R: Rng>(rng: &mut R, pool: usize, levels: i32) -> HashMap<String, f64> {
    (0..pool)
        .map(|i| (format!("i{i}"), rng.random_range(0..levels) as f64))
        .collect()
}
