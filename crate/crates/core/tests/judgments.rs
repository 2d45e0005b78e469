mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use softattr::corpus::{expected_pair_count, infer_preferences, Judgment, Relation};
use softattr::eval::{agreement, assign_groups, bucket_distribution, pair_agreement, AgreementGroup, AgreementStats, VoteCounts};

use common::random_judgment;

/// Counts related pairs by listing every unordered pair of the judgment's items.
fn enumerate_related(j: &Judgment) -> (usize, usize, usize) {
    let mut items: Vec<(&str, i32)> = Vec::new();
    items.push((&j.anchor, 1));
    items.extend(j.less.iter().map(|i| (i.as_str(), 0)));
    items.extend(j.same.iter().map(|i| (i.as_str(), 1)));
    items.extend(j.more.iter().map(|i| (i.as_str(), 2)));
    let (mut strong, mut plain, mut ties) = (0, 0, 0);
    for a in 0..items.len() {
        for b in a + 1..items.len() {
            match (items[a].1 - items[b].1).abs() {
                2 => strong += 1,
                1 => plain += 1,
                _ if items[a].1 == 1 => ties += 1,
                _ => {}
            }
        }
    }
    (strong, plain, ties)
}

#[test]
fn pair_count_law_on_random_judgments() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seq in 0..10_000 {
        let j = random_judgment(&mut rng, 40, 20, seq);
        let prefs = infer_preferences(&j);
        let (p, s, n) = (j.more.len(), j.same.len(), j.less.len());
        assert_eq!(prefs.len(), p * n + p * (s + 1) + (s + 1) * n + (s + 1) * s / 2);
        assert_eq!(prefs.len(), expected_pair_count(p, s, n));
        let count = |r| prefs.iter().filter(|x| x.relation == r).count();
        assert_eq!(
            (count(Relation::StrongMore), count(Relation::More), count(Relation::Tie)),
            enumerate_related(&j)
        );
    }
}

#[test]
fn inferred_pairs_are_distinct_and_ties_canonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seq in 0..500 {
        let j = random_judgment(&mut rng, 30, 15, seq);
        let prefs = infer_preferences(&j);
        let keys: BTreeSet<(String, String)> = prefs
            .iter()
            .map(|p| {
                let (a, b) = (p.high.clone(), p.low.clone());
                if a < b { (a, b) } else { (b, a) }
            })
            .collect();
        assert_eq!(keys.len(), prefs.len());
        for p in &prefs {
            assert_eq!(p.source, seq);
            if p.relation == Relation::Tie {
                assert!(p.high < p.low);
            }
        }
    }
}

fn pair_votes(votes: &[(&str, &[&str], &[&str], &[&str])]) -> Vec<Judgment> {
    votes
        .iter()
        .map(|(r, less, same, more)| Judgment::new(*r, "a", "x", less, same, more))
        .collect()
}

#[test]
fn agreement_hand_cases() {
    // Anchor x against candidate y; "y more" means x ≺ y.
    let unanimous = pair_votes(&[("r1", &[], &[], &["y"]), ("r2", &[], &[], &["y"])]);
    let one_tie = pair_votes(&[("r1", &[], &[], &["y"]), ("r2", &[], &["y"], &[])]);
    let opposite = pair_votes(&[("r1", &[], &[], &["y"]), ("r2", &["y"], &[], &[])]);
    assert_eq!(agreement(&unanimous, "a").agree, Some(1.0));
    assert_eq!(agreement(&one_tie, "a").agree, Some(1.0));
    assert_eq!(agreement(&opposite, "a").agree, Some(0.5));

    assert_eq!(pair_agreement(VoteCounts { prec: 2, approx: 0, succ: 0 }), 1.0);
    assert_eq!(pair_agreement(VoteCounts { prec: 1, approx: 1, succ: 0 }), 1.0);
    assert_eq!(pair_agreement(VoteCounts { prec: 1, approx: 0, succ: 1 }), 0.5);
}

#[test]
fn single_rater_pairs_do_not_count() {
    let js = pair_votes(&[("r1", &[], &[], &["y"]), ("r1", &["y"], &[], &[])]);
    let s = agreement(&js, "a");
    assert_eq!(s.agree, None);
    assert_eq!(s.distinct_pairs, 0);
    assert_eq!(s.all_votes, 2);
}

#[test]
fn agreement_reports_counts() {
    let js = pair_votes(&[
        ("r1", &["z"], &["y"], &[]),
        ("r2", &[], &["y"], &["z"]),
        ("r3", &[], &[], &["w"]),
    ]);
    let s = agreement(&js, "a");
    // (x,y): two ties; (x,z): opposite; (y,z): opposite; (x,w): one rater only.
    assert_eq!(s.distinct_pairs, 3);
    assert_eq!(s.total_comparisons, 6);
    assert_eq!(s.tie_count, 2);
    assert_eq!(s.agree, Some((1.0 + 0.5 + 0.5) / 3.0));
}

#[test]
fn bucket_means_of_single_judgment() {
    let j = Judgment::new("r", "a", "x", &["1", "2", "3"], &["4", "5", "6"], &["7", "8", "9", "10"]);
    let d = bucket_distribution(&[j]);
    assert_eq!((d.overall.less, d.overall.same, d.overall.more), (3.0, 3.0, 4.0));
}

proptest! {
    #[test]
    fn pair_agreement_is_bounded_and_symmetric(prec in 0u32..20, approx in 0u32..20, succ in 0u32..20) {
        prop_assume!(prec + approx + succ > 0);
        let a = pair_agreement(VoteCounts { prec, approx, succ });
        let b = pair_agreement(VoteCounts { prec: succ, approx, succ: prec });
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        prop_assert!((a - b).abs() < 1e-12);
        if prec == 0 || succ == 0 {
            prop_assert!((a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn terciles_are_balanced(values in proptest::collection::vec(proptest::option::of(0.0f64..1.0), 0..60)) {
        let mut stats: Vec<AgreementStats> = values
            .iter()
            .enumerate()
            .map(|(i, v)| AgreementStats {
                attribute_id: format!("a{i:02}"),
                agree: *v,
                distinct_pairs: 0,
                total_comparisons: 0,
                tie_count: 0,
                all_votes: 0,
                group: None,
            })
            .collect();
        assign_groups(&mut stats);
        let size = |g| stats.iter().filter(|s| s.group == Some(g)).count();
        let sizes = [size(AgreementGroup::High), size(AgreementGroup::Medium), size(AgreementGroup::Low)];
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), values.iter().flatten().count());
        for s in &stats {
            prop_assert_eq!(s.group.is_some(), s.agree.is_some());
        }
        let high_min = stats.iter().filter(|s| s.group == Some(AgreementGroup::High)).filter_map(|s| s.agree).fold(f64::INFINITY, f64::min);
        let low_max = stats.iter().filter(|s| s.group == Some(AgreementGroup::Low)).filter_map(|s| s.agree).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(high_min >= low_max);
    }
}
