use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softattr::corpus::{RatingSet, RatingTriple};
use softattr::embeddings::{
    example_gradient, example_objective, reconstruction_rmse, train_mf, train_mf_detailed, FactorModel, TrainConfig,
};
use softattr::synth::{LowRankConfig, LowRankWorld};

fn triple(u: &str, i: &str, r: f64) -> RatingTriple {
    RatingTriple { user_id: u.into(), item_id: i.into(), value: r }
}

/// Settings under which d=25 reaches the fixture's training target.
pub fn fixture_config() -> TrainConfig<f64> {
    TrainConfig { dim: 25, lambda1: 0.02, lambda2: 0.02, epochs: 500, ..Default::default() }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

proptest! {
    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), lam1 in 0.0f64..1.0, lam2 in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 6;
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = rng.random_range(-3.0..3.0);
        let (gu, gx) = example_gradient(r, &u, &x, lam1, lam2);
        let h = 1e-5;
        for f in 0..d {
            let (mut up, mut um) = (u.clone(), u.clone());
            up[f] += h;
            um[f] -= h;
            let num = (example_objective(r, &up, &x, lam1, lam2) - example_objective(r, &um, &x, lam1, lam2)) / (2.0 * h);
            prop_assert!(rel_err(gu[f], num) < 1e-5 || (gu[f] - num).abs() < 1e-9, "u[{f}] {} vs {num}", gu[f]);
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[f] += h;
            xm[f] -= h;
            let num = (example_objective(r, &u, &xp, lam1, lam2) - example_objective(r, &u, &xm, lam1, lam2)) / (2.0 * h);
            prop_assert!(rel_err(gx[f], num) < 1e-5 || (gx[f] - num).abs() < 1e-9, "x[{f}] {} vs {num}", gx[f]);
        }
    }
}

#[test]
fn single_example_fits_without_regularization() {
    let rs = RatingSet::new(vec![triple("u", "i", 1.0)]).unwrap();
    let cfg = TrainConfig::<f64> { dim: 3, lambda1: 0.0, lambda2: 0.0, epochs: 2000, init_scale: 0.5, ..Default::default() };
    let m = train_mf(&rs, &cfg).unwrap();
    assert!((m.predict("u", "i").unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn heavy_regularization_shrinks_vectors() {
    let world = LowRankWorld::generate(&LowRankConfig { users: 30, items: 40, density: 0.2, ..Default::default() });
    let norm = |m: &FactorModel<f64>| m.item_ids().iter().map(|i| m.item(i).unwrap().iter().map(|v| v * v).sum::<f64>()).sum::<f64>();
    let short = train_mf(&world.ratings, &TrainConfig { lambda1: 5.0, lambda2: 5.0, epochs: 1, learning_rate: 0.01, ..Default::default() }).unwrap();
    let long = train_mf(&world.ratings, &TrainConfig { lambda1: 5.0, lambda2: 5.0, epochs: 20, learning_rate: 0.01, ..Default::default() }).unwrap();
    let init = train_mf(&world.ratings, &TrainConfig { lambda1: 5.0, lambda2: 5.0, epochs: 1, learning_rate: 1e-12, ..Default::default() }).unwrap();
    assert!(norm(&short) < norm(&init));
    assert!(norm(&long) < 1e-3 * norm(&init));
}

#[test]
fn small_learning_rate_never_increases_objective() {
    let world = LowRankWorld::generate(&LowRankConfig { users: 50, items: 60, density: 0.1, ..Default::default() });
    let cfg = TrainConfig::<f64> { learning_rate: 0.005, epochs: 60, ..Default::default() };
    let (_, hist) = train_mf_detailed(&world.ratings, &cfg, &[], &[]).unwrap();
    for w in hist.objective.windows(2) {
        assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn synthetic_fixture_reconstructs() {
    let world = LowRankWorld::generate(&LowRankConfig::default());
    let cfg = fixture_config();
    let (model, hist) = train_mf_detailed(&world.ratings, &cfg, &[], &world.item_ids).unwrap();
    let step = cfg.epochs / 10;
    let checkpoints: Vec<f64> = hist.rmse.iter().step_by(step).copied().collect();
    assert_eq!(checkpoints.len(), 11);
    for w in checkpoints.windows(2) {
        assert!(w[1] <= w[0], "{checkpoints:?}");
    }
    assert!(hist.rmse[cfg.epochs] < 0.05 * hist.rmse[0]);
    assert_eq!(reconstruction_rmse(&model, &world.ratings).unwrap(), hist.rmse[cfg.epochs]);
}

#[test]
fn training_is_deterministic() {
    let world = LowRankWorld::generate(&LowRankConfig { users: 30, items: 40, density: 0.2, ..Default::default() });
    let cfg = TrainConfig::<f64> { epochs: 5, seed: 9, ..Default::default() };
    let a = train_mf(&world.ratings, &cfg).unwrap();
    let b = train_mf(&world.ratings, &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let c = train_mf(&world.ratings, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn rmse_matches_recomputation_on_100_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let d = 4;
    let users: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
    let items: Vec<String> = (0..15).map(|i| format!("i{i:02}")).collect();
    let uv: Vec<f64> = (0..users.len() * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let iv: Vec<f64> = (0..items.len() * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let model = FactorModel::from_parts(d, users.clone(), uv.clone(), items.clone(), iv.clone(), 0.0, 0.0).unwrap();
    let mut cells: Vec<(usize, usize)> = (0..10).flat_map(|u| (0..15).map(move |i| (u, i))).collect();
    rand::seq::SliceRandom::shuffle(cells.as_mut_slice(), &mut rng);
    let rows: Vec<(usize, usize, f64)> = cells[..100].iter().map(|&(u, i)| (u, i, rng.random_range(1.0..5.0))).collect();
    let rs = RatingSet::new(rows.iter().map(|&(u, i, r)| triple(&users[u], &items[i], r)).collect()).unwrap();

    let mut sse = 0.0;
    for &(u, i, r) in &rows {
        let p: f64 = (0..d).map(|f| uv[u * d + f] * iv[i * d + f]).sum();
        sse += (r - p) * (r - p);
    }
    let want = (sse / 100.0).sqrt();
    assert!((reconstruction_rmse(&model, &rs).unwrap() - want).abs() < 1e-12);
}

#[test]
fn rmse_trivial_cases() {
    let rs = RatingSet::new(vec![triple("u", "i", 2.0)]).unwrap();
    let zero = FactorModel::from_parts(2, vec!["u".into()], vec![0.0, 0.0], vec!["i".into()], vec![0.0, 0.0], 0.0, 0.0).unwrap();
    assert_eq!(reconstruction_rmse(&zero, &rs).unwrap(), 2.0);
    let exact = FactorModel::from_parts(2, vec!["u".into()], vec![1.0, 1.0], vec!["i".into()], vec![1.0, 1.0], 0.0, 0.0).unwrap();
    assert_eq!(reconstruction_rmse(&exact, &rs).unwrap(), 0.0);
}

#[test]
fn model_round_trips_through_disk() {
    let world = LowRankWorld::generate(&LowRankConfig { users: 20, items: 25, density: 0.3, ..Default::default() });
    let m = train_mf(&world.ratings, &TrainConfig::<f64> { epochs: 3, ..Default::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    m.save(&p).unwrap();
    assert_eq!(FactorModel::<f64>::load(&p).unwrap(), m);
}

#[test]
fn f32_training_runs() {
    let world = LowRankWorld::generate(&LowRankConfig { users: 40, items: 50, density: 0.2, ..Default::default() });
    let cfg = TrainConfig::<f32> { epochs: 50, ..Default::default() };
    let (_, hist) = train_mf_detailed(&world.ratings, &cfg, &[], &[]).unwrap();
    assert!(hist.rmse.last().unwrap() < &(0.5 * hist.rmse[0]));
}

#[test]
fn huge_learning_rate_reports_divergence() {
    let world = LowRankWorld::generate(&LowRankConfig { users: 20, items: 20, density: 0.5, ..Default::default() });
    let err = train_mf(&world.ratings, &TrainConfig::<f64> { learning_rate: 50.0, epochs: 50, ..Default::default() }).unwrap_err();
    assert!(matches!(err, softattr::Error::Diverged), "{err}");
}
