//! Synthetic corpora with a known ground truth.
//!
//! Items and users get latent factors; ratings are their noisy inner products.
//! A soft attribute is a hidden direction in the latent space. Simulated raters
//! judge items by that direction, review text mentions the attribute more often
//! for items high along it, and taggers tag accordingly. Used by the test suites
//! and by the CLI's `synth` command for demo data.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::corpus::{
    write_judgments, Item, ItemCatalog, Judgment, RatingSet, RatingTriple, Review, ReviewStore,
    SoftAttribute, TagAssignment, TagAssignments,
};
use crate::embeddings::FactorModel;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct LowRankConfig {
    pub users: usize,
    pub items: usize,
    pub rank: usize,
    /// Fraction of the user-item matrix observed for training.
    pub density: f64,
    pub noise: f64,
    /// Extra unobserved cells drawn for evaluation.
    pub held_out: usize,
    pub seed: u64,
}

impl Default for LowRankConfig {
    fn default() -> Self {
        Self {
            users: 200,
            items: 300,
            rank: 5,
            density: 0.05,
            noise: 0.01,
            held_out: 1_000,
            seed: 0,
        }
    }
}

/// A rating matrix generated from known low-rank factors.
#[derive(Debug, Clone)]
pub struct LowRankWorld {
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    pub user_factors: Vec<Vec<f64>>,
    pub item_factors: Vec<Vec<f64>>,
    pub ratings: RatingSet,
    pub held_out: RatingSet,
}

fn gaussian_vec<R: Rng>(rng: &mut R, n: usize, std: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            std * z
        })
        .collect::<Vec<f64>>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LowRankWorld {
    pub fn generate(cfg: &LowRankConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        // Entry std rank^(-1/4) gives inner products of unit variance.
        let std = (cfg.rank as f64).powf(-0.25);
        let user_ids: Vec<String> = (0..cfg.users).map(|i| format!("u{i:04}")).collect();
        let item_ids: Vec<String> = (0..cfg.items).map(|i| format!("m{i:04}")).collect();
        let user_factors: Vec<Vec<f64>> =
            (0..cfg.users).map(|_| gaussian_vec(&mut rng, cfg.rank, std)).collect();
        let item_factors: Vec<Vec<f64>> =
            (0..cfg.items).map(|_| gaussian_vec(&mut rng, cfg.rank, std)).collect();

        let mut cells: Vec<(usize, usize)> = (0..cfg.users)
            .flat_map(|u| (0..cfg.items).map(move |i| (u, i)))
            .collect();
        cells.shuffle(&mut rng);
        let n_train = ((cfg.density * cells.len() as f64).round() as usize).min(cells.len());
        let n_test = cfg.held_out.min(cells.len() - n_train);
        let noise = Normal::new(0.0, cfg.noise.max(0.0)).expect("valid noise");
        let mut triple = |&(u, i): &(usize, usize)| RatingTriple {
            user_id: user_ids[u].clone(),
            item_id: item_ids[i].clone(),
            value: dot(&user_factors[u], &item_factors[i]) + noise.sample(&mut rng),
        };
        let train: Vec<RatingTriple> = cells[..n_train].iter().map(&mut triple).collect();
        let test: Vec<RatingTriple> = cells[n_train..n_train + n_test].iter().map(&mut triple).collect();
        Self {
            ratings: RatingSet::new(train).expect("cells are unique"),
            held_out: RatingSet::new(test).expect("cells are unique"),
            user_ids,
            item_ids,
            user_factors,
            item_factors,
        }
    }

    pub fn catalog(&self) -> ItemCatalog {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for t in self.ratings.iter() {
            *counts.entry(t.item_id.as_str()).or_default() += 1;
        }
        ItemCatalog::new(
            self.item_ids
                .iter()
                .map(|id| Item {
                    id: id.clone(),
                    title: format!("Movie {id}"),
                    seen_count: counts.get(id.as_str()).copied().unwrap_or(0),
                    rating_count: counts.get(id.as_str()).copied().unwrap_or(0),
                    image_url: None,
                })
                .collect(),
        )
        .expect("unique ids")
    }

    /// A random unit direction in latent space.
    pub fn random_direction(&self, seed: u64) -> Vec<f64> {
        unit_direction(self.item_factors.first().map_or(0, Vec::len), seed)
    }

    /// True attribute value of every item along `direction`.
    pub fn attribute_values(&self, direction: &[f64]) -> BTreeMap<String, f64> {
        self.item_ids
            .iter()
            .zip(&self.item_factors)
            .map(|(id, f)| (id.clone(), dot(f, direction)))
            .collect()
    }
}

/// Projection of every item vector of `model` onto `direction`.
pub fn values_along<T: Scalar>(model: &FactorModel<T>, direction: &[f64]) -> BTreeMap<String, f64> {
    model
        .item_ids()
        .iter()
        .map(|id| {
            let v = model.item(id).expect("listed item");
            (id.clone(), v.iter().zip(direction).map(|(x, d)| x.as_f64() * d).sum())
        })
        .collect()
}

/// A unit direction of length `dim` drawn from `seed`.
pub fn unit_direction(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = gaussian_vec(&mut rng, dim, 1.0);
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// A soft attribute with its hidden per-item intensity.
#[derive(Debug, Clone)]
pub struct HiddenAttribute {
    pub attribute: SoftAttribute,
    pub values: BTreeMap<String, f64>,
}

impl HiddenAttribute {
    pub fn std_dev(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.values().sum::<f64>() / n;
        (self.values.values().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaterConfig {
    pub raters: usize,
    pub seen_per_rater: usize,
    pub candidates: usize,
    /// Std of per-comparison perception noise, in units of the attribute's std.
    pub noise: f64,
    pub seed: u64,
}

impl Default for RaterConfig {
    fn default() -> Self {
        Self {
            raters: 40,
            seen_per_rater: 60,
            candidates: 10,
            noise: 0.0,
            seed: 0,
        }
    }
}

/// Half-width of the "about the same" band: a third of the mass of the
/// difference of two independent draws falls inside it.
pub const SAME_BAND: f64 = 0.4307 * std::f64::consts::SQRT_2;

/// One judgment per rater per attribute, bucketing candidates by their hidden
/// value relative to a random anchor from the rater's seen items.
pub fn simulate_judgments(
    item_ids: &[String],
    attributes: &[HiddenAttribute],
    cfg: &RaterConfig,
) -> Result<Vec<Judgment>> {
    if cfg.seen_per_rater < cfg.candidates + 1 || cfg.seen_per_rater > item_ids.len() {
        return Err(Error::InvalidArgument(
            "seen_per_rater must cover anchor plus candidates and fit the catalog".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for r in 0..cfg.raters {
        let rater = format!("w{r:03}");
        let seen: Vec<&String> = item_ids.choose_multiple(&mut rng, cfg.seen_per_rater).collect();
        for attr in attributes {
            let sd = attr.std_dev();
            let band = SAME_BAND * sd;
            let picks: Vec<&&String> = seen.choose_multiple(&mut rng, cfg.candidates + 1).collect();
            let anchor = picks[0].as_str();
            let a0 = attr.values[anchor];
            let mut j = Judgment {
                rater_id: rater.clone(),
                attribute: attr.attribute.id.clone(),
                anchor: anchor.to_string(),
                less: vec![],
                same: vec![],
                more: vec![],
                seq: out.len(),
            };
            for c in &picks[1..] {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let d = attr.values[c.as_str()] - a0 + cfg.noise * sd * noise;
                let bucket = if d > band {
                    &mut j.more
                } else if d < -band {
                    &mut j.less
                } else {
                    &mut j.same
                };
                bucket.push(c.to_string());
            }
            out.push(j);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewConfig {
    pub min_reviews: usize,
    pub max_reviews: usize,
    pub words_per_review: usize,
    pub vocabulary: usize,
    /// Expected attribute mentions per item.
    pub mentions_per_item: f64,
    /// How sharply mention rates follow the hidden value (in std units).
    pub sharpness: f64,
    /// Share of mentions dropped onto uniformly random items.
    pub noise: f64,
    pub seed: u64,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        Self {
            min_reviews: 2,
            max_reviews: 8,
            words_per_review: 40,
            vocabulary: 800,
            mentions_per_item: 1.5,
            sharpness: 1.5,
            noise: 0.3,
            seed: 0,
        }
    }
}

/// Filler-word reviews with attribute phrases injected preferentially into
/// reviews of items that rank high on each hidden attribute.
pub fn synthesize_reviews(
    item_ids: &[String],
    attributes: &[HiddenAttribute],
    cfg: &ReviewConfig,
) -> ReviewStore {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut texts: Vec<(String, Vec<String>)> = Vec::new();
    let mut by_item: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for id in item_ids {
        let n = rng.random_range(cfg.min_reviews..=cfg.max_reviews);
        for _ in 0..n {
            let words = (0..cfg.words_per_review)
                .map(|_| format!("w{}", rng.random_range(0..cfg.vocabulary)))
                .collect();
            by_item.entry(id.as_str()).or_default().push(texts.len());
            texts.push((id.clone(), words));
        }
    }

    for attr in attributes {
        let sd = attr.std_dev().max(f64::MIN_POSITIVE);
        let mean = attr.values.values().sum::<f64>() / attr.values.len() as f64;
        let weights: Vec<f64> = item_ids
            .iter()
            .map(|id| (cfg.sharpness * (attr.values[id] - mean) / sd).exp())
            .collect();
        let total_w: f64 = weights.iter().sum();
        let total = (cfg.mentions_per_item * item_ids.len() as f64).round() as usize;
        let informed = rand::distr::weighted::WeightedIndex::new(&weights).expect("positive weights");
        for _ in 0..total {
            let item = if rng.random::<f64>() < cfg.noise {
                rng.random_range(0..item_ids.len())
            } else {
                informed.sample(&mut rng)
            };
            let reviews = &by_item[item_ids[item].as_str()];
            let r = reviews[rng.random_range(0..reviews.len())];
            let words = &mut texts[r].1;
            let pos = rng.random_range(0..=words.len());
            words.insert(pos, attr.attribute.phrase.clone());
        }
        debug_assert!(total_w > 0.0);
    }

    ReviewStore::new(
        texts
            .into_iter()
            .enumerate()
            .map(|(i, (item_id, words))| Review {
                id: format!("rv{i:06}"),
                item_id,
                text: words.join(" "),
            })
            .collect(),
    )
}

/// Tag assignments where each tagger of an item applies an attribute's phrase
/// with probability rising in the item's hidden value.
pub fn synthesize_tags(
    item_ids: &[String],
    attributes: &[HiddenAttribute],
    taggers_per_item: usize,
    seed: u64,
) -> TagAssignments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for id in item_ids {
        let n = rng.random_range(taggers_per_item / 2..=taggers_per_item + taggers_per_item / 2);
        for t in 0..n {
            let user = format!("t{:04}", (t * 7919 + id.len()) % 5000);
            let mut any = false;
            for attr in attributes {
                let z = (attr.values[id] - 0.0) / attr.std_dev().max(f64::MIN_POSITIVE);
                let p = 1.0 / (1.0 + (-(2.5 * z - 3.0)).exp());
                if rng.random::<f64>() < p {
                    rows.push(TagAssignment {
                        user_id: user.clone(),
                        item_id: id.clone(),
                        tag: attr.attribute.phrase.clone(),
                    });
                    any = true;
                }
            }
            if !any {
                rows.push(TagAssignment {
                    user_id: user,
                    item_id: id.clone(),
                    tag: "watched".into(),
                });
            }
        }
    }
    TagAssignments { rows }
}

/// Everything needed for an end-to-end run on synthetic data.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub world: LowRankWorld,
    pub catalog: ItemCatalog,
    pub attributes: Vec<HiddenAttribute>,
    pub reviews: ReviewStore,
    pub tags: TagAssignments,
    pub judgments: Vec<Judgment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub world: LowRankConfig,
    pub phrases: Vec<String>,
    pub raters: RaterConfig,
    pub reviews: ReviewConfig,
    pub taggers_per_item: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            world: LowRankConfig::default(),
            phrases: ["gritty", "whimsical", "slow paced"].map(String::from).to_vec(),
            raters: RaterConfig::default(),
            reviews: ReviewConfig::default(),
            taggers_per_item: 60,
            seed: 0,
        }
    }
}

impl SyntheticCorpus {
    pub fn generate(cfg: &SyntheticConfig) -> Result<Self> {
        let world = LowRankWorld::generate(&LowRankConfig {
            seed: cfg.world.seed ^ cfg.seed,
            ..cfg.world.clone()
        });
        let attributes: Vec<HiddenAttribute> = cfg
            .phrases
            .iter()
            .enumerate()
            .map(|(i, p)| HiddenAttribute {
                attribute: SoftAttribute::new(p.clone()),
                values: world.attribute_values(&world.random_direction(cfg.seed.wrapping_add(1000 + i as u64))),
            })
            .collect();
        let reviews = synthesize_reviews(
            &world.item_ids,
            &attributes,
            &ReviewConfig {
                seed: cfg.reviews.seed ^ cfg.seed,
                ..cfg.reviews.clone()
            },
        );
        let judgments = simulate_judgments(
            &world.item_ids,
            &attributes,
            &RaterConfig {
                seed: cfg.raters.seed ^ cfg.seed,
                ..cfg.raters.clone()
            },
        )?;
        let tags = synthesize_tags(&world.item_ids, &attributes, cfg.taggers_per_item, cfg.seed);
        Ok(Self {
            catalog: world.catalog(),
            world,
            attributes,
            reviews,
            tags,
            judgments,
        })
    }

    /// Writes the corpus files plus `judgments.jsonl` and `attributes.txt` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        let io = |e| Error::io(dir, e);
        fs::create_dir_all(dir).map_err(io)?;

        let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
        let mut w = csv::Writer::from_path(dir.join("items.csv")).map_err(csv_err)?;
        w.write_record(["id", "title", "seen_count", "rating_count"]).map_err(csv_err)?;
        for it in self.catalog.iter() {
            w.write_record([
                it.id.clone(),
                it.title.clone(),
                it.seen_count.to_string(),
                it.rating_count.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(io)?;

        let mut w = csv::Writer::from_path(dir.join("ratings.csv")).map_err(csv_err)?;
        w.write_record(["user_id", "item_id", "rating"]).map_err(csv_err)?;
        for t in self.world.ratings.iter() {
            w.write_record([t.user_id.clone(), t.item_id.clone(), format!("{}", t.value)])
                .map_err(csv_err)?;
        }
        w.flush().map_err(io)?;

        let mut w = csv::Writer::from_path(dir.join("tags.csv")).map_err(csv_err)?;
        for row in &self.tags.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        if self.tags.rows.is_empty() {
            w.write_record(["user_id", "item_id", "tag"]).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;

        let mut f = fs::File::create(dir.join("reviews.jsonl")).map_err(io)?;
        for r in self.reviews.iter() {
            writeln!(f, "{}", serde_json::to_string(r)?).map_err(io)?;
        }

        let f = fs::File::create(dir.join("judgments.jsonl")).map_err(io)?;
        write_judgments(std::io::BufWriter::new(f), &self.judgments).map_err(io)?;

        let phrases: Vec<&str> = self.attributes.iter().map(|a| a.attribute.phrase.as_str()).collect();
        fs::write(dir.join("attributes.txt"), phrases.join("\n") + "\n").map_err(io)?;
        Ok(())
    }
}
