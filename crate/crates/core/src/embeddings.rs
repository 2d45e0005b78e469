//! Matrix-factorization user/item embeddings trained by SGD.
//!
//! Minimizes, summed over observed ratings,
//! `(r_ij - <u_i, x_j>)^2 + lambda1 |u_i|^2 + lambda2 |x_j|^2`
//! with one update per observed triple per epoch. No bias terms.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::RatingSet;
use crate::scalar::dot;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub dim: usize,
    pub learning_rate: T,
    pub epochs: usize,
    pub lambda1: T,
    pub lambda2: T,
    pub seed: u64,
    pub init_scale: T,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            dim: 25,
            learning_rate: T::lit(0.02),
            epochs: 100,
            lambda1: T::lit(0.05),
            lambda2: T::lit(0.05),
            seed: 0,
            init_scale: T::lit(0.1),
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(self.learning_rate > T::zero()) || !(self.init_scale > T::zero()) {
            return bad("learning_rate and init_scale must be positive");
        }
        if self.lambda1 < T::zero() || self.lambda2 < T::zero() {
            return bad("regularization must be non-negative");
        }
        Ok(())
    }
}

/// User and item embedding tables (row-major, one row per id).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel<T> {
    dim: usize,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    users: Vec<T>,
    items: Vec<T>,
    pub lambda1: T,
    pub lambda2: T,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct FactorModelRepr<T> {
    dim: usize,
    lambda1: T,
    lambda2: T,
    user_ids: Vec<String>,
    user_vectors: Vec<T>,
    item_ids: Vec<String>,
    item_vectors: Vec<T>,
}

fn index_of(ids: &[String]) -> HashMap<String, usize> {
    ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect()
}

impl<T: Scalar> FactorModel<T> {
    /// Builds a model from explicit tables; `users`/`items` are row-major with `dim` columns.
    pub fn from_parts(
        dim: usize,
        user_ids: Vec<String>,
        users: Vec<T>,
        item_ids: Vec<String>,
        items: Vec<T>,
        lambda1: T,
        lambda2: T,
    ) -> Result<Self> {
        if dim == 0 || users.len() != user_ids.len() * dim || items.len() != item_ids.len() * dim {
            return Err(Error::InvalidArgument(
                "embedding table shape does not match ids and dim".into(),
            ));
        }
        let user_index = index_of(&user_ids);
        let item_index = index_of(&item_ids);
        if user_index.len() != user_ids.len() || item_index.len() != item_ids.len() {
            return Err(Error::InvalidArgument("duplicate id in embedding table".into()));
        }
        Ok(Self {
            dim,
            user_ids,
            item_ids,
            users,
            items,
            lambda1,
            lambda2,
            user_index,
            item_index,
        })
    }

    /// Item-only model, handy when embeddings come from elsewhere.
    pub fn from_item_vectors<'a>(
        vectors: impl IntoIterator<Item = (&'a str, Vec<T>)>,
    ) -> Result<Self> {
        let mut ids = Vec::new();
        let mut flat = Vec::new();
        let mut dim = None;
        for (id, v) in vectors {
            if *dim.get_or_insert(v.len()) != v.len() {
                return Err(Error::InvalidArgument("ragged item vectors".into()));
            }
            ids.push(id.to_string());
            flat.extend(v);
        }
        Self::from_parts(dim.unwrap_or(0), vec![], vec![], ids, flat, T::zero(), T::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item(&self, id: &str) -> Option<&[T]> {
        self.item_index
            .get(id)
            .map(|&i| &self.items[i * self.dim..(i + 1) * self.dim])
    }

    pub fn user(&self, id: &str) -> Option<&[T]> {
        self.user_index
            .get(id)
            .map(|&i| &self.users[i * self.dim..(i + 1) * self.dim])
    }

    pub fn item_or_err(&self, id: &str) -> Result<&[T]> {
        self.item(id).ok_or_else(|| Error::MissingEmbedding(id.to_string()))
    }

    pub fn predict(&self, user: &str, item: &str) -> Result<T> {
        let u = self.user(user).ok_or_else(|| Error::MissingUser(user.to_string()))?;
        Ok(dot(u, self.item_or_err(item)?))
    }

    pub fn to_json(&self) -> String {
        let repr = FactorModelRepr {
            dim: self.dim,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            user_ids: self.user_ids.clone(),
            user_vectors: self.users.clone(),
            item_ids: self.item_ids.clone(),
            item_vectors: self.items.clone(),
        };
        serde_json::to_string(&repr).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: FactorModelRepr<T> = serde_json::from_str(s)?;
        Self::from_parts(
            r.dim,
            r.user_ids,
            r.user_vectors,
            r.item_ids,
            r.item_vectors,
            r.lambda1,
            r.lambda2,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Gradient of the per-example objective with respect to `u` and `x`.
pub fn example_gradient<T: Scalar>(
    rating: T,
    u: &[T],
    x: &[T],
    lambda1: T,
    lambda2: T,
) -> (Vec<T>, Vec<T>) {
    let two = T::lit(2.0);
    let err = rating - dot(u, x);
    let gu = u
        .iter()
        .zip(x)
        .map(|(&ui, &xi)| -two * err * xi + two * lambda1 * ui)
        .collect();
    let gx = u
        .iter()
        .zip(x)
        .map(|(&ui, &xi)| -two * err * ui + two * lambda2 * xi)
        .collect();
    (gu, gx)
}

/// Per-example objective value.
pub fn example_objective<T: Scalar>(rating: T, u: &[T], x: &[T], lambda1: T, lambda2: T) -> T {
    let err = rating - dot(u, x);
    err * err + lambda1 * dot(u, u) + lambda2 * dot(x, x)
}

/// Objective summed over every observed triple.
pub fn training_objective<T: Scalar>(model: &FactorModel<T>, ratings: &RatingSet) -> Result<T> {
    let mut total = T::zero();
    for t in ratings.iter() {
        let u = model
            .user(&t.user_id)
            .ok_or_else(|| Error::MissingUser(t.user_id.clone()))?;
        let x = model.item_or_err(&t.item_id)?;
        total += example_objective(T::lit(t.value), u, x, model.lambda1, model.lambda2);
    }
    Ok(total)
}

/// sqrt(mean (r - <u, x>)^2) over the rating set.
pub fn reconstruction_rmse<T: Scalar>(model: &FactorModel<T>, ratings: &RatingSet) -> Result<T> {
    if ratings.is_empty() {
        return Err(Error::InvalidArgument("empty rating set".into()));
    }
    let mut sse = T::zero();
    for t in ratings.iter() {
        let e = T::lit(t.value) - model.predict(&t.user_id, &t.item_id)?;
        sse += e * e;
    }
    Ok((sse / T::lit(ratings.len() as f64)).sqrt())
}

/// Per-epoch diagnostics; index 0 is the state before the first epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory<T> {
    pub rmse: Vec<T>,
    pub objective: Vec<T>,
}

pub fn train_mf<T: Scalar>(ratings: &RatingSet, cfg: &TrainConfig<T>) -> Result<FactorModel<T>> {
    train_mf_detailed(ratings, cfg, &[], &[]).map(|(m, _)| m)
}

/// Trains on `ratings`; `extra_users`/`extra_items` also get (random, untrained) vectors.
pub fn train_mf_detailed<T: Scalar>(
    ratings: &RatingSet,
    cfg: &TrainConfig<T>,
    extra_users: &[String],
    extra_items: &[String],
) -> Result<(FactorModel<T>, TrainHistory<T>)> {
    cfg.validate()?;
    if ratings.is_empty() {
        return Err(Error::InvalidArgument("at least one rating is required".into()));
    }
    let user_ids: Vec<String> = ratings
        .iter()
        .map(|t| t.user_id.clone())
        .chain(extra_users.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let item_ids: Vec<String> = ratings
        .iter()
        .map(|t| t.item_id.clone())
        .chain(extra_items.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.init_scale.as_f64())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut draw = |n: usize| -> Vec<T> { (0..n).map(|_| T::lit(normal.sample(&mut rng))).collect() };
    let users = draw(user_ids.len() * d);
    let items = draw(item_ids.len() * d);
    let mut model =
        FactorModel::from_parts(d, user_ids, users, item_ids, items, cfg.lambda1, cfg.lambda2)?;

    let triples: Vec<(usize, usize, T)> = ratings
        .iter()
        .map(|t| {
            (
                model.user_index[&t.user_id],
                model.item_index[&t.item_id],
                T::lit(t.value),
            )
        })
        .collect();

    let mut history = TrainHistory::default();
    let record = |m: &FactorModel<T>, h: &mut TrainHistory<T>| -> Result<()> {
        let obj = training_objective(m, ratings)?;
        if !obj.is_finite() {
            return Err(Error::Diverged);
        }
        h.objective.push(obj);
        h.rmse.push(reconstruction_rmse(m, ratings)?);
        Ok(())
    };
    record(&model, &mut history)?;

    let lr = cfg.learning_rate;
    let two = T::lit(2.0);
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut u_old = vec![T::zero(); d];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let (ui, xi, r) = triples[k];
            let u = &mut model.users[ui * d..(ui + 1) * d];
            let x = &mut model.items[xi * d..(xi + 1) * d];
            let err = r - dot(u, x);
            u_old.copy_from_slice(u);
            for f in 0..d {
                u[f] -= lr * (-two * err * x[f] + two * cfg.lambda1 * u[f]);
            }
            for f in 0..d {
                x[f] -= lr * (-two * err * u_old[f] + two * cfg.lambda2 * x[f]);
            }
        }
        record(&model, &mut history)?;
    }
    Ok((model, history))
}
