//! Soft attributes as vectors in item-embedding space.
//!
//! * centroid (CB): mean embedding of the top-k term-based items, scored by cosine;
//! * weakly supervised weighted dimensions (WWD): logistic regression on
//!   pseudo-labels taken from the head and tail of a term-based ranking;
//! * supervised weighted dimensions (SWD): linear ranking SVM on preferences
//!   inferred from rater judgments.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ItemId, PreferencePair, Relation};
use crate::embeddings::FactorModel;
use crate::scalar::{cosine, dot, sigmoid};
use crate::textrank::ScoredList;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermBaseline {
    TbIc,
    TbRc,
}

/// Anything that turns an item embedding into an attribute score.
pub trait AttributeScorer<T: Scalar> {
    fn attribute_id(&self) -> &str;

    fn dim(&self) -> usize;

    fn score_vector(&self, x: &[T]) -> T;

    fn score(&self, item: &str, model: &FactorModel<T>) -> Result<T> {
        if model.dim() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "attribute model has dim {}, embeddings have dim {}",
                self.dim(),
                model.dim()
            )));
        }
        Ok(self.score_vector(model.item_or_err(item)?))
    }

    fn score_items<'a>(
        &self,
        items: impl IntoIterator<Item = &'a str>,
        model: &FactorModel<T>,
    ) -> Result<HashMap<ItemId, T>> {
        items
            .into_iter()
            .map(|id| Ok((id.to_string(), self.score(id, model)?)))
            .collect()
    }

    fn rank<'a>(
        &self,
        items: impl IntoIterator<Item = &'a str>,
        model: &FactorModel<T>,
    ) -> Result<ScoredList<T>> {
        Ok(ScoredList::from_scores(
            self.attribute_id().to_string(),
            self.score_items(items, model)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel<T> {
    pub attribute_id: String,
    pub v: Vec<T>,
    pub k: usize,
    pub base: TermBaseline,
    /// Items whose embeddings were averaged, best first.
    pub members: Vec<ItemId>,
}

impl<T: Scalar> AttributeScorer<T> for CentroidModel<T> {
    fn attribute_id(&self) -> &str {
        &self.attribute_id
    }
    fn dim(&self) -> usize {
        self.v.len()
    }
    fn score_vector(&self, x: &[T]) -> T {
        cosine(x, &self.v)
    }
}

/// Averages the embeddings of the top-`k` items that have a strictly positive base score.
pub fn build_centroid<T: Scalar>(
    base_ranking: &ScoredList<T>,
    k: usize,
    base: TermBaseline,
    model: &FactorModel<T>,
) -> Result<CentroidModel<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let members: Vec<ItemId> = base_ranking
        .entries
        .iter()
        .filter(|(_, s)| *s > T::zero())
        .take(k)
        .map(|(id, _)| id.clone())
        .collect();
    if members.is_empty() {
        return Err(Error::NoTextualEvidence(base_ranking.attribute_id.clone()));
    }
    let mut v = vec![T::zero(); model.dim()];
    for id in &members {
        for (acc, &x) in v.iter_mut().zip(model.item_or_err(id)?) {
            *acc += x;
        }
    }
    let n = T::lit(members.len() as f64);
    v.iter_mut().for_each(|c| *c /= n);
    Ok(CentroidModel {
        attribute_id: base_ranking.attribute_id.clone(),
        v,
        k,
        base,
        members,
    })
}

pub fn score_cb<T: Scalar>(item: &str, m: &CentroidModel<T>, model: &FactorModel<T>) -> Result<T> {
    m.score(item, model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelSet {
    pub attribute_id: String,
    /// Head of the base ranking, best first.
    pub positives: Vec<ItemId>,
    /// Tail of the base ranking, same count as positives.
    pub negatives: Vec<ItemId>,
    pub z: f64,
}

/// Top `floor(z * n)` items (restricted to positive scores) become positives and the
/// same number from the bottom become negatives.
pub fn make_pseudo_labels<T: Scalar>(base_ranking: &ScoredList<T>, z: f64) -> Result<PseudoLabelSet> {
    if !(z > 0.0 && z <= 0.5) {
        return Err(Error::InvalidArgument(format!("z must be in (0, 0.5], got {z}")));
    }
    let n = base_ranking.len();
    // The epsilon keeps products like 0.29 * 100 from flooring to 28.
    let by_fraction = (z * n as f64 + 1e-9).floor() as usize;
    let positive_scores = base_ranking
        .entries
        .iter()
        .filter(|(_, s)| *s > T::zero())
        .count();
    let n_pos = by_fraction.min(positive_scores);
    if n_pos == 0 {
        return Err(Error::InsufficientEvidence(base_ranking.attribute_id.clone()));
    }
    let ids: Vec<&ItemId> = base_ranking.entries.iter().map(|(id, _)| id).collect();
    Ok(PseudoLabelSet {
        attribute_id: base_ranking.attribute_id.clone(),
        positives: ids[..n_pos].iter().map(|s| s.to_string()).collect(),
        negatives: ids[n - n_pos..].iter().map(|s| s.to_string()).collect(),
        z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearKind {
    Wwd,
    Swd,
}

/// A soft attribute as a direction (plus bias) in embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAttributeModel<T> {
    pub attribute_id: String,
    pub w: Vec<T>,
    pub bias: T,
    pub kind: LinearKind,
}

#[derive(Serialize, Deserialize)]
struct LinearRecord<T> {
    attribute_id: String,
    kind: LinearKind,
    dim: usize,
    w: Vec<T>,
    bias: T,
}

impl<T: Scalar> LinearAttributeModel<T> {
    pub fn linear_score(&self, x: &[T]) -> T {
        dot(&self.w, x) + self.bias
    }

    /// One-line JSON export record.
    pub fn to_record(&self) -> String {
        serde_json::to_string(&LinearRecord {
            attribute_id: self.attribute_id.clone(),
            kind: self.kind,
            dim: self.w.len(),
            w: self.w.clone(),
            bias: self.bias,
        })
        .expect("record serializes")
    }

    pub fn from_record(s: &str) -> Result<Self> {
        let r: LinearRecord<T> = serde_json::from_str(s)?;
        if r.dim != r.w.len() {
            return Err(Error::InvalidArgument(format!(
                "record dim {} does not match {} weights",
                r.dim,
                r.w.len()
            )));
        }
        Ok(Self {
            attribute_id: r.attribute_id,
            w: r.w,
            bias: r.bias,
            kind: r.kind,
        })
    }
}

impl<T: Scalar> AttributeScorer<T> for LinearAttributeModel<T> {
    fn attribute_id(&self) -> &str {
        &self.attribute_id
    }
    fn dim(&self) -> usize {
        self.w.len()
    }
    fn score_vector(&self, x: &[T]) -> T {
        match self.kind {
            LinearKind::Wwd => sigmoid(self.linear_score(x)),
            LinearKind::Swd => dot(&self.w, x),
        }
    }
}

pub fn score_wwd<T: Scalar>(
    item: &str,
    m: &LinearAttributeModel<T>,
    model: &FactorModel<T>,
) -> Result<T> {
    Ok(sigmoid(m.linear_score(model.item_or_err(item)?)))
}

pub fn score_swd<T: Scalar>(
    item: &str,
    m: &LinearAttributeModel<T>,
    model: &FactorModel<T>,
) -> Result<T> {
    Ok(dot(&m.w, model.item_or_err(item)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig<T> {
    /// L2 strength on `w` (the bias is not penalized), relative to the mean loss.
    pub l2: T,
    pub max_iters: usize,
    /// Stop once the gradient norm drops below this.
    pub tolerance: T,
}

impl<T: Scalar> Default for LogRegConfig<T> {
    fn default() -> Self {
        Self {
            l2: T::one(),
            max_iters: 10_000,
            tolerance: T::lit(1e-8),
        }
    }
}

fn softplus<T: Scalar>(t: T) -> T {
    t.max(T::zero()) + (-t.abs()).exp().ln_1p()
}

/// Mean logistic loss plus `l2/2 |w|^2`, with its gradient `(dw, dbias)`.
pub fn logistic_objective<T: Scalar>(
    w: &[T],
    bias: T,
    xs: &[&[T]],
    ys: &[bool],
    l2: T,
) -> (T, Vec<T>, T) {
    let n = T::lit(xs.len() as f64);
    let mut loss = T::zero();
    let mut gw = vec![T::zero(); w.len()];
    let mut gb = T::zero();
    for (x, &y) in xs.iter().zip(ys) {
        let t = dot(w, x) + bias;
        let yv = if y { T::one() } else { T::zero() };
        loss += softplus(t) - yv * t;
        let r = sigmoid(t) - yv;
        for (g, &xi) in gw.iter_mut().zip(x.iter()) {
            *g += r * xi;
        }
        gb += r;
    }
    let half = T::lit(0.5);
    let obj = loss / n + half * l2 * dot(w, w);
    for (g, &wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    (obj, gw, gb / n)
}

/// Fits the WWD logistic regression by full-batch gradient descent with step 1/L.
pub fn train_wwd<T: Scalar>(
    labels: &PseudoLabelSet,
    model: &FactorModel<T>,
    cfg: &LogRegConfig<T>,
) -> Result<LinearAttributeModel<T>> {
    if labels.positives.is_empty() || labels.negatives.is_empty() {
        return Err(Error::InsufficientEvidence(labels.attribute_id.clone()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for id in &labels.positives {
        xs.push(model.item_or_err(id)?);
        ys.push(true);
    }
    for id in &labels.negatives {
        xs.push(model.item_or_err(id)?);
        ys.push(false);
    }
    let max_sq = xs
        .iter()
        .map(|x| dot(x, x) + T::one())
        .fold(T::zero(), T::max);
    let step = T::one() / (T::lit(0.25) * max_sq + cfg.l2);

    let mut w = vec![T::zero(); model.dim()];
    let mut bias = T::zero();
    for _ in 0..cfg.max_iters {
        let (obj, gw, gb) = logistic_objective(&w, bias, &xs, &ys, cfg.l2);
        if !obj.is_finite() {
            return Err(Error::Diverged);
        }
        let gnorm = (dot(&gw, &gw) + gb * gb).sqrt();
        if gnorm < cfg.tolerance {
            break;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= step * *g;
        }
        bias -= step * gb;
    }
    if w.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
        return Err(Error::Diverged);
    }
    Ok(LinearAttributeModel {
        attribute_id: labels.attribute_id.clone(),
        w,
        bias,
        kind: LinearKind::Wwd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSvmConfig<T> {
    pub c: T,
    /// Maximum number of passes over the constraints.
    pub max_iters: usize,
    /// Largest projected-gradient magnitude (KKT violation) at which the solver stops.
    pub tolerance: T,
    pub seed: u64,
    pub include_ties: bool,
}

impl<T: Scalar> Default for RankSvmConfig<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            max_iters: 2_000,
            tolerance: T::lit(1e-3),
            seed: 0,
            include_ties: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport<T> {
    pub iterations: usize,
    pub converged: bool,
    /// Best primal objective seen after each pass.
    pub objective_trace: Vec<T>,
    pub final_objective: T,
}

/// One hinge term: `max(0, margin - w . diff)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeTerm<T> {
    pub diff: Vec<T>,
    pub margin: T,
}

/// Turns preferences into hinge terms; ties become two zero-margin terms when enabled.
pub fn hinge_terms<T: Scalar>(
    prefs: &[PreferencePair],
    model: &FactorModel<T>,
    include_ties: bool,
) -> Result<Vec<HingeTerm<T>>> {
    let mut out = Vec::with_capacity(prefs.len());
    for p in prefs {
        if p.relation == Relation::Tie && !include_ties {
            continue;
        }
        let hi = model.item_or_err(&p.high)?;
        let lo = model.item_or_err(&p.low)?;
        let diff: Vec<T> = hi.iter().zip(lo).map(|(&a, &b)| a - b).collect();
        if p.relation == Relation::Tie {
            out.push(HingeTerm {
                diff: diff.iter().map(|&v| -v).collect(),
                margin: T::zero(),
            });
        }
        out.push(HingeTerm {
            diff,
            margin: T::lit(p.relation.margin()),
        });
    }
    Ok(out)
}

/// `1/2 |w|^2 + C * sum max(0, margin - w . diff)`.
pub fn svm_objective<T: Scalar>(w: &[T], terms: &[HingeTerm<T>], c: T) -> T {
    let hinge: T = terms
        .iter()
        .map(|t| (t.margin - dot(w, &t.diff)).max(T::zero()))
        .sum();
    T::lit(0.5) * dot(w, w) + c * hinge
}

/// Trains the SWD ranking SVM by dual coordinate descent (seeded pass order).
pub fn train_swd<T: Scalar>(
    attribute_id: &str,
    prefs: &[PreferencePair],
    model: &FactorModel<T>,
    cfg: &RankSvmConfig<T>,
) -> Result<(LinearAttributeModel<T>, SolverReport<T>)> {
    if !(cfg.c > T::zero()) {
        return Err(Error::InvalidArgument("C must be positive".into()));
    }
    if !prefs.iter().any(|p| p.relation != Relation::Tie) {
        return Err(Error::NoPreferences(attribute_id.to_string()));
    }
    let terms = hinge_terms(prefs, model, cfg.include_ties)?;
    let d = model.dim();
    let c = cfg.c;
    let sq: Vec<T> = terms.iter().map(|t| dot(&t.diff, &t.diff)).collect();
    let mut alpha = vec![T::zero(); terms.len()];
    let mut w = vec![T::zero(); d];
    let mut best_w = w.clone();
    let mut best_obj = svm_objective(&w, &terms, c);
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..terms.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        order.shuffle(&mut rng);
        let mut violation = T::zero();
        for &i in &order {
            let t = &terms[i];
            let g = dot(&w, &t.diff) - t.margin;
            let pg = if alpha[i] == T::zero() {
                g.min(T::zero())
            } else if alpha[i] == c {
                g.max(T::zero())
            } else {
                g
            };
            violation = violation.max(pg.abs());
            if pg == T::zero() {
                continue;
            }
            let next = if sq[i] > T::zero() {
                (alpha[i] - g / sq[i]).max(T::zero()).min(c)
            } else if g < T::zero() {
                // An unsatisfiable constraint on identical items; its slack is fixed.
                c
            } else {
                T::zero()
            };
            let delta = next - alpha[i];
            if delta != T::zero() {
                for (wi, &di) in w.iter_mut().zip(&t.diff) {
                    *wi += delta * di;
                }
                alpha[i] = next;
            }
        }
        let obj = svm_objective(&w, &terms, c);
        if !obj.is_finite() {
            return Err(Error::Diverged);
        }
        if obj <= best_obj {
            best_obj = obj;
            best_w.copy_from_slice(&w);
        }
        trace.push(best_obj);
        if violation < cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok((
        LinearAttributeModel {
            attribute_id: attribute_id.to_string(),
            w: best_w,
            bias: T::zero(),
            kind: LinearKind::Swd,
        },
        SolverReport {
            iterations,
            converged,
            objective_trace: trace,
            final_objective: best_obj,
        },
    ))
}
