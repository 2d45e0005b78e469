use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use softattr::corpus::{build_tag_collection, infer_all, Corpus, Judgment, Relation, SoftAttribute};
use softattr::embeddings::{train_mf_detailed, FactorModel};
use softattr::eval::{
    agreement_table, assign_groups, bucket_distribution, crossval_swd, gamma_counts, learning_curve,
    mean_weighted_gamma, AgreementStats, CurvePoint, ReportRow,
};
use softattr::pipeline::{Method, MethodParams, ScoringContext, TermIndexes};
use softattr::synth::{SyntheticConfig, SyntheticCorpus};
use softattr::tasksampler::{generate_task, schedule_attributes, SeenSet};
use softattr::textrank::ScoredList;
use softattr_service::{
    compute_rankings, load_rankings, router, save_rankings, AnnotationService, EventLog, ServiceConfig,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::Outputs;
use crate::workspace::Workspace;

/// Per-attribute failures that are reported and skipped rather than aborting the run.
fn skippable(e: &softattr::Error) -> bool {
    use softattr::Error::*;
    matches!(
        e,
        NoTextualEvidence(_) | InsufficientEvidence(_) | NoPreferences(_) | UndefinedMetric(_) | Sampler(_)
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SkipNote {
    pub attribute: String,
    pub method: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    /// Mean over attributes with a defined value.
    pub mean: Option<f64>,
    pub attributes_used: usize,
    pub attributes_skipped: usize,
    pub n_pairs: u64,
    pub judgments_skipped: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub command: String,
    pub metric: String,
    pub config: RunConfig,
    pub methods: Vec<MethodSummary>,
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<SkipNote>,
}

impl EvalSummary {
    fn new(command: &str, metric: &str, cfg: &RunConfig) -> Self {
        Self {
            command: command.into(),
            metric: metric.into(),
            config: cfg.clone(),
            methods: Vec::new(),
            rows: Vec::new(),
            skipped: Vec::new(),
        }
    }

    /// Adds one method's per-attribute rows and its mean row.
    fn push_method(&mut self, method: Method, rows: Vec<ReportRow>, skips: Vec<SkipNote>) {
        let values: Vec<f64> = rows.iter().filter_map(|r| r.value).collect();
        let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        let summary = MethodSummary {
            method: method.to_string(),
            mean,
            attributes_used: values.len(),
            attributes_skipped: rows.len() - values.len(),
            n_pairs: rows.iter().map(|r| r.n_pairs).sum(),
            judgments_skipped: rows.iter().map(|r| r.n_skipped).sum(),
        };
        self.rows.extend(rows);
        self.rows.push(ReportRow {
            attribute: "(mean)".into(),
            method: method.to_string(),
            metric: self.metric.clone(),
            value: mean,
            n_pairs: summary.n_pairs,
            n_skipped: summary.attributes_skipped as u64,
        });
        self.methods.push(summary);
        self.skipped.extend(skips);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<8} {:>8} {:>6} {:>6} {:>10}", "method", self.metric, "attrs", "skip", "pairs");
        for m in &self.methods {
            let v = m.mean.map_or("n/a".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                s,
                "{:<8} {:>8} {:>6} {:>6} {:>10}",
                m.method, v, m.attributes_used, m.attributes_skipped, m.n_pairs
            );
        }
        s
    }
}

fn row(attribute: &str, method: Method, metric: &str, value: Option<f64>, n_pairs: u64, n_skipped: u64) -> ReportRow {
    ReportRow {
        attribute: attribute.to_string(),
        method: method.to_string(),
        metric: metric.to_string(),
        value,
        n_pairs,
        n_skipped,
    }
}

fn check_methods(methods: &[Method], has_judgments: bool) -> Result<()> {
    if methods.contains(&Method::Swd) && !has_judgments {
        return Err(CliError::Usage("method swd requires judgments.jsonl".into()));
    }
    Ok(())
}

fn needs_model(methods: &[Method]) -> bool {
    methods.iter().any(|m| m.needs_embeddings())
}

struct Scoring<'a> {
    corpus: &'a Corpus,
    indexes: TermIndexes,
    model: Option<FactorModel<f64>>,
    params: MethodParams<f64>,
}

impl<'a> Scoring<'a> {
    fn new(ws: &Workspace, corpus: &'a Corpus, methods: &[Method]) -> Result<Self> {
        Ok(Self {
            corpus,
            indexes: TermIndexes::build(&corpus.reviews),
            model: if needs_model(methods) { Some(ws.model()?) } else { None },
            params: ws.cfg.method_params(),
        })
    }

    fn ctx(&self) -> ScoringContext<'_, f64> {
        ScoringContext {
            catalog: &self.corpus.catalog,
            indexes: &self.indexes,
            model: self.model.as_ref(),
            params: &self.params,
        }
    }
}

pub fn ingest(ws: &Workspace) -> Result<String> {
    #[derive(Serialize)]
    struct IngestSummary {
        items: usize,
        reviews: usize,
        ratings: usize,
        tag_rows: usize,
        judgments: Option<usize>,
        preferences: Option<usize>,
        ties: Option<usize>,
        attributes: Option<usize>,
    }
    let corpus = ws.corpus()?;
    let mut summary = IngestSummary {
        items: corpus.catalog.len(),
        reviews: corpus.reviews.len(),
        ratings: corpus.ratings.len(),
        tag_rows: corpus.tags.rows.len(),
        judgments: None,
        preferences: None,
        ties: None,
        attributes: None,
    };
    if ws.has_judgments() {
        let js = ws.judgments(&corpus)?;
        let prefs = infer_all(&js);
        summary.judgments = Some(js.len());
        summary.preferences = Some(prefs.len());
        summary.ties = Some(prefs.iter().filter(|p| p.relation == Relation::Tie).count());
        summary.attributes = Some(ws.attributes(Some(&js))?.len());
    }
    let mut out = Outputs::new();
    out.json(&ws.artifact("ingest.json"), &summary)?;
    out.commit()?;
    Ok(serde_json::to_string_pretty(&summary).map_err(softattr::Error::from)? + "\n")
}

pub fn index(ws: &Workspace) -> Result<String> {
    let corpus = ws.corpus()?;
    let idx = TermIndexes::build(&corpus.reviews);
    let mut out = Outputs::new();
    out.file(&ws.artifact("index_items.json"), |p| Ok(idx.items.save(p)?))?;
    out.file(&ws.artifact("index_reviews.json"), |p| Ok(idx.reviews.save(p)?))?;
    out.commit()?;
    Ok(format!(
        "item index: {} docs, {} terms\nreview index: {} docs, {} terms\n",
        idx.items.doc_count(),
        idx.items.vocabulary_size(),
        idx.reviews.doc_count(),
        idx.reviews.vocabulary_size()
    ))
}

pub fn embed(ws: &Workspace) -> Result<String> {
    #[derive(Serialize)]
    struct EmbedSummary {
        config: RunConfig,
        users: usize,
        items: usize,
        rmse: Vec<f64>,
        objective: Vec<f64>,
    }
    let corpus = ws.corpus()?;
    let all_items: Vec<String> = corpus.catalog.ids().map(str::to_string).collect();
    let (model, hist) = train_mf_detailed(&corpus.ratings, &ws.cfg.train_config(), &[], &all_items)?;
    let summary = EmbedSummary {
        config: ws.cfg.clone(),
        users: model.user_ids().len(),
        items: model.item_ids().len(),
        rmse: hist.rmse.clone(),
        objective: hist.objective.clone(),
    };
    let mut out = Outputs::new();
    out.bytes(&ws.artifact("model.json"), model.to_json().as_bytes())?;
    out.json(&ws.artifact("embed.json"), &summary)?;
    out.commit()?;
    Ok(format!(
        "trained {} users x {} items, d={}; training RMSE {:.4} -> {:.4}\n",
        summary.users,
        summary.items,
        model.dim(),
        hist.rmse[0],
        hist.rmse[hist.rmse.len() - 1]
    ))
}

pub fn score(ws: &Workspace, method: Method, attribute: &str, output: Option<PathBuf>) -> Result<String> {
    #[derive(Serialize)]
    struct ScoreRow<'a> {
        rank: usize,
        item_id: &'a str,
        score: f64,
    }
    let corpus = ws.corpus()?;
    check_methods(&[method], ws.has_judgments())?;
    let judgments = if method.needs_judgments() { ws.judgments(&corpus)? } else { Vec::new() };
    let scoring = Scoring::new(ws, &corpus, &[method])?;
    let refs: Vec<&Judgment> = judgments.iter().collect();
    let list = scoring.ctx().rank(method, &SoftAttribute::new(attribute), &refs)?;
    let rows: Vec<ScoreRow> = list
        .entries
        .iter()
        .enumerate()
        .map(|(i, (id, s))| ScoreRow { rank: i + 1, item_id: id, score: *s })
        .collect();
    let path = output.unwrap_or_else(|| ws.artifact(&format!("scores_{method}_{}.csv", slug(attribute))));
    let mut out = Outputs::new();
    out.csv(&path, &rows)?;
    out.commit()?;
    let mut s = String::new();
    for r in rows.iter().take(10) {
        let _ = writeln!(s, "{:>4} {:<20} {:.6}", r.rank, r.item_id, r.score);
    }
    let _ = writeln!(s, "wrote {} rows to {}", rows.len(), path.display());
    Ok(s)
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

fn write_eval(ws: &Workspace, name: &str, summary: &EvalSummary) -> Result<()> {
    let mut out = Outputs::new();
    out.report_csv(&ws.artifact(&format!("{name}.csv")), &summary.rows)?;
    out.json(&ws.artifact(&format!("{name}.json")), summary)?;
    out.commit()?;
    Ok(())
}

/// Binary tag collection evaluation: gamma of each method's ranking per tag.
pub fn eval_movielens(ws: &Workspace, methods: &[Method]) -> Result<String> {
    let corpus = ws.corpus()?;
    check_methods(methods, ws.has_judgments())?;
    let judgments = if methods.contains(&Method::Swd) { ws.judgments(&corpus)? } else { Vec::new() };
    let collection = build_tag_collection(&corpus.tags, ws.cfg.alpha, ws.cfg.min_taggers)?;
    let scoring = Scoring::new(ws, &corpus, methods)?;
    let ctx = scoring.ctx();
    let tags: Vec<(&String, Vec<&str>, Vec<&str>)> = collection
        .attributes
        .iter()
        .map(|(t, a)| (t, a.positives.iter().map(String::as_str).collect(), a.negatives.iter().map(String::as_str).collect()))
        .collect();

    let mut summary = EvalSummary::new("eval-movielens", "gamma", &ws.cfg);
    for &method in methods {
        let results: Vec<Result<(ReportRow, Option<SkipNote>)>> = tags
            .par_iter()
            .map(|(tag, pos, neg)| {
                let skip = |reason: String| {
                    let note = SkipNote { attribute: tag.to_string(), method: method.to_string(), reason };
                    Ok((row(tag, method, "gamma", None, 0, 1), Some(note)))
                };
                if pos.is_empty() || neg.is_empty() {
                    return skip("empty positive or negative set".into());
                }
                let attr = SoftAttribute::new(tag.as_str());
                let refs: Vec<&Judgment> = judgments.iter().filter(|j| j.attribute == attr.id).collect();
                let list = match ctx.rank(method, &attr, &refs) {
                    Ok(l) => l,
                    Err(e) if skippable(&e) => return skip(e.to_string()),
                    Err(e) => return Err(e.into()),
                };
                let counts = gamma_counts(&list.to_map(), pos, neg)?;
                match counts.gamma() {
                    Some(g) => Ok((row(tag, method, "gamma", Some(g), counts.ns + counts.nd, 0), None)),
                    None => skip("every pair is score-tied".into()),
                }
            })
            .collect();
        let mut rows = Vec::new();
        let mut skips = Vec::new();
        for r in results {
            let (row, skip) = r?;
            rows.push(row);
            skips.extend(skip);
        }
        summary.push_method(method, rows, skips);
    }
    write_eval(ws, "eval_movielens", &summary)?;
    Ok(format!("{} tag attributes, {} items in collection\n{}", tags.len(), collection.items.len(), summary.render()))
}

/// Judgment-based evaluation: mean weighted gamma per method; SWD is cross-validated by rater.
pub fn eval_softattr(ws: &Workspace, methods: &[Method]) -> Result<String> {
    let corpus = ws.corpus()?;
    let judgments = ws.judgments(&corpus)?;
    let attrs = ws.attributes(Some(&judgments))?;
    let scoring = Scoring::new(ws, &corpus, methods)?;
    let ctx = scoring.ctx();
    let mut by_attr: BTreeMap<&str, Vec<&Judgment>> = BTreeMap::new();
    for j in &judgments {
        by_attr.entry(j.attribute.as_str()).or_default().push(j);
    }

    let mut summary = EvalSummary::new("eval-softattr", "gprime", &ws.cfg);
    for &method in methods {
        let mut rows = Vec::new();
        let mut skips = Vec::new();
        if method == Method::Swd {
            let model = scoring.model.as_ref().expect("swd loads the model");
            let cv = crossval_swd(&judgments, model, &scoring.params.svm, &ws.cfg.cv_config())?;
            for a in &cv.per_attribute {
                rows.push(row(&a.attribute, method, "gprime", a.mean_gprime, a.decided_pairs, a.judgments_skipped as u64));
            }
            for s in &cv.skipped {
                skips.push(SkipNote {
                    attribute: s.attribute.clone(),
                    method: format!("{method} fold {}", s.fold),
                    reason: s.reason.clone(),
                });
            }
        } else {
            let results: Vec<Result<(ReportRow, Option<SkipNote>)>> = attrs
                .par_iter()
                .map(|attr| {
                    let js = by_attr.get(attr.id.as_str()).map(Vec::as_slice).unwrap_or_default();
                    let skip = |reason: String| {
                        let note = SkipNote { attribute: attr.id.clone(), method: method.to_string(), reason };
                        Ok((row(&attr.id, method, "gprime", None, 0, js.len() as u64), Some(note)))
                    };
                    if js.is_empty() {
                        return skip("no judgments".into());
                    }
                    let list = match ctx.rank(method, attr, &[]) {
                        Ok(l) => l,
                        Err(e) if skippable(&e) => return skip(e.to_string()),
                        Err(e) => return Err(e.into()),
                    };
                    match mean_weighted_gamma(&list.to_map(), js.iter().copied(), ws.cfg.aggregation) {
                        Ok(m) => Ok((
                            row(&attr.id, method, "gprime", Some(m.mean), m.decided_pairs, m.judgments_skipped as u64),
                            None,
                        )),
                        Err(e) if skippable(&e) => skip(e.to_string()),
                        Err(e) => Err(e.into()),
                    }
                })
                .collect();
            for r in results {
                let (row, skip) = r?;
                rows.push(row);
                skips.extend(skip);
            }
        }
        summary.push_method(method, rows, skips);
    }
    write_eval(ws, "eval_softattr", &summary)?;
    Ok(format!("{} judgments, {} attributes\n{}", judgments.len(), attrs.len(), summary.render()))
}

pub fn agree(ws: &Workspace) -> Result<String> {
    let corpus = ws.corpus()?;
    let judgments = ws.judgments(&corpus)?;
    let mut table: Vec<AgreementStats> = agreement_table(&judgments);
    assign_groups(&mut table);
    let mut out = Outputs::new();
    out.csv(&ws.artifact("agree.csv"), &table)?;
    out.json(&ws.artifact("agree.json"), &table)?;
    out.commit()?;
    let mut sorted: Vec<&AgreementStats> = table.iter().collect();
    sorted.sort_by(|a, b| b.agree.partial_cmp(&a.agree).unwrap_or(std::cmp::Ordering::Equal));
    let mut s = format!("{:<24} {:>7} {:>7} {:>7} {:>7} {:>7}\n", "attribute", "agree", "group", "pairs", "votes", "ties");
    for a in sorted {
        let v = a.agree.map_or("n/a".into(), |v| format!("{v:.3}"));
        let g = a.group.map_or("-".into(), |g| format!("{g:?}").to_uppercase());
        let _ = writeln!(
            s,
            "{:<24} {:>7} {:>7} {:>7} {:>7} {:>7}",
            a.attribute_id, v, g, a.distinct_pairs, a.total_comparisons, a.tie_count
        );
    }
    Ok(s)
}

pub fn buckets(ws: &Workspace) -> Result<String> {
    #[derive(Serialize)]
    struct BucketRow<'a> {
        attribute: &'a str,
        less: f64,
        same: f64,
        more: f64,
        judgments: usize,
    }
    let corpus = ws.corpus()?;
    let judgments = ws.judgments(&corpus)?;
    let dist = bucket_distribution(&judgments);
    let mut rows: Vec<BucketRow> = dist
        .per_attribute
        .iter()
        .map(|(a, m)| BucketRow { attribute: a, less: m.less, same: m.same, more: m.more, judgments: m.judgments })
        .collect();
    let o = dist.overall;
    rows.push(BucketRow { attribute: "(overall)", less: o.less, same: o.same, more: o.more, judgments: o.judgments });
    let mut out = Outputs::new();
    out.csv(&ws.artifact("buckets.csv"), &rows)?;
    out.json(&ws.artifact("buckets.json"), &dist)?;
    out.commit()?;
    let mut s = format!("{:<24} {:>6} {:>6} {:>6} {:>6}\n", "attribute", "less", "same", "more", "n");
    for r in &rows {
        let _ = writeln!(s, "{:<24} {:>6.2} {:>6.2} {:>6.2} {:>6}", r.attribute, r.less, r.same, r.more, r.judgments);
    }
    Ok(s)
}

pub fn curve(ws: &Workspace, sizes: Option<Vec<usize>>, reps: usize) -> Result<String> {
    #[derive(Serialize)]
    struct CurveSummary {
        config: RunConfig,
        repetitions: usize,
        points: Vec<CurvePoint>,
    }
    let corpus = ws.corpus()?;
    let judgments = ws.judgments(&corpus)?;
    let model = ws.model()?;
    let raters = judgments.iter().map(|j| j.rater_id.as_str()).collect::<std::collections::BTreeSet<_>>().len();
    // Largest training pool any fold can offer.
    let max_train = raters - raters / ws.cfg.folds;
    let sizes = sizes.unwrap_or_else(|| {
        let mut v: Vec<usize> = (1..).map(|i| 5 * i).take_while(|&n| n < max_train).collect();
        v.push(max_train);
        v
    });
    let params = ws.cfg.method_params();
    let points = learning_curve(&judgments, &model, &params.svm, &ws.cfg.cv_config(), &sizes, reps)?;
    let summary = CurveSummary { config: ws.cfg.clone(), repetitions: reps, points };
    let mut out = Outputs::new();
    out.csv(&ws.artifact("curve.csv"), &summary.points)?;
    out.json(&ws.artifact("curve.json"), &summary)?;
    out.commit()?;
    let mut s = format!("{:>8} {:>8}\n", "raters", "gprime");
    for p in &summary.points {
        let v = p.mean_gprime.map_or("n/a".into(), |v| format!("{v:.4}"));
        let _ = writeln!(s, "{:>8} {:>8}", p.train_raters, v);
    }
    Ok(s)
}

fn rankings(ws: &Workspace, corpus: &Corpus) -> Result<Vec<softattr_service::AttributeRankings>> {
    let judgments = if ws.has_judgments() { Some(ws.judgments(corpus)?) } else { None };
    let attrs = ws.attributes(judgments.as_deref())?;
    Ok(compute_rankings(&corpus.catalog, &corpus.reviews, &attrs)?)
}

pub fn sample_tasks(ws: &Workspace, rater: &str, seen: Vec<String>, count: usize, output: Option<PathBuf>) -> Result<String> {
    #[derive(Serialize)]
    struct OfflineTask<'a> {
        rater_id: &'a str,
        attribute: &'a str,
        anchor: String,
        candidates: Vec<String>,
    }
    let corpus = ws.corpus()?;
    if let Some(bad) = seen.iter().find(|id| !corpus.catalog.contains(id)) {
        return Err(CliError::Usage(format!("unknown seen item `{bad}`")));
    }
    let rankings = rankings(ws, &corpus)?;
    let by_id: HashMap<&str, (&ScoredList<f64>, &ScoredList<f64>)> =
        rankings.iter().map(|r| (r.attribute.id.as_str(), (&r.ic, &r.rc))).collect();
    let seen_set = SeenSet::new(rater, seen);
    let seen_counts = corpus.catalog.seen_counts();
    let mut rng = ChaCha8Rng::seed_from_u64(ws.cfg.seed);
    let mut served: HashMap<String, usize> = HashMap::new();
    let mut tasks = Vec::new();
    let mut failures: BTreeMap<String, String> = BTreeMap::new();
    while tasks.len() < count {
        let order = schedule_attributes(by_id.keys().copied().filter(|a| !failures.contains_key(*a)), &served);
        let Some(&attr) = order.first() else { break };
        let (ic, rc) = by_id[attr];
        match generate_task(&seen_set, ic, rc, &seen_counts, ws.cfg.bins, &mut rng) {
            Ok(draw) => {
                *served.entry(attr.to_string()).or_default() += 1;
                tasks.push(OfflineTask { rater_id: rater, attribute: attr, anchor: draw.anchor, candidates: draw.candidates });
            }
            Err(e) if skippable(&e) => {
                failures.insert(attr.to_string(), e.to_string());
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut body = String::new();
    for t in &tasks {
        body.push_str(&serde_json::to_string(t).map_err(softattr::Error::from)?);
        body.push('\n');
    }
    let path = output.unwrap_or_else(|| ws.artifact(&format!("tasks_{}.jsonl", slug(rater))));
    let mut out = Outputs::new();
    out.bytes(&path, body.as_bytes())?;
    out.commit()?;
    let mut s = format!("wrote {} task(s) to {}\n", tasks.len(), path.display());
    for (a, why) in &failures {
        let _ = writeln!(s, "attribute `{a}` skipped: {why}");
    }
    Ok(s)
}

pub fn serve(ws: &Workspace, addr: SocketAddr) -> Result<()> {
    let corpus = ws.corpus()?;
    let out_dir = ws.cfg.out_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let path = ws.artifact("rankings.json");
    let rankings = if path.exists() {
        load_rankings(&path)?
    } else {
        let r = rankings(ws, &corpus)?;
        save_rankings(&path, &r)?;
        r
    };
    let log = EventLog::open(&ws.artifact("events.jsonl"))?;
    let config = ServiceConfig { min_seen: ws.cfg.min_seen, seed: ws.cfg.seed, bins: ws.cfg.bins };
    let service = AnnotationService::new(config, corpus.catalog, rankings, log)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let app = router(Arc::new(service));
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::io(&out_dir, e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Usage(format!("cannot bind {addr}: {e}")))?;
        tracing::info!(%addr, "annotation service listening");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::io(&out_dir, e))
    })
}

pub fn synth(cfg: &RunConfig) -> Result<String> {
    let mut sc = SyntheticConfig { seed: cfg.seed, ..Default::default() };
    sc.world.seed = cfg.seed;
    sc.raters.seed = cfg.seed;
    sc.reviews.seed = cfg.seed;
    let corpus = SyntheticCorpus::generate(&sc)?;
    // Stage into a sibling directory so a failed write leaves no half corpus.
    let target = &cfg.data_dir;
    if target.exists() && std::fs::read_dir(target).map_err(|e| CliError::io(target, e))?.next().is_some() {
        return Err(CliError::Usage(format!("{} exists and is not empty", target.display())));
    }
    let parent = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(|e| CliError::io(&parent, e))?;
    let staging = tempfile::tempdir_in(&parent).map_err(|e| CliError::io(&parent, e))?;
    corpus.write_to_dir(staging.path())?;
    if target.exists() {
        std::fs::remove_dir(target).map_err(|e| CliError::io(target, e))?;
    }
    let staged = staging.keep();
    std::fs::rename(&staged, target).map_err(|e| {
        let _ = std::fs::remove_dir_all(&staged);
        CliError::io(target, e)
    })?;
    Ok(format!(
        "wrote synthetic corpus to {}: {} items, {} ratings, {} reviews, {} judgments\n",
        target.display(),
        corpus.catalog.len(),
        corpus.world.ratings.len(),
        corpus.reviews.len(),
        corpus.judgments.len()
    ))
}
