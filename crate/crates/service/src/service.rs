//! Annotation protocol operations over the event-sourced state.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Mutex, MutexGuard};

use chrono::{SecondsFormat, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use softattr::corpus::{infer_preferences, Item, ItemCatalog, ItemId, Judgment, Relation};
use softattr::tasksampler::{generate_task, schedule_attributes, AnnotationTask, SeenSet, DEFAULT_BINS};

use crate::error::{ApiError, LogError};
use crate::events::{Event, EventLog, LogRecord};
use crate::rankings::AttributeRankings;
use crate::state::{ServiceState, Session, Stage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Seen items needed before Stage 2 starts.
    pub min_seen: usize,
    pub seed: u64,
    pub bins: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            min_seen: 11,
            seed: 0,
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub rater_id: String,
    pub created_at: String,
    pub stage: Stage,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        Self {
            session_id: s.session_id.clone(),
            rater_id: s.rater_id.clone(),
            created_at: s.created_at.clone(),
            stage: s.stage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeenStatus {
    Accepted,
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeenAck {
    pub status: SeenStatus,
    pub stage: Stage,
    pub seen: usize,
    pub minimum: usize,
}

/// A served task with what the board needs to render it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskView {
    #[serde(flatten)]
    pub task: AnnotationTask,
    pub phrase: String,
    pub titles: BTreeMap<ItemId, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentSubmission {
    pub task_id: String,
    #[serde(default)]
    pub less: Vec<ItemId>,
    #[serde(default)]
    pub same: Vec<ItemId>,
    #[serde(default)]
    pub more: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentAck {
    pub seq: u64,
    pub task_id: String,
    pub judged: usize,
    pub remaining_attributes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    pub rater_id: Option<String>,
    pub attribute: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemsPage {
    pub total: usize,
    pub offset: usize,
    pub items: Vec<Item>,
}

/// Preference totals over the stored judgments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTotals {
    pub preferences: usize,
    pub ties: usize,
}

struct Inner {
    state: ServiceState,
    log: EventLog,
}

pub struct AnnotationService {
    config: ServiceConfig,
    catalog: ItemCatalog,
    rankings: BTreeMap<String, AttributeRankings>,
    inner: Mutex<Inner>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn token() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

impl AnnotationService {
    /// Rebuilds state from whatever `log` already holds.
    pub fn new(
        config: ServiceConfig,
        catalog: ItemCatalog,
        rankings: Vec<AttributeRankings>,
        log: EventLog,
    ) -> Result<Self, LogError> {
        let state = ServiceState::replay(log.records())?;
        Ok(Self {
            config,
            catalog,
            rankings: rankings
                .into_iter()
                .map(|r| (r.attribute.id.clone(), r))
                .collect(),
            inner: Mutex::new(Inner { state, log }),
        })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // A panic mid-operation never leaves a half-applied event, so poisoning is recoverable.
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn catalog(&self) -> &ItemCatalog {
        &self.catalog
    }

    pub fn state(&self) -> ServiceState {
        self.lock().state.clone()
    }

    pub fn log_records(&self) -> Vec<LogRecord> {
        self.lock().log.records().to_vec()
    }

    fn commit(inner: &mut Inner, event: Event) -> Result<u64, ApiError> {
        let rec = inner.log.append(event, now())?.clone();
        inner.state.apply(&rec)?;
        Ok(rec.seq)
    }

    fn session<'a>(state: &'a ServiceState, id: &str) -> Result<&'a Session, ApiError> {
        state
            .sessions
            .get(id)
            .ok_or_else(|| ApiError::not_found("unknown_session", format!("no session `{id}`")))
    }

    pub fn create_session(&self, rater_id: &str) -> Result<SessionView, ApiError> {
        let rater_id = rater_id.trim();
        if rater_id.is_empty() {
            return Err(ApiError::bad_request("invalid_rater", "rater_id must be non-empty", json!({})));
        }
        let mut inner = self.lock();
        let session_id = token();
        Self::commit(
            &mut inner,
            Event::SessionCreated {
                session_id: session_id.clone(),
                rater_id: rater_id.to_string(),
            },
        )?;
        Ok(SessionView::from(&inner.state.sessions[&session_id]))
    }

    pub fn items_page(&self, offset: usize, limit: usize) -> ItemsPage {
        ItemsPage {
            total: self.catalog.len(),
            offset,
            items: self.catalog.iter().skip(offset).take(limit).cloned().collect(),
        }
    }

    pub fn submit_seen(&self, session_id: &str, items: &[ItemId]) -> Result<SeenAck, ApiError> {
        let mut inner = self.lock();
        let session = Self::session(&inner.state, session_id)?;
        if session.stage != Stage::SeenSelection {
            return Err(ApiError::conflict(
                "wrong_stage",
                "seen items were already accepted for this session",
                json!({ "stage": session.stage }),
            ));
        }
        let unknown: BTreeSet<&str> = items
            .iter()
            .filter(|i| !self.catalog.contains(i))
            .map(String::as_str)
            .collect();
        if !unknown.is_empty() {
            return Err(ApiError::bad_request(
                "unknown_items",
                format!("{} unknown item id(s)", unknown.len()),
                json!({ "items": unknown }),
            ));
        }
        let set: BTreeSet<ItemId> = items.iter().cloned().collect();
        let stage = if set.len() >= self.config.min_seen {
            Stage::Judging
        } else {
            Stage::SeenSelection
        };
        let seen = set.len();
        Self::commit(
            &mut inner,
            Event::SeenSubmitted {
                session_id: session_id.to_string(),
                items: set.into_iter().collect(),
                stage,
            },
        )?;
        Ok(SeenAck {
            status: if stage == Stage::Judging {
                SeenStatus::Accepted
            } else {
                SeenStatus::Insufficient
            },
            stage,
            seen,
            minimum: self.config.min_seen,
        })
    }

    fn view(&self, task: &AnnotationTask) -> TaskView {
        let titles = std::iter::once(&task.anchor)
            .chain(&task.candidates)
            .filter_map(|id| self.catalog.get(id).map(|it| (id.clone(), it.title.clone())))
            .collect();
        TaskView {
            phrase: self
                .rankings
                .get(&task.attribute_id)
                .map_or_else(|| task.attribute_id.clone(), |r| r.attribute.phrase.clone()),
            task: task.clone(),
            titles,
        }
    }

    /// The session's open task, or a freshly sampled one for the least-judged attribute.
    pub fn next_task(&self, session_id: &str) -> Result<TaskView, ApiError> {
        let mut inner = self.lock();
        let session = Self::session(&inner.state, session_id)?;
        if session.stage != Stage::Judging {
            return Err(ApiError::conflict(
                "wrong_stage",
                "submit seen items first",
                json!({ "stage": session.stage }),
            ));
        }
        if let Some(open) = &session.open_task {
            return Ok(self.view(&inner.state.tasks[open]));
        }

        let pending: Vec<&str> = self
            .rankings
            .keys()
            .map(String::as_str)
            .filter(|a| !session.judged_attributes.contains(*a))
            .collect();
        if pending.is_empty() {
            return Err(ApiError::conflict(
                "no_task",
                "every attribute has been judged by this rater",
                json!({ "reasons": {} }),
            ));
        }
        let counts: HashMap<String, usize> = inner
            .state
            .judgment_counts
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        let seen_counts: HashMap<ItemId, u64> = inner
            .state
            .seen_counts
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        let seen = SeenSet::new(session.rater_id.clone(), session.seen.iter().cloned());
        let seq = inner.log.next_seq();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ seq.wrapping_mul(0x9E37_79B9_7F4A_7C15));

        let mut reasons = BTreeMap::new();
        let mut draw = None;
        for attr in schedule_attributes(pending, &counts) {
            let r = &self.rankings[attr];
            match generate_task(&seen, &r.ic, &r.rc, &seen_counts, self.config.bins, &mut rng) {
                Ok(d) => {
                    draw = Some((attr.to_string(), d));
                    break;
                }
                Err(e) => {
                    reasons.insert(attr.to_string(), e.to_string());
                }
            }
        }
        let Some((attribute_id, d)) = draw else {
            return Err(ApiError::conflict(
                "no_task",
                "no task can be generated from this rater's seen items",
                json!({ "reasons": reasons }),
            ));
        };
        let task = AnnotationTask {
            task_id: token(),
            rater_id: session.rater_id.clone(),
            attribute_id,
            anchor: d.anchor,
            candidates: d.candidates,
            created_at: now(),
        };
        Self::commit(
            &mut inner,
            Event::TaskServed {
                session_id: session_id.to_string(),
                task: task.clone(),
            },
        )?;
        Ok(self.view(&task))
    }

    pub fn submit_judgment(
        &self,
        session_id: &str,
        sub: &JudgmentSubmission,
    ) -> Result<JudgmentAck, ApiError> {
        let mut inner = self.lock();
        let session = Self::session(&inner.state, session_id)?;
        if session.stage != Stage::Judging {
            return Err(ApiError::conflict("wrong_stage", "no task has been served", json!({})));
        }
        if session.open_task.as_deref() != Some(sub.task_id.as_str()) {
            return Err(ApiError::not_found(
                "unknown_task",
                format!("task `{}` is not open for this session", sub.task_id),
            ));
        }
        let task = &inner.state.tasks[&sub.task_id];
        check_partition(task, sub)?;

        let judgment = Judgment {
            rater_id: session.rater_id.clone(),
            attribute: task.attribute_id.clone(),
            anchor: task.anchor.clone(),
            less: sub.less.clone(),
            same: sub.same.clone(),
            more: sub.more.clone(),
            seq: inner.state.judgments.len(),
        };
        judgment
            .validate(Some(&self.catalog))
            .map_err(|e| ApiError::bad_request("invalid_judgment", e.to_string(), json!({})))?;
        let seq = Self::commit(
            &mut inner,
            Event::JudgmentSubmitted {
                session_id: session_id.to_string(),
                task_id: sub.task_id.clone(),
                judgment,
            },
        )?;
        let session = &inner.state.sessions[session_id];
        Ok(JudgmentAck {
            seq,
            task_id: sub.task_id.clone(),
            judged: session.judged_attributes.len(),
            remaining_attributes: self
                .rankings
                .keys()
                .filter(|a| !session.judged_attributes.contains(*a))
                .count(),
        })
    }

    /// Matching judgments as `judgments.jsonl` lines, in submission order.
    pub fn export_judgments(&self, filter: &ExportFilter) -> String {
        let inner = self.lock();
        let mut out = String::new();
        for r in &inner.state.judgments {
            let j = &r.judgment;
            if filter.rater_id.as_ref().is_some_and(|x| *x != j.rater_id)
                || filter.attribute.as_ref().is_some_and(|x| *x != j.attribute)
            {
                continue;
            }
            out.push_str(&j.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn pair_totals(&self) -> PairTotals {
        let inner = self.lock();
        let mut t = PairTotals::default();
        for r in &inner.state.judgments {
            for p in infer_preferences(&r.judgment) {
                t.preferences += 1;
                t.ties += usize::from(p.relation == Relation::Tie);
            }
        }
        t
    }
}

/// Accepts the buckets only if they partition the task's candidates exactly.
pub fn check_partition(task: &AnnotationTask, sub: &JudgmentSubmission) -> Result<(), ApiError> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut dupes: BTreeSet<&str> = BTreeSet::new();
    for id in sub.less.iter().chain(&sub.same).chain(&sub.more) {
        if !seen.insert(id) {
            dupes.insert(id);
        }
    }
    if !dupes.is_empty() {
        return Err(ApiError::bad_request(
            "duplicate_items",
            "items placed in more than one bucket position",
            json!({ "items": dupes }),
        ));
    }
    if seen.contains(task.anchor.as_str()) {
        return Err(ApiError::bad_request(
            "anchor_in_bucket",
            "the anchor is the reference item and cannot be bucketed",
            json!({ "items": [task.anchor] }),
        ));
    }
    let candidates: HashSet<&str> = task.candidates.iter().map(String::as_str).collect();
    let extra: BTreeSet<&str> = seen.difference(&candidates).copied().collect();
    if !extra.is_empty() {
        return Err(ApiError::bad_request(
            "extra_items",
            "items that were not served as candidates",
            json!({ "items": extra }),
        ));
    }
    let missing: BTreeSet<&str> = candidates.difference(&seen).copied().collect();
    if !missing.is_empty() {
        return Err(ApiError::bad_request(
            "missing_items",
            "every candidate must be placed in a bucket",
            json!({ "items": missing }),
        ));
    }
    Ok(())
}
