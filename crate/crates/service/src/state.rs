//! Service state as a pure fold over the event log.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use softattr::corpus::{ItemId, Judgment};
use softattr::tasksampler::AnnotationTask;

use crate::error::LogError;
use crate::events::{Event, LogRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    SeenSelection,
    Judging,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub rater_id: String,
    pub created_at: String,
    pub stage: Stage,
    pub seen: BTreeSet<ItemId>,
    /// Served and not yet judged.
    pub open_task: Option<String>,
    pub judged_attributes: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub judgment: Judgment,
    pub task_id: String,
    pub session_id: String,
    pub submitted_at: String,
    /// Log sequence number of the submission.
    pub seq: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServiceState {
    pub sessions: BTreeMap<String, Session>,
    pub tasks: BTreeMap<String, AnnotationTask>,
    pub judgments: Vec<JudgmentRecord>,
    pub seen_counts: BTreeMap<ItemId, u64>,
    pub judgment_counts: BTreeMap<String, usize>,
    pub last_seq: u64,
}

impl ServiceState {
    pub fn replay<'a>(records: impl IntoIterator<Item = &'a LogRecord>) -> Result<Self, LogError> {
        let mut s = Self::default();
        for r in records {
            s.apply(r)?;
        }
        Ok(s)
    }

    /// Applies one record. Events are validated before they are logged, so a
    /// failure here means the log itself is inconsistent.
    pub fn apply(&mut self, rec: &LogRecord) -> Result<(), LogError> {
        let fail = |message: String| LogError::Replay {
            seq: rec.seq,
            message,
        };
        if rec.seq <= self.last_seq {
            return Err(fail(format!("sequence after {}", self.last_seq)));
        }
        match &rec.event {
            Event::SessionCreated {
                session_id,
                rater_id,
            } => {
                if self.sessions.contains_key(session_id) {
                    return Err(fail(format!("duplicate session {session_id}")));
                }
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        session_id: session_id.clone(),
                        rater_id: rater_id.clone(),
                        created_at: rec.at.clone(),
                        stage: Stage::SeenSelection,
                        seen: BTreeSet::new(),
                        open_task: None,
                        judged_attributes: BTreeSet::new(),
                    },
                );
            }
            Event::SeenSubmitted {
                session_id,
                items,
                stage,
            } => {
                let session = self
                    .sessions
                    .get_mut(session_id)
                    .ok_or_else(|| fail(format!("unknown session {session_id}")))?;
                for old in std::mem::take(&mut session.seen) {
                    let c = self.seen_counts.get_mut(&old).expect("counted earlier");
                    *c -= 1;
                    if *c == 0 {
                        self.seen_counts.remove(&old);
                    }
                }
                session.seen = items.iter().cloned().collect();
                for item in &session.seen {
                    *self.seen_counts.entry(item.clone()).or_default() += 1;
                }
                session.stage = *stage;
            }
            Event::TaskServed { session_id, task } => {
                let session = self
                    .sessions
                    .get_mut(session_id)
                    .ok_or_else(|| fail(format!("unknown session {session_id}")))?;
                session.open_task = Some(task.task_id.clone());
                self.tasks.insert(task.task_id.clone(), task.clone());
            }
            Event::JudgmentSubmitted {
                session_id,
                task_id,
                judgment,
            } => {
                let session = self
                    .sessions
                    .get_mut(session_id)
                    .ok_or_else(|| fail(format!("unknown session {session_id}")))?;
                if session.open_task.as_deref() != Some(task_id.as_str()) {
                    return Err(fail(format!("task {task_id} is not open")));
                }
                session.open_task = None;
                session.judged_attributes.insert(judgment.attribute.clone());
                *self
                    .judgment_counts
                    .entry(judgment.attribute.clone())
                    .or_default() += 1;
                let mut judgment = judgment.clone();
                judgment.seq = self.judgments.len();
                self.judgments.push(JudgmentRecord {
                    judgment,
                    task_id: task_id.clone(),
                    session_id: session_id.clone(),
                    submitted_at: rec.at.clone(),
                    seq: rec.seq,
                });
            }
        }
        self.last_seq = rec.seq;
        Ok(())
    }
}
