//! Append-only JSONL event log.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use softattr::corpus::{ItemId, Judgment};
use softattr::tasksampler::AnnotationTask;

use crate::error::LogError;
use crate::state::Stage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        rater_id: String,
    },
    SeenSubmitted {
        session_id: String,
        items: Vec<ItemId>,
        /// Stage after the submission, so replay does not depend on the configured minimum.
        stage: Stage,
    },
    TaskServed {
        session_id: String,
        task: AnnotationTask,
    },
    JudgmentSubmitted {
        session_id: String,
        task_id: String,
        judgment: Judgment,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    /// RFC 3339, UTC.
    pub at: String,
    pub event: Event,
}

/// The log file plus an in-memory copy of every record.
#[derive(Debug)]
pub struct EventLog {
    path: Option<PathBuf>,
    file: Option<File>,
    records: Vec<LogRecord>,
}

impl EventLog {
    /// A log that is never written to disk.
    pub fn in_memory() -> Self {
        Self {
            path: None,
            file: None,
            records: Vec::new(),
        }
    }

    /// Opens (creating if needed) the log at `path` and reads back existing records.
    pub fn open(path: &Path) -> Result<Self, LogError> {
        let io = |source| LogError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let mut records: Vec<LogRecord> = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: LogRecord = serde_json::from_str(&line).map_err(|e| LogError::Corrupt {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                if let Some(prev) = records.last() {
                    if rec.seq <= prev.seq {
                        return Err(LogError::Corrupt {
                            line: i + 1,
                            message: format!("sequence {} does not follow {}", rec.seq, prev.seq),
                        });
                    }
                }
                records.push(rec);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(Self {
            path: Some(path.to_path_buf()),
            file: Some(file),
            records,
        })
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn next_seq(&self) -> u64 {
        self.records.last().map_or(1, |r| r.seq + 1)
    }

    /// Writes one record as a single line and syncs it before returning.
    pub fn append(&mut self, event: Event, at: String) -> Result<&LogRecord, LogError> {
        let rec = LogRecord {
            seq: self.next_seq(),
            at,
            event,
        };
        if let Some(f) = self.file.as_mut() {
            let mut line = serde_json::to_string(&rec).expect("log records serialize");
            line.push('\n');
            let path = self.path.clone().unwrap_or_default();
            f.write_all(line.as_bytes())
                .and_then(|_| f.sync_data())
                .map_err(|source| LogError::Io { path, source })?;
        }
        self.records.push(rec);
        Ok(self.records.last().expect("just pushed"))
    }
}
