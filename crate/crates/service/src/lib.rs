//! Two-stage annotation service: raters mark the items they have seen, then
//! sort sampled candidates into less/same/more buckets around an anchor.
//!
//! Every state change is an event appended to a JSONL log; the in-memory state
//! is a fold over that log and can be rebuilt from it at any time.

pub mod api;
mod error;
pub mod events;
pub mod rankings;
pub mod service;
pub mod state;

pub use api::router;
pub use error::{ApiError, LogError};
pub use events::{Event, EventLog, LogRecord};
pub use rankings::{compute_rankings, load_rankings, save_rankings, AttributeRankings};
pub use service::{
    check_partition, AnnotationService, ExportFilter, ItemsPage, JudgmentAck, JudgmentSubmission, PairTotals,
    SeenAck, SeenStatus, ServiceConfig, SessionView, TaskView,
};
pub use state::{JudgmentRecord, ServiceState, Session, Stage};
