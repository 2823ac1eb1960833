//! HTTP service exposing the active-learning loop to human annotators.

pub mod api;
pub mod config;
pub mod state;
pub mod store;

use glossa::corpus::CorpusError;
use glossa::harness::HarnessError;

pub use api::{serve, ServerHandle};
pub use config::{ServiceConfig, ServiceInputs};
pub use state::{AnnotationTask, Core, Receipt, SubmitRequest, TaskStatus, TicketState, TicketStatus};
pub use store::{AnnotationRecord, RecordLog};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("record log line {line}: {msg}")]
    Log { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("task `{task_id}` was superseded by `{current}`")]
    StaleTask { task_id: String, current: String },
    #[error("task `{0}` has not been handed out")]
    NotInReview(String),
    #[error("no accepted annotations since the last retrain")]
    NothingToRetrain,
    #[error("unknown retrain ticket {0}")]
    UnknownTicket(u64),
    #[error("record log does not match the queue: {0}")]
    Replay(String),
    #[error("missing or wrong bearer token")]
    Unauthorized,
}

impl ServiceError {
    /// Stable machine-readable name used in API error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::Harness(HarnessError::QueueEmpty) => "QueueEmpty",
            ServiceError::Harness(HarnessError::ModelNotReady) => "ModelNotReady",
            ServiceError::Harness(HarnessError::LengthMismatch { .. }) => "LengthMismatch",
            ServiceError::UnknownTag(_) => "UnknownTag",
            ServiceError::UnknownTask(_) => "UnknownTask",
            ServiceError::StaleTask { .. } => "StaleTask",
            ServiceError::NotInReview(_) => "NotInReview",
            ServiceError::NothingToRetrain => "NothingToRetrain",
            ServiceError::UnknownTicket(_) => "UnknownTicket",
            ServiceError::Unauthorized => "Unauthorized",
            _ => "Internal",
        }
    }
}
