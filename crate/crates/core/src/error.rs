use thiserror::Error;

use crate::network::{Architecture, MatrixId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite pre-activation in {matrix}")]
    NonFinite { matrix: MatrixId },

    #[error("activity {value} at site {site} of {matrix} left the open interval (0, 1)")]
    ActivityOutOfRange {
        matrix: MatrixId,
        site: usize,
        value: f64,
    },

    #[error("context length {found} does not match {expected} forward layers")]
    ContextMismatch { expected: usize, found: usize },

    #[error("{0} has no feedback pathway")]
    NoFeedbackPathway(Architecture),

    #[error("invalid rule parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
}

/// A model error annotated with where in the schedule it happened.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("phase {phase}, epoch {epoch}, sample {sample}: {source}")]
pub struct ProtocolError {
    pub phase: usize,
    pub epoch: usize,
    pub sample: usize,
    #[source]
    pub source: ModelError,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("epoch {0} was not recorded")]
    EpochNotRecorded(usize),
    #[error("no {direction} profile for {matrix} at epoch {epoch}")]
    MissingProfile {
        matrix: MatrixId,
        direction: crate::metrics::Direction,
        epoch: usize,
    },
    #[error("line {line}: {reason}")]
    Csv { line: usize, reason: String },
}
