//! Experiment harness: configs, runs, artifact files, experiment grids and
//! the acceptance report.

use std::path::{Path, PathBuf};

use fbhebb_core::{MetricsError, ModelError, ProtocolError, SnapshotError};
use thiserror::Error;

pub mod config;
pub mod grid;
pub mod properties;
pub mod report;
pub mod runner;

pub use config::RunConfig;
pub use grid::{ExperimentMatrix, GridReport};
pub use report::{evaluate, AcceptanceReport, CriterionResult, RunIndex};
pub use runner::{execute, RunArtifacts, RunOutcome, RunSummary};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "FBHEBB_OUT";
pub const DEFAULT_OUT_ROOT: &str = "runs";

/// Seeds used by the acceptance criteria.
pub const ACCEPTANCE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("run {run}: {source}")]
    Protocol {
        run: String,
        #[source]
        source: ProtocolError,
    },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{path}: {source}")]
    Metrics {
        path: PathBuf,
        #[source]
        source: MetricsError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("no artifacts found under {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    NoArtifacts(Vec<PathBuf>),
    #[error("unknown experiment matrix `{0}` (expected controls, ablations or acceptance)")]
    UnknownMatrix(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
