//! A backpropagation-free feedback–Hebbian network.
//!
//! Two (or three) 10x10 forward matrices map a one-hot stimulation pattern to
//! a multi-site output, while dedicated feedback matrices learn to
//! reconstruct each forward layer's input and feed that reconstruction back
//! as additive context on the next step. Every matrix learns with the same
//! local rule: centred Hebbian covariance, Oja decay and a local supervised
//! drive where a target exists.
//!
//! - [`network`]: state, activation, forward/feedback steps, probes
//! - [`plasticity`]: the update rule, its ablations and the trainer
//! - [`protocol`]: the association pairs and the sequential/interleaved schedules
//! - [`metrics`]: connectivity profiles, retention index, peak weight, selectivity
//! - [`trajectory`]: per-epoch records and the long-format CSV
//! - [`snapshot`]: JSON weight snapshots

pub mod error;
pub mod metrics;
pub mod network;
pub mod plasticity;
pub mod protocol;
pub mod site;
pub mod snapshot;
pub mod trajectory;
pub mod weights;

pub use error::{MetricsError, ModelError, ProtocolError, SnapshotError};
pub use metrics::{
    connectivity, peak_weight, retention, retention_value, selectivity, ConnectivityProfile,
    Direction, PeakWeight, RetentionIndex, Selectivity, ACTIVITY_MARGIN, CONNECTIVITY_MARGIN,
    RETENTION_EPS,
};
pub use network::{
    activation, phi, Architecture, ForwardPass, InjectionMode, MatrixId, Network, Role,
};
pub use plasticity::{
    delta_w, train_step, update_means, RuleParams, RuleTerms, RuleVariant, StepTrace, TargetSource,
    Trainer, UpdateGranularity,
};
pub use protocol::{
    make_sample, run_protocol, Pair, ProtocolSpec, Recorder, Regime, DEFAULT_EPOCHS,
};
pub use site::{Matrix, SiteVector, SITES};
pub use snapshot::NetworkSnapshot;
pub use trajectory::{
    ConnectivityTable, ProbeSet, RunMetadata, TrajectoryRecord, TrajectoryRecorder,
};
pub use weights::{init_weights, WeightMatrix};
