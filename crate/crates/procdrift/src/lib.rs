//! Drift detection for process event logs.
//!
//! The pipeline: parse an event log ([`eventlog`]), discover a behavioral
//! model from a trace window ([`model`]), score later windows against it
//! ([`conformance`]), and flag windows whose fitness or precision series
//! shows a statistically significant trend ([`stats`], [`detector`]).
//! [`loggen`] builds synthetic logs with known drift regions and
//! [`evaluate`] scores detection reports against that ground truth.

pub mod conformance;
pub mod detector;
pub mod error;
pub mod eventlog;
pub mod evaluate;
pub mod loggen;
pub mod model;
pub mod stats;

pub use conformance::{fitness, precision, MetricValue};
pub use detector::{
    adjust_window, detect, DetectorConfig, DriftReport, WindowGrowth,
};
pub use error::Error;
pub use evaluate::{score, EvalResult};
pub use eventlog::{Event, EventLog, Trace};
pub use loggen::{
    apply_pattern, derive_model, generate_log, ChangePattern,
    DriftDistribution, GroundTruth, ProcessTree,
};
pub use model::BehaviorModel;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
