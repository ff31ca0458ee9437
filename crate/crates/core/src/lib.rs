//! Online multiple testing with asymptotic familywise error rate control
//! under arbitrary dependence.
//!
//! Hypotheses arrive one at a time. A procedure issues a test level from the
//! past only ([`StreamState::next_level`]), then the p-value and its
//! consistent weight are reported ([`StreamState::report`]). Weights come
//! from a low-intensity parametric bootstrap ([`weights`]); the level rules
//! live in [`procedures`]; [`sim`] and [`metrics`] reproduce the
//! autocorrelation and platform-trial simulation studies.

pub mod error;
pub mod metrics;
pub mod normal;
pub mod procedures;
pub mod sim;
pub mod stream;
pub mod weights;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use metrics::{aggregate, MetricsReport};
pub use procedures::{
    audit_budget, BudgetAudit, GraphWeights, ProcedureConfig, ProcedureKind, Schedule, SpendingFunction,
    SpendingSequence,
};
pub use sim::{ReplicationOutcome, ReplicationSummary, Scenario};
pub use stream::{DecisionRecord, HypothesisTruth, PValueRecord, Step, StreamState};
pub use weights::{OneSampleStat, ResamplePlan, Statistic, ThresholdPlan, TwoSampleStat, WeightGenerator};
