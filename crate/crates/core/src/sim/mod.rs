//! Simulation worlds and the replication driver.

mod autocorr;
mod platform;
mod study;

pub use autocorr::{run_autocorr_replication, AutocorrScenario};
pub use platform::{run_platform_replication, EffectScaling, PlatformScenario};
pub use study::{map_replications, replication_rng, run_study};

use crate::error::Result;
use crate::procedures::ProcedureConfig;
use crate::stream::{HypothesisTruth, PValueRecord, StreamState};
use crate::weights::{ResamplePlan, Statistic, ThresholdPlan, WeightGenerator, WeightVariant};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How consistent weights are formed from each statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightScheme {
    Bootstrap(ResamplePlan),
    Threshold(ThresholdPlan),
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::Bootstrap(ResamplePlan::Sqrt)
    }
}

impl WeightScheme {
    pub fn generator(&self, stat: &Statistic, lambda: f64) -> Result<WeightGenerator> {
        let variant = match (self, stat) {
            (WeightScheme::Threshold(plan), _) => WeightVariant::Threshold(*plan),
            (WeightScheme::Bootstrap(plan), Statistic::One(_)) => WeightVariant::BootstrapOneSample(*plan),
            (WeightScheme::Bootstrap(plan), Statistic::Two(_)) => WeightVariant::BootstrapTwoSample(*plan),
        };
        WeightGenerator::new(variant, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightScheme::Bootstrap(plan) => plan.validate(),
            WeightScheme::Threshold(plan) => plan.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub truth: HypothesisTruth,
    pub stat: Statistic,
}

/// The data of one replication, shared by every procedure under study.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub observations: Vec<Observation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub truth: HypothesisTruth,
    pub p: f64,
    /// Consistent weight ξ computed from the data.
    pub weight: f64,
    /// Weight actually consumed by the level rule.
    pub effective_weight: f64,
    pub level: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub records: Vec<HypothesisRecord>,
    pub any_false_rejection: bool,
    pub true_rejections: usize,
    pub false_nulls: usize,
}

/// Counts of one replication; what metrics aggregation consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub any_false_rejection: bool,
    pub true_rejections: usize,
    pub false_nulls: usize,
}

impl ReplicationOutcome {
    pub fn summary(&self) -> ReplicationSummary {
        ReplicationSummary {
            any_false_rejection: self.any_false_rejection,
            true_rejections: self.true_rejections,
            false_nulls: self.false_nulls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scenario {
    Autocorr(AutocorrScenario),
    Platform(PlatformScenario),
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Autocorr(s) => s.validate(),
            Scenario::Platform(s) => s.validate(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Dataset {
        match self {
            Scenario::Autocorr(s) => s.draw(rng),
            Scenario::Platform(s) => s.draw(rng),
        }
    }

    pub fn weights(&self) -> WeightScheme {
        match self {
            Scenario::Autocorr(s) => s.weights,
            Scenario::Platform(s) => s.weights,
        }
    }

    /// λ used for weights when the procedure has none of its own.
    pub fn lambda(&self) -> f64 {
        match self {
            Scenario::Autocorr(s) => s.lambda,
            Scenario::Platform(s) => s.lambda,
        }
    }
}

/// Runs one procedure over a drawn dataset through the online protocol.
///
/// Weights use the procedure's λᵢ when it has one and `default_lambda`
/// otherwise.
pub fn run_procedure(
    dataset: &Dataset,
    config: &ProcedureConfig,
    weights: WeightScheme,
    default_lambda: f64,
) -> Result<ReplicationOutcome> {
    let mut session = StreamState::new(config.clone())?;
    let mut records = Vec::with_capacity(dataset.observations.len());
    let mut any_false_rejection = false;
    let mut true_rejections = 0;
    let mut false_nulls = 0;
    for (idx, obs) in dataset.observations.iter().enumerate() {
        let i = idx + 1;
        let lambda = config.lambda_at(i).unwrap_or(default_lambda);
        let weight = weights.generator(&obs.stat, lambda)?.weight(&obs.stat)?;
        let p = obs.stat.p_value();
        let level = session.next_level();
        let decision = session.report(PValueRecord {
            p,
            weight,
            sample_size: obs.stat.sample_size(),
        })?;
        debug_assert_eq!(decision.level, level);
        if obs.truth.is_null {
            any_false_rejection |= decision.rejected;
        } else {
            false_nulls += 1;
            true_rejections += usize::from(decision.rejected);
        }
        records.push(HypothesisRecord {
            truth: obs.truth,
            p,
            weight,
            effective_weight: session.history()[idx].weight,
            level,
            rejected: decision.rejected,
        });
    }
    Ok(ReplicationOutcome {
        records,
        any_false_rejection,
        true_rejections,
        false_nulls,
    })
}
