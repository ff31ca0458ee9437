use super::{run_procedure, Dataset, Observation, ReplicationOutcome, WeightScheme};
use crate::error::{check_open_unit, invalid, Result};
use crate::procedures::ProcedureConfig;
use crate::stream::HypothesisTruth;
use crate::weights::{OneSampleStat, Statistic};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Gaussian z-scores with covariance Σᵢⱼ = ρ^{|i−j|}.
///
/// `effect` is the mean of a false-null z-score. The sample size only enters
/// through the bootstrap weights, so holding `effect` fixed while varying
/// `sample_size` corresponds to a raw effect shrinking like 1/√n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrScenario {
    pub n_hypotheses: usize,
    pub sample_size: usize,
    pub pi1: f64,
    pub rho: f64,
    pub effect: f64,
    pub lambda: f64,
    pub weights: WeightScheme,
}

impl Default for AutocorrScenario {
    fn default() -> Self {
        AutocorrScenario {
            n_hypotheses: 1000,
            sample_size: 100,
            pi1: 0.1,
            rho: 0.8,
            effect: 5.0,
            lambda: 0.5,
            weights: WeightScheme::default(),
        }
    }
}

impl AutocorrScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_hypotheses == 0 {
            return Err(invalid("n_hypotheses", "must be positive"));
        }
        if self.sample_size == 0 {
            return Err(invalid("sample_size", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.pi1) {
            return Err(invalid("pi1", format!("must lie in [0, 1], got {}", self.pi1)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(invalid("rho", format!("must lie in [0, 1), got {}", self.rho)));
        }
        if !self.effect.is_finite() {
            return Err(invalid("effect", "must be finite"));
        }
        check_open_unit("lambda", self.lambda)?;
        self.weights.validate()
    }

    /// Draws truths and z-scores via the AR(1) recursion
    /// Zᵢ − μᵢ = ρ (Z_{i−1} − μ_{i−1}) + √(1 − ρ²) εᵢ, which is exact for
    /// this covariance.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Dataset {
        let innovation_sd = (1.0 - self.rho * self.rho).sqrt();
        let mut noise = 0.0;
        let observations = (0..self.n_hypotheses)
            .map(|i| {
                let is_null = !rng.random_bool(self.pi1);
                let eps: f64 = rng.sample(StandardNormal);
                noise = if i == 0 {
                    eps
                } else {
                    self.rho * noise + innovation_sd * eps
                };
                let mu = if is_null { 0.0 } else { self.effect };
                Observation {
                    truth: HypothesisTruth { is_null },
                    stat: Statistic::One(OneSampleStat {
                        z: mu + noise,
                        n: self.sample_size,
                    }),
                }
            })
            .collect();
        Dataset { observations }
    }
}

pub fn run_autocorr_replication<R: Rng + ?Sized>(
    scenario: &AutocorrScenario,
    config: &ProcedureConfig,
    rng: &mut R,
) -> Result<ReplicationOutcome> {
    scenario.validate()?;
    let dataset = scenario.draw(rng);
    run_procedure(&dataset, config, scenario.weights, scenario.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::replication_rng;

    #[test]
    fn draws_requested_number_of_hypotheses() {
        let scenario = AutocorrScenario {
            n_hypotheses: 37,
            ..Default::default()
        };
        let data = scenario.draw(&mut replication_rng(1, 0));
        assert_eq!(data.observations.len(), 37);
    }

    #[test]
    fn no_false_nulls_when_pi1_is_zero() {
        let scenario = AutocorrScenario {
            n_hypotheses: 200,
            pi1: 0.0,
            ..Default::default()
        };
        let outcome = run_autocorr_replication(
            &scenario,
            &ProcedureConfig::alpha_spending(0.05),
            &mut replication_rng(3, 0),
        )
        .unwrap();
        assert_eq!(outcome.false_nulls, 0);
        assert_eq!(outcome.true_rejections, 0);
        assert_eq!(outcome.records.len(), 200);
    }

    #[test]
    fn validation() {
        let bad_rho = AutocorrScenario {
            rho: 1.0,
            ..Default::default()
        };
        assert!(bad_rho.validate().is_err());
        let bad_pi = AutocorrScenario {
            pi1: 1.5,
            ..Default::default()
        };
        assert!(bad_pi.validate().is_err());
    }
}
