use super::{run_procedure, Dataset, Observation, ReplicationOutcome, WeightScheme};
use crate::error::{check_open_unit, invalid, Result};
use crate::procedures::ProcedureConfig;
use crate::stream::HypothesisTruth;
use crate::weights::{Statistic, TwoSampleStat};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EffectScaling {
    /// Effective arms have mean `effect`.
    #[default]
    Fixed,
    /// Effective arms have mean `effect / √n`.
    InverseSqrtN,
}

/// Platform trial with staggered treatment arms tested against a shared,
/// continuously recruiting control arm.
///
/// Patients arrive at `rate` per unit time to every active arm and to the
/// control arm. Arm i enters at tᵢ = `entry_spacing` · (i − 1) and stays
/// until it has `sample_size` patients; its concurrent controls are the
/// `sample_size` control patients recruited from tᵢ on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformScenario {
    pub n_treatments: usize,
    pub sample_size: usize,
    pub sigma: f64,
    pub rate: f64,
    pub entry_spacing: f64,
    pub pi1: f64,
    pub effect: f64,
    pub effect_scaling: EffectScaling,
    pub lambda: f64,
    pub weights: WeightScheme,
}

impl Default for PlatformScenario {
    fn default() -> Self {
        PlatformScenario {
            n_treatments: 50,
            sample_size: 100,
            sigma: 1.0,
            rate: 10.0,
            entry_spacing: 2.0,
            pi1: 0.2,
            effect: 0.5,
            effect_scaling: EffectScaling::Fixed,
            lambda: 0.5,
            weights: WeightScheme::default(),
        }
    }
}

impl PlatformScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_treatments == 0 {
            return Err(invalid("n_treatments", "must be positive"));
        }
        if self.sample_size == 0 {
            return Err(invalid("sample_size", "must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", "must be positive"));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(invalid("rate", "must be positive"));
        }
        if !(self.entry_spacing >= 0.0 && self.entry_spacing.is_finite()) {
            return Err(invalid("entry_spacing", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.pi1) {
            return Err(invalid("pi1", format!("must lie in [0, 1], got {}", self.pi1)));
        }
        if !self.effect.is_finite() {
            return Err(invalid("effect", "must be finite"));
        }
        check_open_unit("lambda", self.lambda)?;
        self.weights.validate()
    }

    /// Entry time tᵢ of arm `i` (1-based).
    pub fn entry_time(&self, i: usize) -> f64 {
        self.entry_spacing * (i - 1) as f64
    }

    /// Time an arm needs to recruit its patients.
    pub fn duration(&self) -> f64 {
        self.sample_size as f64 / self.rate
    }

    /// Indices J_i of the control patients concurrent to arm `i` (1-based).
    pub fn control_window(&self, i: usize) -> Range<usize> {
        let start = (self.entry_time(i) * self.rate).round() as usize;
        start..start + self.sample_size
    }

    /// |J_i ∩ J_k|.
    pub fn control_overlap(&self, i: usize, k: usize) -> usize {
        let (a, b) = (self.control_window(i), self.control_window(k));
        b.end.min(a.end).saturating_sub(a.start.max(b.start))
    }

    /// cov(Zᵢ, Z_k) = |J_i ∩ J_k| / (2n) for i ≠ k.
    pub fn analytic_covariance(&self, i: usize, k: usize) -> f64 {
        if i == k {
            return 1.0;
        }
        self.control_overlap(i, k) as f64 / (2.0 * self.sample_size as f64)
    }

    fn arm_effect(&self) -> f64 {
        match self.effect_scaling {
            EffectScaling::Fixed => self.effect,
            EffectScaling::InverseSqrtN => self.effect / (self.sample_size as f64).sqrt(),
        }
    }

    /// Simulates patient-level responses: the control stream first, then
    /// every arm in entry order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Dataset {
        let n = self.sample_size;
        let controls = self.control_window(self.n_treatments).end;
        let mut prefix = Vec::with_capacity(controls + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for _ in 0..controls {
            let x: f64 = rng.sample(StandardNormal);
            acc += self.sigma * x;
            prefix.push(acc);
        }
        let effect = self.arm_effect();
        let observations = (1..=self.n_treatments)
            .map(|i| {
                let is_null = !rng.random_bool(self.pi1);
                let mu = if is_null { 0.0 } else { effect };
                let arm_sum: f64 = (0..n)
                    .map(|_| {
                        let x: f64 = rng.sample(StandardNormal);
                        mu + self.sigma * x
                    })
                    .sum();
                let window = self.control_window(i);
                let control_mean = (prefix[window.end] - prefix[window.start]) / n as f64;
                let arm_mean = arm_sum / n as f64;
                Observation {
                    truth: HypothesisTruth { is_null },
                    stat: Statistic::Two(TwoSampleStat {
                        mean_x: arm_mean / self.sigma,
                        mean_y: control_mean / self.sigma,
                        n1: n,
                        n2: n,
                    }),
                }
            })
            .collect();
        Dataset { observations }
    }
}

pub fn run_platform_replication<R: Rng + ?Sized>(
    scenario: &PlatformScenario,
    config: &ProcedureConfig,
    rng: &mut R,
) -> Result<ReplicationOutcome> {
    scenario.validate()?;
    let dataset = scenario.draw(rng);
    run_procedure(&dataset, config, scenario.weights, scenario.lambda)
}
