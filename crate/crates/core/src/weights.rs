//! Consistent weights ξ ∈ [0, 1] derived from observed test statistics.
//!
//! The bootstrap weights are the exact conditional probabilities
//! P{P* > λ | data} of a parametric low-intensity bootstrap, so no
//! resampling happens here.

use crate::error::{check_open_unit, invalid, Error, Result};
use crate::normal;
use serde::{Deserialize, Serialize};

/// Bootstrap size m(n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum ResamplePlan {
    /// m(n) = ⌊√n⌋, at least 1.
    #[default]
    Sqrt,
    /// m(n) = ⌊n^exponent⌋ for exponent in (0, 1), at least 1.
    Power { exponent: f64 },
    /// m(n) = min(m, n).
    Fixed(usize),
}

impl ResamplePlan {
    pub fn size(&self, n: usize) -> usize {
        let n = n.max(1);
        let m = match *self {
            ResamplePlan::Sqrt => (n as f64).sqrt().floor() as usize,
            ResamplePlan::Power { exponent } => (n as f64).powf(exponent).floor() as usize,
            ResamplePlan::Fixed(m) => m,
        };
        m.clamp(1, n)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResamplePlan::Sqrt => Ok(()),
            ResamplePlan::Power { exponent } => check_open_unit("resample.exponent", exponent),
            ResamplePlan::Fixed(0) => Err(invalid("resample", "fixed size must be positive")),
            ResamplePlan::Fixed(_) => Ok(()),
        }
    }
}

/// Threshold sequence a_n. It should satisfy a_n → ∞ and a_n/√n → 0; only
/// positivity and monotonicity are checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum ThresholdPlan {
    /// a_n = n^{1/4}.
    #[default]
    QuarterPower,
    /// a_n = coef · n^exponent.
    Power { coef: f64, exponent: f64 },
}

impl ThresholdPlan {
    pub fn threshold(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            ThresholdPlan::QuarterPower => n.powf(0.25),
            ThresholdPlan::Power { coef, exponent } => coef * n.powf(exponent),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdPlan::QuarterPower => Ok(()),
            ThresholdPlan::Power { coef, exponent } => {
                if coef.is_nan() || coef <= 0.0 {
                    return Err(invalid("threshold.coef", "must be positive"));
                }
                if !(0.0..0.5).contains(&exponent) {
                    return Err(invalid("threshold.exponent", "must lie in [0, 0.5)"));
                }
                Ok(())
            }
        }
    }
}

/// Standardized one-sample statistic Z = √n · x̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSampleStat {
    pub z: f64,
    pub n: usize,
}

impl OneSampleStat {
    /// One-sided p-value 1 − Φ(Z).
    pub fn p_value(&self) -> f64 {
        normal::upper_tail(self.z)
    }
}

/// Two-sample statistic built from unit-variance group means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleStat {
    pub mean_x: f64,
    pub mean_y: f64,
    pub n1: usize,
    pub n2: usize,
}

impl TwoSampleStat {
    /// Z = (1/n₁ + 1/n₂)^{−1/2} (x̄ − ȳ).
    pub fn z(&self) -> f64 {
        (self.mean_x - self.mean_y) / inverse_sum(self.n1, self.n2).sqrt()
    }

    pub fn p_value(&self) -> f64 {
        normal::upper_tail(self.z())
    }
}

fn inverse_sum(a: usize, b: usize) -> f64 {
    1.0 / a as f64 + 1.0 / b as f64
}

/// Any statistic a weight can be computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    One(OneSampleStat),
    Two(TwoSampleStat),
}

impl Statistic {
    pub fn z(&self) -> f64 {
        match self {
            Statistic::One(s) => s.z,
            Statistic::Two(s) => s.z(),
        }
    }

    pub fn p_value(&self) -> f64 {
        normal::upper_tail(self.z())
    }

    /// Nominal sample size (the smaller group for two-sample statistics).
    pub fn sample_size(&self) -> usize {
        match self {
            Statistic::One(s) => s.n,
            Statistic::Two(s) => s.n1.min(s.n2),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Statistic::One(_) => "one-sample",
            Statistic::Two(_) => "two-sample",
        }
    }
}

/// ξ = 0 if Z > a_n, else 1 − λ.
pub fn threshold_weight(stat: &OneSampleStat, plan: &ThresholdPlan, lambda: f64) -> f64 {
    if stat.z > plan.threshold(stat.n) {
        0.0
    } else {
        1.0 - lambda
    }
}

/// ξ = Φ[Φ⁻¹(1 − λ) − √(m(n)/n) · Z].
pub fn bootstrap_weight_1s(stat: &OneSampleStat, plan: &ResamplePlan, lambda: f64) -> f64 {
    let n = stat.n.max(1);
    let shrink = (plan.size(n) as f64 / n as f64).sqrt();
    normal::cdf(normal::quantile(1.0 - lambda) - shrink * stat.z)
}

/// Shrinkage √[(1/n₁ + 1/n₂) / (1/m(n₁) + 1/m(n₂))] applied to the two-sample Z.
pub fn two_sample_shrinkage(n1: usize, n2: usize, plan: &ResamplePlan) -> f64 {
    (inverse_sum(n1, n2) / inverse_sum(plan.size(n1), plan.size(n2))).sqrt()
}

/// ξ = Φ[Φ⁻¹(1 − λ) − κ · Z] with κ from [`two_sample_shrinkage`].
///
/// Consistency needs asymptotically balanced groups (n₁/n₂ → 1); the
/// formula is evaluated for any n₁, n₂.
pub fn bootstrap_weight_2s(stat: &TwoSampleStat, plan: &ResamplePlan, lambda: f64) -> f64 {
    let kappa = two_sample_shrinkage(stat.n1.max(1), stat.n2.max(1), plan);
    normal::cdf(normal::quantile(1.0 - lambda) - kappa * stat.z())
}

/// Limit c of the bootstrap weight for a mean of the given sign.
pub fn weight_limit(mu_sign: i8, lambda: f64) -> f64 {
    match mu_sign.signum() {
        1 => 0.0,
        0 => 1.0 - lambda,
        _ => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightVariant {
    Threshold(ThresholdPlan),
    BootstrapOneSample(ResamplePlan),
    BootstrapTwoSample(ResamplePlan),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightGenerator {
    pub variant: WeightVariant,
    pub lambda: f64,
}

impl WeightGenerator {
    pub fn new(variant: WeightVariant, lambda: f64) -> Result<Self> {
        check_open_unit("lambda", lambda)?;
        match &variant {
            WeightVariant::Threshold(plan) => plan.validate()?,
            WeightVariant::BootstrapOneSample(plan) | WeightVariant::BootstrapTwoSample(plan) => plan.validate()?,
        }
        Ok(WeightGenerator { variant, lambda })
    }

    /// Rejects λ < 0.5, below which the finite-sample guarantee for
    /// independent statistics does not apply.
    pub fn require_finite_sample_regime(&self) -> Result<()> {
        if self.lambda >= 0.5 {
            Ok(())
        } else {
            Err(invalid(
                "lambda",
                format!("finite-sample control needs lambda in [0.5, 1), got {}", self.lambda),
            ))
        }
    }

    pub fn weight(&self, stat: &Statistic) -> Result<f64> {
        match (&self.variant, stat) {
            (WeightVariant::Threshold(plan), stat) => {
                let standardized = OneSampleStat {
                    z: stat.z(),
                    n: stat.sample_size(),
                };
                Ok(threshold_weight(&standardized, plan, self.lambda))
            }
            (WeightVariant::BootstrapOneSample(plan), Statistic::One(s)) => {
                Ok(bootstrap_weight_1s(s, plan, self.lambda))
            }
            (WeightVariant::BootstrapTwoSample(plan), Statistic::Two(s)) => {
                Ok(bootstrap_weight_2s(s, plan, self.lambda))
            }
            (variant, stat) => Err(Error::StatisticMismatch {
                generator: match variant {
                    WeightVariant::BootstrapOneSample(_) => "bootstrap-1-sample",
                    _ => "bootstrap-2-sample",
                },
                statistic: stat.kind(),
            }),
        }
    }
}
