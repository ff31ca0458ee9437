//! FWER and power estimates with Monte Carlo standard errors.

use crate::error::{Error, Result};
use crate::sim::ReplicationSummary;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub replications: usize,
    /// Fraction of replications with at least one false rejection.
    pub fwer_hat: f64,
    /// √(fwer_hat (1 − fwer_hat) / R).
    pub se_fwer: f64,
    /// Mean proportion of rejected false nulls over replications that have
    /// at least one false null; `None` if there are none.
    pub power_hat: Option<f64>,
    /// Sample standard deviation of the per-replication proportions over √k.
    pub se_power: Option<f64>,
    /// Number k of replications entering the power estimate.
    pub power_replications: usize,
}

pub fn aggregate(outcomes: &[ReplicationSummary]) -> Result<MetricsReport> {
    if outcomes.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    let r = outcomes.len();
    let errors = outcomes.iter().filter(|o| o.any_false_rejection).count();
    let fwer_hat = errors as f64 / r as f64;
    let se_fwer = (fwer_hat * (1.0 - fwer_hat) / r as f64).sqrt();

    // Integer counts keep the estimate independent of the outcome order.
    let proportions: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.false_nulls > 0)
        .map(|o| o.true_rejections as f64 / o.false_nulls as f64)
        .collect();
    let k = proportions.len();
    let (power_hat, se_power) = if k == 0 {
        (None, None)
    } else {
        let mean = proportions.iter().sum::<f64>() / k as f64;
        let se = if k > 1 {
            let ss: f64 = proportions.iter().map(|p| (p - mean).powi(2)).sum();
            (ss / (k - 1) as f64 / k as f64).sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(se))
    };
    Ok(MetricsReport {
        replications: r,
        fwer_hat,
        se_fwer,
        power_hat,
        se_power,
        power_replications: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn summary(any: bool, hits: usize, alts: usize) -> ReplicationSummary {
        ReplicationSummary {
            any_false_rejection: any,
            true_rejections: hits,
            false_nulls: alts,
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(aggregate(&[]), Err(Error::EmptyOutcomes));
    }

    #[test]
    fn nothing_rejected() {
        let report = aggregate(&[summary(false, 0, 3), summary(false, 0, 1)]).unwrap();
        assert_eq!(report.fwer_hat, 0.0);
        assert_eq!(report.power_hat, Some(0.0));
        assert_eq!(report.se_fwer, 0.0);
    }

    #[test]
    fn single_perfect_replication() {
        let report = aggregate(&[summary(false, 1, 1)]).unwrap();
        assert_eq!(report.fwer_hat, 0.0);
        assert_eq!(report.power_hat, Some(1.0));
        assert_eq!(report.se_power, Some(0.0));
    }

    #[test]
    fn hand_computed_example() {
        // Proportions over replications with false nulls: 1/2, 0, 3/4.
        let outcomes = [
            summary(true, 1, 2),
            summary(false, 0, 0),
            summary(false, 0, 5),
            summary(true, 3, 4),
        ];
        let report = aggregate(&outcomes).unwrap();
        assert_eq!(report.replications, 4);
        assert_eq!(report.fwer_hat, 0.5);
        assert_relative_eq!(report.se_fwer, (0.25f64 / 4.0).sqrt());
        assert_eq!(report.power_replications, 3);
        assert_relative_eq!(report.power_hat.unwrap(), 1.25 / 3.0, epsilon = 1e-15);
        // Sample variance of {0.5, 0, 0.75}: mean 5/12, SS = 7/24, var = 7/48.
        assert_relative_eq!(report.se_power.unwrap(), (7.0f64 / 48.0 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn power_absent_without_false_nulls() {
        let report = aggregate(&[summary(true, 0, 0), summary(false, 0, 0)]).unwrap();
        assert_eq!(report.power_hat, None);
        assert_eq!(report.se_power, None);
        assert_eq!(report.fwer_hat, 0.5);
    }
}
