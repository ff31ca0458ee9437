use crate::error::{Error, Result};

/// Result of checking Σ_{i≤K} αᵢ ξᵢ / (1 − λᵢ) ≤ α for every K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetAudit {
    pub alpha: f64,
    /// Maximum partial sum over K (0 for an empty stream).
    pub max_partial_sum: f64,
}

impl BudgetAudit {
    pub fn within(&self, tolerance: f64) -> bool {
        self.max_partial_sum <= self.alpha + tolerance
    }
}

pub fn audit_budget(levels: &[f64], weights: &[f64], lambdas: &[f64], alpha: f64) -> Result<BudgetAudit> {
    if levels.len() != weights.len() || levels.len() != lambdas.len() {
        return Err(Error::LengthMismatch {
            levels: levels.len(),
            weights: weights.len(),
            lambdas: lambdas.len(),
        });
    }
    let mut partial = 0.0;
    let mut max_partial_sum = 0.0f64;
    for ((level, weight), lambda) in levels.iter().zip(weights).zip(lambdas) {
        partial += level * weight / (1.0 - lambda);
        max_partial_sum = max_partial_sum.max(partial);
    }
    Ok(BudgetAudit { alpha, max_partial_sum })
}
