//! Index-addressed parameter sequences: spending sequences γ, graph weights
//! g_{j,i} and per-hypothesis schedules for λᵢ and Πᵢ.
//!
//! All sequences are 1-based, matching hypothesis indices.

use crate::error::{check_open_unit, invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-hypothesis constant such as λᵢ or Πᵢ.
///
/// A `PerIndex` schedule repeats its last entry past its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    Constant(f64),
    PerIndex(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, i: usize) -> f64 {
        debug_assert!(i >= 1);
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PerIndex(values) => values[(i - 1).min(values.len() - 1)],
        }
    }

    pub(crate) fn validate_open_unit(&self, name: &'static str) -> Result<()> {
        match self {
            Schedule::Constant(v) => check_open_unit(name, *v),
            Schedule::PerIndex(values) => {
                if values.is_empty() {
                    return Err(invalid(name, "per-index schedule is empty"));
                }
                values.iter().try_for_each(|&v| check_open_unit(name, v))
            }
        }
    }
}

impl From<f64> for Schedule {
    fn from(v: f64) -> Self {
        Schedule::Constant(v)
    }
}

/// Non-negative spending sequence γ with Σγᵢ ≤ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum SpendingSequence {
    /// γⱼ = 6 / (π j)², which sums to exactly one.
    #[default]
    InverseSquare,
    /// γⱼ = Π (1 − Π)^{j−1}, which sums to exactly one.
    Geometric { pi: f64 },
    /// Finite explicit prefix; entries past the end are zero.
    Explicit(Vec<f64>),
}

impl SpendingSequence {
    /// γᵢ for `i ≥ 1`; zero for `i = 0`.
    pub fn gamma(&self, i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        match self {
            SpendingSequence::InverseSquare => {
                let x = PI * i as f64;
                6.0 / (x * x)
            }
            SpendingSequence::Geometric { pi } => pi * (1.0 - pi).powi(i as i32 - 1),
            SpendingSequence::Explicit(values) => values.get(i - 1).copied().unwrap_or(0.0),
        }
    }

    /// Σ_{i≥1} γᵢ.
    pub fn total(&self) -> f64 {
        match self {
            SpendingSequence::InverseSquare | SpendingSequence::Geometric { .. } => 1.0,
            SpendingSequence::Explicit(values) => values.iter().sum(),
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        match self {
            SpendingSequence::InverseSquare | SpendingSequence::Geometric { .. } => true,
            SpendingSequence::Explicit(values) => {
                values.windows(2).all(|w| w[1] <= w[0]) && values.last().is_none_or(|&v| v >= 0.0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpendingSequence::InverseSquare => Ok(()),
            SpendingSequence::Geometric { pi } => check_open_unit("gamma.pi", *pi),
            SpendingSequence::Explicit(values) => {
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(invalid("gamma", format!("entries must be non-negative, got {v}")));
                }
                let total: f64 = values.iter().sum();
                if total > 1.0 + 1e-12 {
                    return Err(invalid("gamma", format!("entries sum to {total} > 1")));
                }
                Ok(())
            }
        }
    }
}

/// Graph weights g_{j,i} (i > j) used to pass unspent level from step j to
/// later steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GraphWeights {
    /// g_{j,i} = γ_{i−j}.
    Shifted(SpendingSequence),
    /// Row j−1 holds g_{j,j+1}, g_{j,j+2}, …; missing entries are zero.
    Explicit(Vec<Vec<f64>>),
}

impl GraphWeights {
    pub fn g(&self, j: usize, i: usize) -> f64 {
        if i <= j {
            return 0.0;
        }
        match self {
            GraphWeights::Shifted(gamma) => gamma.gamma(i - j),
            GraphWeights::Explicit(rows) => rows
                .get(j - 1)
                .and_then(|row| row.get(i - j - 1))
                .copied()
                .unwrap_or(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GraphWeights::Shifted(gamma) => gamma.validate(),
            GraphWeights::Explicit(rows) => {
                for row in rows {
                    if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                        return Err(invalid("graph", "weights must be non-negative"));
                    }
                    let total: f64 = row.iter().sum();
                    if total > 1.0 + 1e-12 {
                        return Err(invalid("graph", format!("outgoing weights sum to {total} > 1")));
                    }
                }
                Ok(())
            }
        }
    }
}
