//! Non-increasing integrable spending functions f on [1, ∞) together with
//! their scaling constant s = (1 − λ) f(1) + ∫₁^∞ f.

use super::sequences::SpendingSequence;
use crate::error::{check_open_unit, invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpendingShape {
    /// Linear interpolation f_γ of a non-increasing sequence γ.
    Interpolation(SpendingSequence),
    /// f(x) = coef · x^{−exponent}, exponent > 1.
    Power { coef: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpendingFunction {
    shape: SpendingShape,
    lambda: f64,
    integral_tail: f64,
    scaling: f64,
}

impl SpendingFunction {
    /// Linear interpolation of `gamma`: f_γ(x) = γ_⌊x⌋ + (x − ⌊x⌋)(γ_⌈x⌉ − γ_⌊x⌋).
    ///
    /// ∫₁^∞ f_γ = Σγ − γ₁/2, so for Σγ = 1 the scaling is s = 1 + γ₁(1/2 − λ).
    pub fn interpolation(gamma: SpendingSequence, lambda: f64) -> Result<Self> {
        check_open_unit("lambda", lambda)?;
        gamma.validate()?;
        if !gamma.is_non_increasing() {
            return Err(invalid("gamma", "interpolation requires a non-increasing sequence"));
        }
        let g1 = gamma.gamma(1);
        let integral_tail = gamma.total() - 0.5 * g1;
        Self::finish(SpendingShape::Interpolation(gamma), lambda, integral_tail)
    }

    /// f(x) = coef · x^{−exponent}; ∫₁^∞ f = coef / (exponent − 1).
    pub fn power(coef: f64, exponent: f64, lambda: f64) -> Result<Self> {
        check_open_unit("lambda", lambda)?;
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(invalid("coef", format!("must be positive, got {coef}")));
        }
        if !(exponent > 1.0 && exponent.is_finite()) {
            return Err(invalid("exponent", format!("must exceed 1, got {exponent}")));
        }
        Self::finish(SpendingShape::Power { coef, exponent }, lambda, coef / (exponent - 1.0))
    }

    fn finish(shape: SpendingShape, lambda: f64, integral_tail: f64) -> Result<Self> {
        let mut function = SpendingFunction {
            shape,
            lambda,
            integral_tail,
            scaling: 0.0,
        };
        function.scaling = (1.0 - lambda) * function.eval(1.0) + integral_tail;
        if function.scaling.is_nan() || function.scaling <= 0.0 {
            return Err(invalid("spending function", "scaling constant must be positive"));
        }
        Ok(function)
    }

    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x >= 1.0);
        match &self.shape {
            SpendingShape::Interpolation(gamma) => {
                let lo = x.floor();
                let frac = x - lo;
                let k = lo as usize;
                let g_lo = gamma.gamma(k);
                if frac == 0.0 {
                    g_lo
                } else {
                    g_lo + frac * (gamma.gamma(k + 1) - g_lo)
                }
            }
            SpendingShape::Power { coef, exponent } => coef * x.powf(-exponent),
        }
    }

    pub fn shape(&self) -> &SpendingShape {
        &self.shape
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// ∫₁^∞ f(x) dx.
    pub fn integral_tail(&self) -> f64 {
        self.integral_tail
    }

    /// s = (1 − λ) f(1) + ∫₁^∞ f.
    pub fn scaling(&self) -> f64 {
        self.scaling
    }
}

/// Builds the interpolation spending function f_γ for `gamma` and `lambda`.
pub fn make_interpolation_function(gamma: SpendingSequence, lambda: f64) -> Result<SpendingFunction> {
    SpendingFunction::interpolation(gamma, lambda)
}
