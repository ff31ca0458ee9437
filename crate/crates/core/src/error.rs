use thiserror::Error;

/// Errors raised while validating configurations or driving a testing session.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("report called without an issued level for step {step}")]
    LevelNotIssued { step: usize },

    #[error("invalid record at step {step}: {reason}")]
    InvalidRecord { step: usize, reason: String },

    #[error("length mismatch: {levels} levels, {weights} weights, {lambdas} lambdas")]
    LengthMismatch {
        levels: usize,
        weights: usize,
        lambdas: usize,
    },

    #[error("weight generator `{generator}` cannot handle a {statistic} statistic")]
    StatisticMismatch {
        generator: &'static str,
        statistic: &'static str,
    },

    #[error("cannot aggregate an empty list of replication outcomes")]
    EmptyOutcomes,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `value ∈ (0, 1)`.
pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must lie in (0, 1), got {value}")))
    }
}
