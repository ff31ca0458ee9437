//! Two-phase online testing protocol: the level for step i is issued before
//! the data of step i is reported.

use crate::error::{Error, Result};
use crate::procedures::{LevelState, ProcedureConfig};
use serde::{Deserialize, Serialize};

/// Ground truth of one hypothesis. Only the simulation and metrics layers
/// see this; procedures never do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisTruth {
    pub is_null: bool,
}

/// Observed data of one step: p-value, consistent weight ξ and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValueRecord {
    pub p: f64,
    pub weight: f64,
    pub sample_size: usize,
}

impl PValueRecord {
    pub fn new(p: f64, weight: f64, sample_size: usize) -> Result<Self> {
        let record = PValueRecord { p, weight, sample_size };
        record
            .check()
            .map_err(|reason| Error::InvalidRecord { step: 0, reason })?;
        Ok(record)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(format!("p-value {} outside [0, 1]", self.p));
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(format!("weight {} outside [0, 1]", self.weight));
        }
        if self.sample_size == 0 {
            return Err("sample size must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub level: f64,
    pub rejected: bool,
}

/// One completed step as seen by the level rule.
///
/// `weight` is the effective weight the rule consumed (see
/// [`ProcedureConfig::effective_weight`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub weight: f64,
    pub level: f64,
    pub rejected: bool,
}

/// Rejection rule: p ≤ level.
#[inline]
pub fn decide(p: f64, level: f64) -> bool {
    p <= level
}

/// A single online testing session.
#[derive(Debug, Clone)]
pub struct StreamState {
    config: ProcedureConfig,
    state: LevelState,
    history: Vec<Step>,
    pending: Option<f64>,
}

impl StreamState {
    pub fn new(config: ProcedureConfig) -> Result<Self> {
        config.validate()?;
        let state = LevelState::new(&config);
        Ok(StreamState {
            config,
            state,
            history: Vec::new(),
            pending: None,
        })
    }

    /// Issues α_i for the next step. Calling again before [`report`]
    /// returns the same value.
    ///
    /// [`report`]: StreamState::report
    pub fn next_level(&mut self) -> f64 {
        if let Some(level) = self.pending {
            return level;
        }
        let level = self.state.level(&self.config, self.history.len() + 1);
        self.pending = Some(level);
        level
    }

    pub fn report(&mut self, record: PValueRecord) -> Result<DecisionRecord> {
        let i = self.history.len() + 1;
        let level = self.pending.ok_or(Error::LevelNotIssued { step: i })?;
        record
            .check()
            .map_err(|reason| Error::InvalidRecord { step: i, reason })?;
        let rejected = decide(record.p, level);
        let step = Step {
            weight: self.config.effective_weight(&record),
            level,
            rejected,
        };
        self.state.observe(&self.config, i, &step);
        self.history.push(step);
        self.pending = None;
        Ok(DecisionRecord { level, rejected })
    }

    /// Feeds a step whose effective weight and rejection flag are already
    /// known, bypassing the p-value. Used to replay recorded histories.
    pub fn replay(&mut self, weight: f64, rejected: bool) -> f64 {
        let i = self.history.len() + 1;
        let level = self.next_level();
        let step = Step {
            weight,
            level,
            rejected,
        };
        self.state.observe(&self.config, i, &step);
        self.history.push(step);
        self.pending = None;
        level
    }

    pub fn config(&self) -> &ProcedureConfig {
        &self.config
    }

    pub fn history(&self) -> &[Step] {
        &self.history
    }

    /// Number of completed steps.
    pub fn completed(&self) -> usize {
        self.history.len()
    }

    pub fn has_pending_level(&self) -> bool {
        self.pending.is_some()
    }
}
