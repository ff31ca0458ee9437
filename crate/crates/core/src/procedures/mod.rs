//! Online test-level rules.
//!
//! Every rule is available in two forms: a pure function of the recorded
//! history (`level_*`) and the incremental [`LevelState`] used by
//! [`crate::stream::StreamState`], which keeps O(1) accumulators where the
//! rule allows it and per-source graph credits otherwise.

mod audit;
mod sequences;
mod spending_function;

pub use audit::{audit_budget, BudgetAudit};
pub use sequences::{GraphWeights, Schedule, SpendingSequence};
pub use spending_function::{make_interpolation_function, SpendingFunction, SpendingShape};

use crate::error::{check_open_unit, invalid, Result};
use crate::stream::{PValueRecord, Step};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProcedureKind {
    /// αᵢ = α γᵢ.
    AlphaSpending { gamma: SpendingSequence },
    /// αᵢ = α (1 − λ) γ_{t(i)} with t(i) = 1 + Σ_{j<i} (1 − C_j).
    AdaptiveSpending { gamma: SpendingSequence, lambda: f64 },
    /// αᵢ = α γᵢ + Σ_{j<i} g_{j,i} R_j α_j.
    OnlineFallback {
        gamma: SpendingSequence,
        graph: GraphWeights,
    },
    /// αᵢ = Πᵢ (1 − λᵢ) (α − Σ_{j<i} α_j ξ_j / (1 − λ_j)).
    Geometric { pi: Schedule, lambda: Schedule },
    /// αᵢ = (1 − λᵢ) {α γᵢ + Σ_{j<i} g_{j,i} u_j α_j / (1 − λ_j)} with
    /// u_j = 1 − ξ_j, or max{1 − ξ_j, R_j} when closed.
    ContinuousGraph {
        gamma: SpendingSequence,
        graph: GraphWeights,
        lambda: Schedule,
        closed: bool,
    },
    /// αᵢ = α (1 − λ)/s · f(1 + Σ_{j<i} ξ_j), dropping rejected ξ_j when
    /// closed.
    ContinuousSpending { function: SpendingFunction, closed: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcedureConfig {
    pub alpha: f64,
    pub kind: ProcedureKind,
}

impl ProcedureConfig {
    pub fn new(alpha: f64, kind: ProcedureKind) -> Result<Self> {
        let config = ProcedureConfig { alpha, kind };
        config.validate()?;
        Ok(config)
    }

    pub fn alpha_spending(alpha: f64) -> Self {
        ProcedureConfig {
            alpha,
            kind: ProcedureKind::AlphaSpending {
                gamma: SpendingSequence::InverseSquare,
            },
        }
    }

    pub fn adaptive_spending(alpha: f64, lambda: f64) -> Self {
        ProcedureConfig {
            alpha,
            kind: ProcedureKind::AdaptiveSpending {
                gamma: SpendingSequence::InverseSquare,
                lambda,
            },
        }
    }

    pub fn online_fallback(alpha: f64) -> Self {
        ProcedureConfig {
            alpha,
            kind: ProcedureKind::OnlineFallback {
                gamma: SpendingSequence::InverseSquare,
                graph: GraphWeights::Shifted(SpendingSequence::InverseSquare),
            },
        }
    }

    pub fn geometric(alpha: f64, pi: f64, lambda: f64) -> Self {
        ProcedureConfig {
            alpha,
            kind: ProcedureKind::Geometric {
                pi: Schedule::Constant(pi),
                lambda: Schedule::Constant(lambda),
            },
        }
    }

    /// Continuous Adaptive-Graph with γⱼ = 6(πj)⁻² and g_{j,i} = γ_{i−j}.
    pub fn continuous_graph(alpha: f64, lambda: f64, closed: bool) -> Self {
        ProcedureConfig {
            alpha,
            kind: ProcedureKind::ContinuousGraph {
                gamma: SpendingSequence::InverseSquare,
                graph: GraphWeights::Shifted(SpendingSequence::InverseSquare),
                lambda: Schedule::Constant(lambda),
                closed,
            },
        }
    }

    /// Continuous spending with the interpolation f_γ of γⱼ = 6(πj)⁻².
    pub fn continuous_spending(alpha: f64, lambda: f64, closed: bool) -> Result<Self> {
        Ok(ProcedureConfig {
            alpha,
            kind: ProcedureKind::ContinuousSpending {
                function: make_interpolation_function(SpendingSequence::InverseSquare, lambda)?,
                closed,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("alpha", self.alpha)?;
        match &self.kind {
            ProcedureKind::AlphaSpending { gamma } => gamma.validate(),
            ProcedureKind::AdaptiveSpending { gamma, lambda } => {
                check_open_unit("lambda", *lambda)?;
                gamma.validate()
            }
            ProcedureKind::OnlineFallback { gamma, graph } => {
                gamma.validate()?;
                graph.validate()
            }
            ProcedureKind::Geometric { pi, lambda } => {
                pi.validate_open_unit("pi")?;
                lambda.validate_open_unit("lambda")
            }
            ProcedureKind::ContinuousGraph {
                gamma, graph, lambda, ..
            } => {
                gamma.validate()?;
                graph.validate()?;
                lambda.validate_open_unit("lambda")
            }
            ProcedureKind::ContinuousSpending { function, .. } => {
                check_open_unit("lambda", function.lambda())?;
                if function.scaling().is_nan() || function.scaling() <= 0.0 {
                    return Err(invalid("spending function", "scaling must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Stable identifier used by the CLI configuration and CSV output.
    pub fn id(&self) -> &'static str {
        match self.kind {
            ProcedureKind::AlphaSpending { .. } => "alpha-spending",
            ProcedureKind::AdaptiveSpending { .. } => "adaptive-spending",
            ProcedureKind::OnlineFallback { .. } => "online-fallback",
            ProcedureKind::Geometric { .. } => "geometric",
            ProcedureKind::ContinuousGraph { .. } => "continuous-graph",
            ProcedureKind::ContinuousSpending { .. } => "continuous-spending",
        }
    }

    pub fn is_closed(&self) -> bool {
        match self.kind {
            ProcedureKind::OnlineFallback { .. } => true,
            ProcedureKind::ContinuousGraph { closed, .. } | ProcedureKind::ContinuousSpending { closed, .. } => closed,
            _ => false,
        }
    }

    /// λᵢ the procedure uses at step `i`, if it has one.
    pub fn lambda_at(&self, i: usize) -> Option<f64> {
        match &self.kind {
            ProcedureKind::AlphaSpending { .. } | ProcedureKind::OnlineFallback { .. } => None,
            ProcedureKind::AdaptiveSpending { lambda, .. } => Some(*lambda),
            ProcedureKind::Geometric { lambda, .. } | ProcedureKind::ContinuousGraph { lambda, .. } => {
                Some(lambda.at(i))
            }
            ProcedureKind::ContinuousSpending { function, .. } => Some(function.lambda()),
        }
    }

    /// λᵢ entering the budget sum Σ αᵢ ξᵢ / (1 − λᵢ). Procedures without
    /// adaptivity are audited with λᵢ = 0.
    pub fn budget_lambda(&self, i: usize) -> f64 {
        self.lambda_at(i).unwrap_or(0.0)
    }

    /// The weight the rule actually consumes for this record: ξ for the
    /// weight-based rules, 1 − C = 1{p > λ} for Adaptive-Spending and a
    /// constant 1 for the non-adaptive rules.
    pub fn effective_weight(&self, record: &PValueRecord) -> f64 {
        match &self.kind {
            ProcedureKind::AlphaSpending { .. } | ProcedureKind::OnlineFallback { .. } => 1.0,
            ProcedureKind::AdaptiveSpending { lambda, .. } => {
                if record.p > *lambda {
                    1.0
                } else {
                    0.0
                }
            }
            _ => record.weight,
        }
    }
}

pub fn level_alpha_spending(step: usize, alpha: f64, gamma: &SpendingSequence) -> f64 {
    alpha * gamma.gamma(step)
}

/// `history[j].weight` holds 1 − C_j.
pub fn level_adaptive_spending(history: &[Step], alpha: f64, gamma: &SpendingSequence, lambda: f64) -> f64 {
    let t = 1 + history.iter().filter(|s| s.weight > 0.5).count();
    alpha * (1.0 - lambda) * gamma.gamma(t)
}

pub fn level_online_fallback(history: &[Step], alpha: f64, gamma: &SpendingSequence, graph: &GraphWeights) -> f64 {
    let i = history.len() + 1;
    let inflow: f64 = history
        .iter()
        .enumerate()
        .filter(|(_, s)| s.rejected)
        .map(|(j, s)| graph.g(j + 1, i) * s.level)
        .sum();
    alpha * gamma.gamma(i) + inflow
}

/// Evaluated through the remaining budget
/// α − Σ_{j<i} α_j ξ_j / (1 − λ_j) = α ∏_{j<i} (1 − Π_j ξ_j),
/// which avoids the cancellation of the subtraction once most of α is spent.
pub fn level_geometric(history: &[Step], alpha: f64, pi: &Schedule, lambda: &Schedule) -> f64 {
    let i = history.len() + 1;
    let remaining = history
        .iter()
        .enumerate()
        .fold(alpha, |acc, (j, s)| acc * (1.0 - pi.at(j + 1) * s.weight));
    pi.at(i) * (1.0 - lambda.at(i)) * remaining
}

/// One step of the geometric recursion
/// α_{i+1} = Π_{i+1}(1 − λ_{i+1}) α_i (1 − Πᵢ ξᵢ) / ((1 − λᵢ) Πᵢ).
pub fn geometric_recursion_step(
    level: f64,
    weight: f64,
    (pi, lambda): (f64, f64),
    (pi_next, lambda_next): (f64, f64),
) -> f64 {
    pi_next * (1.0 - lambda_next) * level * (1.0 - pi * weight) / ((1.0 - lambda) * pi)
}

pub fn level_continuous_graph(
    history: &[Step],
    alpha: f64,
    gamma: &SpendingSequence,
    graph: &GraphWeights,
    lambda: &Schedule,
    closed: bool,
) -> f64 {
    let i = history.len() + 1;
    let inflow: f64 = history
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let unspent = graph_unspent(s.weight, s.rejected, closed);
            graph.g(j + 1, i) * unspent * s.level / (1.0 - lambda.at(j + 1))
        })
        .sum();
    (1.0 - lambda.at(i)) * (alpha * gamma.gamma(i) + inflow)
}

pub fn level_continuous_spending(history: &[Step], alpha: f64, function: &SpendingFunction, closed: bool) -> f64 {
    let argument: f64 = history
        .iter()
        .filter(|s| !(closed && s.rejected))
        .map(|s| s.weight)
        .sum();
    spending_level(alpha, function, argument)
}

#[inline]
fn graph_unspent(weight: f64, rejected: bool, closed: bool) -> f64 {
    if closed && rejected {
        1.0
    } else {
        1.0 - weight
    }
}

#[inline]
fn spending_level(alpha: f64, function: &SpendingFunction, weight_sum: f64) -> f64 {
    alpha * (1.0 - function.lambda()) / function.scaling() * function.eval(1.0 + weight_sum)
}

/// Evaluates the level rule of `config` on a recorded history from scratch.
pub fn level_from_history(config: &ProcedureConfig, history: &[Step]) -> f64 {
    let alpha = config.alpha;
    match &config.kind {
        ProcedureKind::AlphaSpending { gamma } => level_alpha_spending(history.len() + 1, alpha, gamma),
        ProcedureKind::AdaptiveSpending { gamma, lambda } => level_adaptive_spending(history, alpha, gamma, *lambda),
        ProcedureKind::OnlineFallback { gamma, graph } => level_online_fallback(history, alpha, gamma, graph),
        ProcedureKind::Geometric { pi, lambda } => level_geometric(history, alpha, pi, lambda),
        ProcedureKind::ContinuousGraph {
            gamma,
            graph,
            lambda,
            closed,
        } => level_continuous_graph(history, alpha, gamma, graph, lambda, *closed),
        ProcedureKind::ContinuousSpending { function, closed } => {
            level_continuous_spending(history, alpha, function, *closed)
        }
    }
}

/// Incremental accumulators behind a running session.
#[derive(Debug, Clone)]
pub(crate) enum LevelState {
    AlphaSpending,
    AdaptiveSpending {
        non_candidates: usize,
    },
    /// α − Σ_{j<i} α_j ξ_j / (1 − λ_j), updated multiplicatively.
    Geometric {
        remaining: f64,
    },
    /// `credits[j]` = u_j α_j / (1 − λ_j) for each completed source step.
    Graph {
        credits: Vec<f64>,
    },
    Spending {
        weight_sum: f64,
    },
}

impl LevelState {
    pub(crate) fn new(config: &ProcedureConfig) -> Self {
        match config.kind {
            ProcedureKind::AlphaSpending { .. } => LevelState::AlphaSpending,
            ProcedureKind::AdaptiveSpending { .. } => LevelState::AdaptiveSpending { non_candidates: 0 },
            ProcedureKind::Geometric { .. } => LevelState::Geometric {
                remaining: config.alpha,
            },
            ProcedureKind::OnlineFallback { .. } | ProcedureKind::ContinuousGraph { .. } => {
                LevelState::Graph { credits: Vec::new() }
            }
            ProcedureKind::ContinuousSpending { .. } => LevelState::Spending { weight_sum: 0.0 },
        }
    }

    /// Level for step `i` (1-based) given the accumulated steps 1..i−1.
    pub(crate) fn level(&self, config: &ProcedureConfig, i: usize) -> f64 {
        let alpha = config.alpha;
        match (self, &config.kind) {
            (LevelState::AlphaSpending, ProcedureKind::AlphaSpending { gamma }) => {
                level_alpha_spending(i, alpha, gamma)
            }
            (LevelState::AdaptiveSpending { non_candidates }, ProcedureKind::AdaptiveSpending { gamma, lambda }) => {
                alpha * (1.0 - lambda) * gamma.gamma(1 + non_candidates)
            }
            (LevelState::Geometric { remaining }, ProcedureKind::Geometric { pi, lambda }) => {
                pi.at(i) * (1.0 - lambda.at(i)) * remaining
            }
            (LevelState::Graph { credits }, ProcedureKind::OnlineFallback { gamma, graph }) => {
                alpha * gamma.gamma(i) + graph_inflow(credits, graph, i)
            }
            (
                LevelState::Graph { credits },
                ProcedureKind::ContinuousGraph {
                    gamma, graph, lambda, ..
                },
            ) => (1.0 - lambda.at(i)) * (alpha * gamma.gamma(i) + graph_inflow(credits, graph, i)),
            (LevelState::Spending { weight_sum }, ProcedureKind::ContinuousSpending { function, .. }) => {
                spending_level(alpha, function, *weight_sum)
            }
            _ => unreachable!("level state does not match procedure kind"),
        }
    }

    /// Folds completed step `i` into the accumulators.
    pub(crate) fn observe(&mut self, config: &ProcedureConfig, i: usize, step: &Step) {
        match (self, &config.kind) {
            (LevelState::AlphaSpending, _) => {}
            (LevelState::AdaptiveSpending { non_candidates }, _) => {
                if step.weight > 0.5 {
                    *non_candidates += 1;
                }
            }
            (LevelState::Geometric { remaining }, ProcedureKind::Geometric { pi, .. }) => {
                *remaining *= 1.0 - pi.at(i) * step.weight;
            }
            (LevelState::Graph { credits }, ProcedureKind::OnlineFallback { .. }) => {
                credits.push(if step.rejected { step.level } else { 0.0 });
            }
            (LevelState::Graph { credits }, ProcedureKind::ContinuousGraph { lambda, closed, .. }) => {
                let unspent = graph_unspent(step.weight, step.rejected, *closed);
                credits.push(unspent * step.level / (1.0 - lambda.at(i)));
            }
            (LevelState::Spending { weight_sum }, ProcedureKind::ContinuousSpending { closed, .. }) => {
                if !(*closed && step.rejected) {
                    *weight_sum += step.weight;
                }
            }
            _ => unreachable!("level state does not match procedure kind"),
        }
    }
}

fn graph_inflow(credits: &[f64], graph: &GraphWeights, i: usize) -> f64 {
    credits
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, c)| graph.g(j + 1, i) * c)
        .sum()
}
