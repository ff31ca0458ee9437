//! Session protocol: idempotent level issue, replay, predictability and
//! agreement between the incremental state and the from-history formulas.

use onfwer::procedures::{level_from_history, GraphWeights, Schedule, SpendingSequence};
use onfwer::{PValueRecord, ProcedureConfig, ProcedureKind, SpendingFunction, Step, StreamState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_procedures() -> Vec<ProcedureConfig> {
    vec![
        ProcedureConfig::alpha_spending(0.05),
        ProcedureConfig::adaptive_spending(0.05, 0.5),
        ProcedureConfig::online_fallback(0.05),
        ProcedureConfig::geometric(0.05, 0.1, 0.5),
        ProcedureConfig::continuous_graph(0.05, 0.5, false),
        ProcedureConfig::continuous_graph(0.05, 0.3, true),
        ProcedureConfig::continuous_spending(0.05, 0.5, false).unwrap(),
        ProcedureConfig::continuous_spending(0.05, 0.5, true).unwrap(),
        ProcedureConfig::new(
            0.1,
            ProcedureKind::ContinuousSpending {
                function: SpendingFunction::power(2.0, 4.0, 0.5).unwrap(),
                closed: false,
            },
        )
        .unwrap(),
        ProcedureConfig::new(
            0.05,
            ProcedureKind::Geometric {
                pi: Schedule::PerIndex(vec![0.05, 0.2, 0.1]),
                lambda: Schedule::PerIndex(vec![0.3, 0.6, 0.5, 0.8]),
            },
        )
        .unwrap(),
    ]
}

fn random_record(rng: &mut ChaCha8Rng) -> PValueRecord {
    // Small p-values often enough to exercise the rejection paths.
    let p = if rng.random_bool(0.3) {
        rng.random::<f64>() * 0.02
    } else {
        rng.random::<f64>()
    };
    PValueRecord::new(p, rng.random::<f64>(), 100).unwrap()
}

#[test]
fn next_level_is_idempotent_between_reports() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for config in all_procedures() {
        let mut session = StreamState::new(config).unwrap();
        for _ in 0..20 {
            let a = session.next_level();
            let b = session.next_level();
            assert_eq!(a.to_bits(), b.to_bits());
            session.report(random_record(&mut rng)).unwrap();
        }
    }
}

#[test]
fn fifty_reports_replay_bit_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for config in all_procedures() {
        let mut session = StreamState::new(config.clone()).unwrap();
        let mut levels = Vec::new();
        for _ in 0..50 {
            levels.push(session.next_level());
            session.report(random_record(&mut rng)).unwrap();
        }
        assert_eq!(session.history().len(), 50);

        let mut replayed = StreamState::new(config).unwrap();
        for (step, level) in session.history().iter().zip(&levels) {
            let again = replayed.replay(step.weight, step.rejected);
            assert_eq!(again.to_bits(), level.to_bits());
        }
    }
}

#[test]
fn levels_depend_only_on_weights_and_rejections() {
    // Two p-value streams inducing the same rejection flags give the same
    // levels for weight-based procedures.
    let config = ProcedureConfig::continuous_graph(0.05, 0.5, true);
    let mut a = StreamState::new(config.clone()).unwrap();
    let mut b = StreamState::new(config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let la = a.next_level();
        let lb = b.next_level();
        assert_eq!(la.to_bits(), lb.to_bits());
        let weight = rng.random::<f64>();
        let reject = rng.random_bool(0.2);
        let (pa, pb) = if reject {
            (la * rng.random::<f64>(), la * rng.random::<f64>())
        } else {
            (
                la + (1.0 - la) * rng.random::<f64>(),
                la + (1.0 - la) * rng.random::<f64>(),
            )
        };
        let pa = if !reject && pa <= la { 1.0 } else { pa };
        let pb = if !reject && pb <= lb { 1.0 } else { pb };
        a.report(PValueRecord::new(pa, weight, 10).unwrap()).unwrap();
        b.report(PValueRecord::new(pb, weight, 10).unwrap()).unwrap();
    }
}

#[test]
fn incremental_state_matches_history_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for config in all_procedures() {
        let mut session = StreamState::new(config.clone()).unwrap();
        for _ in 0..300 {
            let incremental = session.next_level();
            let direct = level_from_history(&config, session.history());
            assert!(
                (incremental - direct).abs() <= 1e-13 * direct.abs().max(1e-300),
                "{}: {incremental} vs {direct}",
                config.id()
            );
            session.report(random_record(&mut rng)).unwrap();
        }
    }
}

/// Continuous Adaptive-Graph evaluated term by term from its definition.
fn graph_oracle(alpha: f64, lambda: f64, xi: &[f64], closed_rejections: Option<&[bool]>) -> Vec<f64> {
    let gamma = |k: usize| 6.0 / (std::f64::consts::PI * k as f64).powi(2);
    let mut levels: Vec<f64> = Vec::new();
    for i in 1..=xi.len() + 1 {
        let mut inflow = 0.0;
        for j in 1..i {
            let mut u = 1.0 - xi[j - 1];
            if let Some(r) = closed_rejections {
                if r[j - 1] {
                    u = u.max(1.0);
                }
            }
            inflow += gamma(i - j) * u * levels[j - 1] / (1.0 - lambda);
        }
        levels.push((1.0 - lambda) * (alpha * gamma(i) + inflow));
    }
    levels
}

#[test]
fn graph_after_three_steps_matches_explicit_formula() {
    let xi = [0.9, 0.1, 0.45];
    let expected = graph_oracle(0.05, 0.5, &xi, None);
    let mut session = StreamState::new(ProcedureConfig::continuous_graph(0.05, 0.5, false)).unwrap();
    for (k, &w) in xi.iter().enumerate() {
        assert!((session.next_level() - expected[k]).abs() < 1e-16);
        session.report(PValueRecord::new(0.9, w, 100).unwrap()).unwrap();
    }
    assert!((session.next_level() - expected[3]).abs() < 1e-16);

    // Closed variant with the second hypothesis rejected.
    let rejected = [false, true, false];
    let expected = graph_oracle(0.05, 0.5, &xi, Some(&rejected));
    let mut session = StreamState::new(ProcedureConfig::continuous_graph(0.05, 0.5, true)).unwrap();
    for (k, &w) in xi.iter().enumerate() {
        let level = session.next_level();
        assert!((level - expected[k]).abs() < 1e-16);
        let p = if rejected[k] { 0.0 } else { 0.9 };
        assert_eq!(
            session.report(PValueRecord::new(p, w, 100).unwrap()).unwrap().rejected,
            rejected[k]
        );
    }
    assert!((session.next_level() - expected[3]).abs() < 1e-16);
}

#[test]
fn explicit_graph_weights_route_level_forward() {
    // All of step 1's unspent level goes to step 3.
    let config = ProcedureConfig::new(
        0.05,
        ProcedureKind::ContinuousGraph {
            gamma: SpendingSequence::Explicit(vec![0.5, 0.25, 0.25]),
            graph: GraphWeights::Explicit(vec![vec![0.0, 1.0]]),
            lambda: Schedule::Constant(0.5),
            closed: false,
        },
    )
    .unwrap();
    let mut session = StreamState::new(config).unwrap();
    let a1 = session.next_level();
    assert!((a1 - 0.5 * 0.05 * 0.5).abs() < 1e-17);
    session.report(PValueRecord::new(0.9, 0.2, 10).unwrap()).unwrap();
    assert!((session.next_level() - 0.5 * 0.05 * 0.25).abs() < 1e-17);
    session.report(PValueRecord::new(0.9, 0.2, 10).unwrap()).unwrap();
    let expected = 0.5 * (0.05 * 0.25 + 0.8 * a1 / 0.5);
    assert!((session.next_level() - expected).abs() < 1e-17);
}

proptest! {
    #[test]
    fn rejection_iff_p_at_most_level(p in 0.0f64..=1.0, weight in 0.0f64..=1.0, steps in 0usize..10) {
        let mut session = StreamState::new(ProcedureConfig::continuous_graph(0.05, 0.5, true)).unwrap();
        for _ in 0..steps {
            session.next_level();
            session.report(PValueRecord::new(0.5, weight, 5).unwrap()).unwrap();
        }
        let level = session.next_level();
        let decision = session.report(PValueRecord::new(p, weight, 5).unwrap()).unwrap();
        prop_assert_eq!(decision.rejected, p <= level);
        prop_assert_eq!(decision.level, level);
    }

    #[test]
    fn levels_stay_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for config in all_procedures() {
            let mut session = StreamState::new(config).unwrap();
            for _ in 0..60 {
                let level = session.next_level();
                prop_assert!((0.0..=1.0).contains(&level));
                session.report(random_record(&mut rng)).unwrap();
            }
        }
    }
}

#[test]
fn history_steps_carry_effective_weights() {
    let mut session = StreamState::new(ProcedureConfig::adaptive_spending(0.05, 0.5)).unwrap();
    session.next_level();
    session.report(PValueRecord::new(0.2, 0.9, 10).unwrap()).unwrap();
    session.next_level();
    session.report(PValueRecord::new(0.8, 0.1, 10).unwrap()).unwrap();
    let weights: Vec<f64> = session.history().iter().map(|s: &Step| s.weight).collect();
    assert_eq!(weights, vec![0.0, 1.0]);
}
