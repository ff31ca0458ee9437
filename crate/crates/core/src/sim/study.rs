use super::{run_procedure, ReplicationOutcome, ReplicationSummary, Scenario};
use crate::error::{invalid, Result};
use crate::procedures::ProcedureConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator for replication `replication` of a study seeded with `seed`.
///
/// Each replication owns its own ChaCha stream, so results do not depend on
/// how replications are scheduled across threads.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Draws `replications` datasets and runs every procedure on each one.
/// Returns `f`'s results indexed `[procedure][replication]`.
///
/// Runs on the current rayon pool; wrap in `ThreadPool::install` to pin the
/// thread count.
pub fn map_replications<T, F>(
    scenario: &Scenario,
    procedures: &[ProcedureConfig],
    replications: usize,
    seed: u64,
    f: F,
) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(usize, &ProcedureConfig, ReplicationOutcome) -> T + Sync,
{
    if replications == 0 {
        return Err(invalid("replications", "must be at least 1"));
    }
    scenario.validate()?;
    for config in procedures {
        config.validate()?;
    }
    let weights = scenario.weights();
    let lambda = scenario.lambda();
    let per_replication: Vec<Vec<T>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(seed, r as u64);
            let dataset = scenario.draw(&mut rng);
            procedures
                .iter()
                .enumerate()
                .map(|(k, config)| run_procedure(&dataset, config, weights, lambda).map(|o| f(k, config, o)))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;

    let mut by_procedure: Vec<Vec<T>> = procedures.iter().map(|_| Vec::with_capacity(replications)).collect();
    for row in per_replication {
        for (k, value) in row.into_iter().enumerate() {
            by_procedure[k].push(value);
        }
    }
    Ok(by_procedure)
}

/// Runs a paired study: within a replication every procedure sees the same
/// data. Returns per-procedure replication summaries in replication order.
pub fn run_study(
    scenario: &Scenario,
    procedures: &[ProcedureConfig],
    replications: usize,
    seed: u64,
) -> Result<Vec<Vec<ReplicationSummary>>> {
    map_replications(scenario, procedures, replications, seed, |_, _, outcome| {
        outcome.summary()
    })
}
