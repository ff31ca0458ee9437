//! The `run` and `audit` commands.

use crate::config::{RunConfig, ScenarioSpec, SweepPoint};
use anyhow::Context;
use onfwer::sim::map_replications;
use onfwer::{aggregate, audit_budget};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Thread count override, read by the binary.
pub const THREADS_ENV: &str = "ONFWER_THREADS";

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(r) = self.replications {
            config.replications = r;
        }
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        if let Some(t) = self.threads {
            config.threads = Some(t);
        }
    }
}

/// One CSV row per (sweep point, procedure). Empty cells mark parameters
/// that do not apply to the scenario and undefined power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: &'static str,
    pub n_hypotheses: usize,
    pub sample_size: usize,
    pub pi1: f64,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub effect: f64,
    pub lambda: f64,
    pub procedure: &'static str,
    pub label: String,
    pub closed: bool,
    pub fwer_hat: f64,
    pub se_fwer: f64,
    pub power_hat: Option<f64>,
    pub se_power: Option<f64>,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub scenario: &'static str,
    pub n_hypotheses: usize,
    pub sample_size: usize,
    pub pi1: f64,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub procedure: &'static str,
    pub label: String,
    pub closed: bool,
    pub alpha: f64,
    /// Largest partial sum Σ_{i≤K} αᵢ ξᵢ / (1 − λᵢ) over K and replications.
    pub max_partial_sum: f64,
    /// Replications whose partial sums exceeded α.
    pub exceedances: usize,
    pub within_budget: bool,
    pub replications: usize,
    pub seed: u64,
}

/// Absolute slack for floating-point accumulation in the audit.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

fn point_columns(spec: &ScenarioSpec) -> (&'static str, usize, usize, f64, Option<f64>, Option<f64>) {
    let r = spec.resolve();
    (
        r.kind.as_str(),
        r.n_hypotheses.unwrap_or_default(),
        r.sample_size.unwrap_or_default(),
        r.pi1.unwrap_or_default(),
        r.rho,
        r.sigma,
    )
}

fn thread_pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    builder.build().context("cannot start worker threads")
}

/// Path of the manifest written next to `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.toml")
}

/// Path of the audit report for a config whose results go to `output`.
pub fn audit_path(output: &Path) -> PathBuf {
    output.with_extension("audit.csv")
}

/// Runs every sweep point and returns the CSV rows in grid order.
pub fn simulate(config: &RunConfig) -> anyhow::Result<Vec<ResultRow>> {
    let pool = thread_pool(config.threads)?;
    let mut rows = Vec::new();
    for point in config.sweep_points()? {
        rows.extend(simulate_point(config, &point, &pool)?);
    }
    Ok(rows)
}

fn simulate_point(config: &RunConfig, point: &SweepPoint, pool: &rayon::ThreadPool) -> anyhow::Result<Vec<ResultRow>> {
    let procedures = config.procedures_for(point)?;
    let summaries = pool.install(|| {
        map_replications(
            &point.scenario,
            &procedures,
            config.replications,
            config.seed,
            |_, _, outcome| outcome.summary(),
        )
    })?;
    let resolved = point.spec.resolve();
    let (scenario, n_hypotheses, sample_size, pi1, rho, sigma) = point_columns(&point.spec);
    procedures
        .iter()
        .zip(&config.procedures)
        .zip(&summaries)
        .map(|((procedure, spec), outcomes)| {
            let report = aggregate(outcomes)?;
            Ok(ResultRow {
                scenario,
                n_hypotheses,
                sample_size,
                pi1,
                rho,
                sigma,
                effect: resolved.effect.unwrap_or_default(),
                lambda: spec.lambda.or(resolved.lambda).unwrap_or_default(),
                procedure: procedure.id(),
                label: spec.name(),
                closed: procedure.is_closed(),
                fwer_hat: report.fwer_hat,
                se_fwer: report.se_fwer,
                power_hat: report.power_hat,
                se_power: report.se_power,
                replications: report.replications,
                seed: config.seed,
            })
        })
        .collect()
}

/// Runs the audit for every sweep point.
pub fn audit(config: &RunConfig) -> anyhow::Result<Vec<AuditRow>> {
    let pool = thread_pool(config.threads)?;
    let mut rows = Vec::new();
    for point in config.sweep_points()? {
        let procedures = config.procedures_for(&point)?;
        let maxima = pool.install(|| {
            map_replications(
                &point.scenario,
                &procedures,
                config.replications,
                config.seed,
                |_, procedure, outcome| {
                    let levels: Vec<f64> = outcome.records.iter().map(|r| r.level).collect();
                    let weights: Vec<f64> = outcome.records.iter().map(|r| r.effective_weight).collect();
                    let lambdas: Vec<f64> = (1..=levels.len()).map(|i| procedure.budget_lambda(i)).collect();
                    audit_budget(&levels, &weights, &lambdas, procedure.alpha).map(|a| a.max_partial_sum)
                },
            )
        })?;
        let (scenario, n_hypotheses, sample_size, pi1, rho, sigma) = point_columns(&point.spec);
        for ((procedure, spec), per_rep) in procedures.iter().zip(&config.procedures).zip(maxima) {
            let per_rep = per_rep.into_iter().collect::<onfwer::Result<Vec<f64>>>()?;
            let max_partial_sum = per_rep.iter().copied().fold(0.0, f64::max);
            let exceedances = per_rep
                .iter()
                .filter(|&&m| m > procedure.alpha + AUDIT_TOLERANCE)
                .count();
            rows.push(AuditRow {
                scenario,
                n_hypotheses,
                sample_size,
                pi1,
                rho,
                sigma,
                procedure: procedure.id(),
                label: spec.name(),
                closed: procedure.is_closed(),
                alpha: procedure.alpha,
                max_partial_sum,
                exceedances,
                within_budget: exceedances == 0,
                replications: config.replications,
                seed: config.seed,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

/// Resolves `config`, runs it and writes the CSV and manifest. Each sweep
/// point is appended to the CSV as soon as it finishes.
pub fn run(config: &RunConfig) -> anyhow::Result<RunFiles> {
    let resolved = config.resolve()?;
    let pool = thread_pool(resolved.threads)?;
    let csv_path = resolved.output.clone();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = std::fs::File::create(&csv_path).with_context(|| format!("cannot create {}", csv_path.display()))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut rows = 0;
    for point in resolved.sweep_points()? {
        for row in simulate_point(&resolved, &point, &pool)? {
            writer.serialize(&row)?;
            rows += 1;
        }
        writer.flush()?;
    }

    let manifest = manifest_path(&csv_path);
    let mut stored = resolved.clone();
    // Thread count does not affect results; keep the manifest portable.
    stored.threads = None;
    std::fs::write(&manifest, stored.to_toml()).with_context(|| format!("cannot write {}", manifest.display()))?;
    Ok(RunFiles {
        csv: csv_path,
        manifest,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
}

/// Runs the audit and writes its CSV to `out`, or next to the configured
/// output.
pub fn run_audit(config: &RunConfig, out: Option<&Path>) -> anyhow::Result<(PathBuf, Vec<AuditRow>)> {
    let resolved = config.resolve()?;
    let rows = audit(&resolved)?;
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| audit_path(&resolved.output));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    Ok((path, rows))
}
