use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use onfwer_cli::{run, run_audit, Overrides, RunConfig, THREADS_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "onfwer", version, about = "Online FWER simulation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study and write CSV results plus a manifest.
    Run(Common),
    /// Report the maximal budget partial sums along simulated streams.
    Audit(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Output path (the results CSV for `run`, the audit CSV for `audit`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

fn load(common: &Common, apply_out: bool) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::from_path(&common.config)?;
    Overrides {
        seed: common.seed,
        replications: common.replications,
        out: if apply_out { common.out.clone() } else { None },
        threads: common.threads,
    }
    .apply(&mut config);
    config.check()?;
    Ok(config)
}

fn main_inner(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(common) => {
            let config = load(&common, true)?;
            let files = run(&config).context("run failed")?;
            eprintln!(
                "wrote {} rows to {} (manifest {})",
                files.rows,
                files.csv.display(),
                files.manifest.display()
            );
        }
        Command::Audit(common) => {
            let config = load(&common, false)?;
            let (path, rows) = run_audit(&config, common.out.as_deref()).context("audit failed")?;
            for row in &rows {
                let flag = if row.within_budget { "ok" } else { "EXCEEDS" };
                println!(
                    "{:<24} n_hypotheses={} pi1={} max_partial_sum={:.6e} alpha={} exceedances={} {flag}",
                    row.label, row.n_hypotheses, row.pi1, row.max_partial_sum, row.alpha, row.exceedances
                );
            }
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
