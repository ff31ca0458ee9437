//! Batch runner for simulation studies: TOML configs in, CSV results and a
//! reproducible manifest out.

pub mod config;
pub mod runner;

pub use config::{ConfigError, RunConfig};
pub use runner::{audit, run, run_audit, simulate, Overrides, RunFiles, THREADS_ENV};
