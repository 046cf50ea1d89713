//! Verification harness: lemma suites, regularity reports, convergence studies
//! and manufactured-solution tests driven by TOML configurations.

pub mod cases;
pub mod config;
pub mod error;
pub mod lcg;
pub mod report;
pub mod suites;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat};
pub use error::{HarnessError, Result};
pub use report::{CheckReport, Level, Status};

/// Loads, validates and runs a configuration for the requested kind.
pub fn run_config(path: &std::path::Path, kind: ExperimentKind) -> Result<Vec<CheckReport>> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.validate(kind)?;
    suites::run(&cfg)
}
