//! Command-line front end: suite registry, configuration and reports.

pub mod config;
pub mod report;
pub mod suites;

use crate::error::{Error, Result};

pub use config::ExperimentConfig;
pub use report::{Check, Report, Series, SuiteOutput};

/// Suites in the order `list` prints them.
pub const SUITES: [&str; 7] = ["identities", "gmc", "loewner", "invariance", "dirichlet", "dynamics", "appendix"];

/// Run one suite; the report is not written.
pub fn run(cfg: &ExperimentConfig) -> Result<(Report, SuiteOutput)> {
    cfg.validate()?;
    let out = suites::run_suite(cfg)?;
    Ok((Report::new(cfg, &out), out))
}

/// Text printed by `describe <suite>`: one `id  description` line per check.
pub fn describe(suite: &str) -> Result<String> {
    let inv = suites::inventory(suite).ok_or_else(|| Error::UnknownSuite(suite.to_string()))?;
    let width = inv.iter().map(|(id, _)| id.len()).max().unwrap_or(0);
    Ok(inv.iter().map(|(id, d)| format!("{id:width$}  {d}\n")).collect())
}
