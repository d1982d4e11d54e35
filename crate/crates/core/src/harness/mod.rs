//! Suite runner: builds a fixed case plan from a [`SuiteConfig`], evaluates every case in plan
//! order and collects the rows of a [`VerificationReport`].
//!
//! Each row stores `lhs`, `rhs`, `ratio = lhs / rhs` and a tolerance; a case passes iff
//! `ratio <= tol`. Ladder rows compare rows of the same plan on successive grids.

mod config;
mod report;
mod suites;

use std::time::Instant;

use serde::Serialize;

pub use config::{resolve_window, ConvTuple, GaborSteps, GridSpec, SuiteConfig, SuiteKind, WINDOW_IDS};
pub use report::{Artifact, CaseFailure, ReportRow, Summary, VerificationReport, REPORT_HEADER};

use crate::error::{Error, Result};

/// Process exit status for a finished run.
pub fn exit_code(report: &VerificationReport) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub cases: usize,
}

/// The fixed suite catalog with the case count of each default configuration.
pub fn list_suites() -> Vec<SuiteEntry> {
    SuiteKind::ALL
        .into_iter()
        .map(|s| SuiteEntry {
            name: s.name(),
            summary: s.summary(),
            cases: suites::plan(&SuiteConfig::default_for(s)).map(|p| p.len()).unwrap_or(0),
        })
        .collect()
}

/// Case ids of a configuration, in row order.
pub fn case_ids(config: &SuiteConfig) -> Result<Vec<String>> {
    Ok(suites::plan(config)?.into_iter().map(|c| c.id).collect())
}

/// Resolved parameters of one case. Without a configuration the suite default is used; the
/// suite is taken from the case id prefix.
pub fn describe(case: &str, config: Option<&SuiteConfig>) -> Result<serde_json::Value> {
    let suite_name = case.split('/').next().unwrap_or_default();
    let suite = SuiteKind::parse(suite_name).map_err(|_| Error::Config(format!("unknown case id {case:?}")))?;
    let owned;
    let cfg = match config {
        Some(c) if c.suite == suite => c,
        Some(c) => {
            return Err(Error::Config(format!("case {case:?} does not belong to suite {}", c.suite)));
        }
        None => {
            owned = SuiteConfig::default_for(suite);
            &owned
        }
    };
    let plan = suites::plan(cfg)?;
    let found = plan
        .into_iter()
        .find(|c| c.id == case)
        .ok_or_else(|| Error::Config(format!("unknown case id {case:?}")))?;
    Ok(serde_json::json!({
        "suite": suite.name(),
        "case": found.id,
        "tol": found.tol,
        "params": found.params,
    }))
}

/// Runs every case of the configured suite. Numerical failures inside a case produce a failed
/// row with `NaN` values; only configuration problems abort the run.
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    config.validate()?;
    let plan = suites::plan(config)?;
    let mut ctx = suites::Context::new(config)?;
    let mut rows = Vec::with_capacity(plan.len());
    let mut errors = Vec::new();
    for case in &plan {
        let start = Instant::now();
        let outcome = ctx.evaluate(case);
        let seconds = start.elapsed().as_secs_f64();
        let (lhs, rhs) = match outcome {
            Ok(v) => v,
            Err(e) => {
                errors.push(CaseFailure { case: case.id.clone(), reason: e.to_string() });
                (f64::NAN, f64::NAN)
            }
        };
        ctx.record(&case.id, lhs, rhs);
        let params = serde_json::to_string(&case.params)?;
        rows.push(ReportRow::new(config.suite, case.id.clone(), params, lhs, rhs, case.tol, seconds));
    }
    Ok(VerificationReport { suite: config.suite, config: config.clone(), rows, errors, artifacts: ctx.into_artifacts() })
}
