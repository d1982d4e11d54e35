use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{SuiteConfig, SuiteKind};
use crate::error::Result;
use crate::io::Container;

/// One verification case. The pass flag is `ratio <= tol` with `ratio = lhs / rhs`, so every
/// flag can be recomputed from the stored numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub case: String,
    pub param_json: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tol: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl ReportRow {
    pub fn new(suite: SuiteKind, case: String, param_json: String, lhs: f64, rhs: f64, tol: f64, seconds: f64) -> Self {
        let ratio = lhs / rhs;
        Self { suite: suite.name().to_string(), case, param_json, lhs, rhs, ratio, tol, pass: ratio <= tol, seconds }
    }

    /// The row with its timing column blanked; identical configs give identical payloads.
    pub fn payload(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.suite,
            self.case,
            csv_quote(&self.param_json),
            fmt_num(self.lhs),
            fmt_num(self.rhs),
            fmt_num(self.ratio),
            fmt_num(self.tol),
            self.pass
        )
    }

    pub fn recomputed_pass(&self) -> bool {
        self.lhs / self.rhs <= self.tol
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const REPORT_HEADER: &str = "suite,case,param_json,lhs,rhs,ratio,tol,pass,seconds";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseFailure {
    pub case: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub version: String,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest finite ratio over the rows.
    pub max_ratio: f64,
    pub failures: Vec<CaseFailure>,
    pub config: SuiteConfig,
}

/// A binary artifact written next to the report.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub container: Container,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub suite: SuiteKind,
    pub config: SuiteConfig,
    pub rows: Vec<ReportRow>,
    /// Error messages of cases that could not be evaluated, keyed by case id.
    pub errors: Vec<CaseFailure>,
    pub artifacts: Vec<Artifact>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<CaseFailure> {
        self.rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| {
                let reason = self
                    .errors
                    .iter()
                    .find(|e| e.case == r.case)
                    .map(|e| e.reason.clone())
                    .unwrap_or_else(|| format!("ratio {} exceeds tolerance {}", fmt_num(r.ratio), fmt_num(r.tol)));
                CaseFailure { case: r.case.clone(), reason }
            })
            .collect()
    }

    pub fn summary(&self) -> Summary {
        let failures = self.failures();
        Summary {
            suite: self.suite.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            cases: self.rows.len(),
            passed: self.rows.len() - failures.len(),
            failed: failures.len(),
            max_ratio: self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).fold(0.0, f64::max),
            failures,
            config: self.config.clone(),
        }
    }

    /// Rows without timing, one per line.
    pub fn payload(&self) -> String {
        self.rows.iter().map(|r| r.payload() + "\n").collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                r.suite.clone(),
                r.case.clone(),
                r.param_json.clone(),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.ratio),
                fmt_num(r.tol),
                r.pass.to_string(),
                format!("{:.6}", r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `report.csv`, `summary.json` and the binary artifacts into `dir`; returns the
    /// written paths.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let csv_path = dir.join("report.csv");
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        paths.push(csv_path);
        let json_path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&self.summary())?;
        std::fs::write(&json_path, text + "\n")?;
        paths.push(json_path);
        for a in &self.artifacts {
            let p = dir.join(&a.name);
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent)?;
            }
            a.container.save(&p)?;
            paths.push(p);
        }
        Ok(paths)
    }
}
