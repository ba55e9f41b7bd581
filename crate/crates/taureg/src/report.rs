//! Experiment reports: per-(tau, rule) rows with the selected alpha and the
//! relative reconstruction error, CSV serialization at 17 significant digits
//! (lossless f64 round trip) and report comparison for regression checks.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One row of a report table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub tau: f64,
    pub rule: String,
    pub alpha: f64,
    pub relative_error: f64,
}

/// A complete experiment report with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub seed: u64,
    pub config_hash: String,
    pub code_version: String,
}

/// Format a float with 17 significant digits so parsing it back is exact.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, seed: u64, config_hash: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            rows: Vec::new(),
            seed,
            config_hash: config_hash.into(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn push(&mut self, tau: f64, rule: impl Into<String>, alpha: f64, relative_error: f64) {
        self.rows.push(ReportRow {
            tau,
            rule: rule.into(),
            alpha,
            relative_error,
        });
    }

    /// Every configured (tau, rule) pair must appear exactly once.
    pub fn check_complete(&self, taus: &[f64], rules: &[String]) -> Result<()> {
        if self.rows.len() != taus.len() * rules.len() {
            return Err(Error::Contract(format!(
                "report has {} rows, expected {}",
                self.rows.len(),
                taus.len() * rules.len()
            )));
        }
        for &tau in taus {
            for rule in rules {
                let count = self
                    .rows
                    .iter()
                    .filter(|r| r.tau == tau && &r.rule == rule)
                    .count();
                if count != 1 {
                    return Err(Error::Contract(format!(
                        "(tau={tau}, rule={rule}) appears {count} times"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,rule,alpha,relative_error\n");
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_g17(row.tau),
                row.rule,
                fmt_g17(row.alpha),
                fmt_g17(row.relative_error)
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(experiment: &str, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line != "tau,rule,alpha,relative_error" {
                    return Err(Error::Config(format!("bad report header: {line:?}")));
                }
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Config(format!("bad report row: {line:?}")));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::Config(format!("bad number {s:?} in report")))
            };
            rows.push(ReportRow {
                tau: parse(parts[0])?,
                rule: parts[1].to_string(),
                alpha: parse(parts[2])?,
                relative_error: parse(parts[3])?,
            });
        }
        Ok(Self {
            experiment: experiment.to_string(),
            rows,
            seed: 0,
            config_hash: String::new(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    pub fn read_csv(experiment: &str, path: &Path) -> Result<Self> {
        Self::from_csv(experiment, &std::fs::read_to_string(path)?)
    }
}

/// Per-row deltas of two reports with the same shape.
#[derive(Debug, Clone)]
pub struct CompareSummary {
    /// (tau, rule, |delta alpha|, rel delta alpha, |delta error|, rel delta error)
    pub rows: Vec<(f64, String, f64, f64, f64, f64)>,
    pub max_abs_delta: f64,
    pub max_rel_delta: f64,
}

fn rel_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

/// Compare two reports row by row. The (tau, rule) sequences must match.
pub fn compare_reports(a: &ExperimentReport, b: &ExperimentReport) -> Result<CompareSummary> {
    if a.rows.len() != b.rows.len() {
        return Err(Error::Contract(format!(
            "report shapes differ: {} vs {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let mut rows = Vec::with_capacity(a.rows.len());
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        if ra.tau != rb.tau || ra.rule != rb.rule {
            return Err(Error::Contract(format!(
                "row mismatch: ({}, {}) vs ({}, {})",
                ra.tau, ra.rule, rb.tau, rb.rule
            )));
        }
        let da = (ra.alpha - rb.alpha).abs();
        let de = (ra.relative_error - rb.relative_error).abs();
        let rda = rel_delta(ra.alpha, rb.alpha);
        let rde = rel_delta(ra.relative_error, rb.relative_error);
        max_abs = max_abs.max(da).max(de);
        max_rel = max_rel.max(rda).max(rde);
        rows.push((ra.tau, ra.rule.clone(), da, rda, de, rde));
    }
    Ok(CompareSummary {
        rows,
        max_abs_delta: max_abs,
        max_rel_delta: max_rel,
    })
}
