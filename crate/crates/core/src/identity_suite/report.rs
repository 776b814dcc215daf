use std::fmt::Write as _;
use std::str::FromStr;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};

use super::CaseTag;
use crate::error::{Error, Result};

/// A point whose evaluation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub index: usize,
    pub error: String,
}

/// Outcome of one check in one cell. `pass` holds exactly when every point
/// evaluated and `max_residual < tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub paper_eq: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub case: CaseTag,
    /// Modulus as `[re, im]`, absent outside the elliptic case.
    pub tau: Option<[f64; 2]>,
    pub order: Option<usize>,
    pub samples: usize,
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
    pub failed_points: Vec<FailedPoint>,
}

/// Run metadata, kept apart from the deterministic payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub timestamp: String,
    pub version: String,
    pub convention_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub header: ReportHeader,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::InvalidPlan(format!("unknown report format {other:?}"))),
        }
    }
}

fn sci(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn tau_text(tau: Option<[f64; 2]>) -> String {
    tau.map_or_else(|| "-".to_string(), |[re, im]| format!("{re}+{im}i"))
}

impl SuiteReport {
    pub fn new(convention_note: String, checks: Vec<CheckReport>) -> Self {
        let header = ReportHeader {
            timestamp: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            convention_note,
        };
        Self { header, checks }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// The check list as JSON; identical for identical plans.
    pub fn payload_json(&self) -> String {
        serde_json::to_string_pretty(&self.checks).expect("reports serialize")
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => Ok(serde_json::to_string_pretty(self).expect("reports serialize") + "\n"),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Text => Ok(self.to_text()),
        }
    }

    fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidPlan(format!("csv output failed: {e}"));
        w.write_record([
            "id", "paper_eq", "N", "case", "tau_re", "tau_im", "order", "samples", "max_residual",
            "mean_residual", "tolerance", "pass", "failed_points", "note",
        ])
        .map_err(io)?;
        for c in &self.checks {
            let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:e}"));
            let (re, im) = c.tau.map_or((None, None), |[a, b]| (Some(a), Some(b)));
            w.write_record([
                c.id.clone(),
                c.paper_eq.clone(),
                c.n.to_string(),
                c.case.to_string(),
                opt(re),
                opt(im),
                c.order.map_or_else(String::new, |o| o.to_string()),
                c.samples.to_string(),
                opt(c.max_residual),
                opt(c.mean_residual),
                format!("{:e}", c.tolerance),
                c.pass.to_string(),
                c.failed_points.len().to_string(),
                c.note.clone(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidPlan(format!("csv output failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let h = &self.header;
        let _ = writeln!(out, "ybx {} at {}", h.version, h.timestamp);
        let _ = writeln!(out, "{}", h.convention_note);
        let _ = writeln!(
            out,
            "{:<14} {:>2} {:<13} {:<9} {:>5} {:>7} {:>10} {:>10} {:>8}  result",
            "id", "N", "case", "tau", "order", "samples", "max", "mean", "tol"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<14} {:>2} {:<13} {:<9} {:>5} {:>7} {:>10} {:>10} {:>8.0e}  {}",
                c.id,
                c.n,
                c.case.name(),
                tau_text(c.tau),
                c.order.map_or_else(|| "-".to_string(), |o| o.to_string()),
                c.samples,
                sci(c.max_residual),
                sci(c.mean_residual),
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}
