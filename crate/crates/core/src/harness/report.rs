//! Report files: per-round CSV trajectories and a JSON summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TRAJECTORY_HEADER: &str = "t,rho,u_t,cum_regret";

/// One row of a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub rho: f64,
    pub u_t: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub seed: u64,
    pub opt: f64,
    pub realized: f64,
    pub regret: f64,
    /// Pipeline-specific numbers, keyed by name.
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionRow {
    pub seed: u64,
    pub w: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub pipeline: String,
    pub family: String,
    pub rounds: usize,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunSummary>,
    pub median_regret: Option<f64>,
    pub dispersion: Vec<DispersionRow>,
    pub bounds: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl Summary {
    /// Recomputes `all_pass` from the checks.
    pub fn finalize(mut self) -> Self {
        self.all_pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Parses and checks the summary schema, rejecting unknown fields and
    /// an `all_pass` that disagrees with the checks.
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Summary = serde_json::from_str(text).map_err(|e| Error::Io(format!("bad summary: {e}")))?;
        if s.all_pass != s.checks.iter().all(|c| c.pass) {
            return Err(Error::Io("bad summary: all_pass disagrees with checks".into()));
        }
        Ok(s)
    }
}

/// Trajectory CSV text; an empty slice gives only the header.
pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.t, r.rho, r.u_t, r.cum_regret);
    }
    out
}

/// Generic CSV text from a header and rows of already formatted cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Writes `summary.json` and every `(file name, contents)` table into `dir`.
pub fn emit_report(dir: &Path, summary: &Summary, tables: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(SUMMARY_FILE), summary.to_json()? + "\n")?;
    for (name, text) in tables {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

pub fn load_summary(dir: &Path) -> Result<Summary> {
    Summary::from_json(&std::fs::read_to_string(dir.join(SUMMARY_FILE))?)
}

/// Human-readable rendering of a summary.
pub fn render(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "pipeline {} | family {} | T = {} | seeds {:?}",
        summary.pipeline, summary.family, summary.rounds, summary.seeds
    );
    for r in &summary.runs {
        let _ = write!(
            out,
            "  seed {:>6}: opt {:.6} realized {:.6} regret {:.6}",
            r.seed, r.opt, r.realized, r.regret
        );
        for (k, v) in &r.extra {
            let _ = write!(out, " {k} {v:.6}");
        }
        out.push('\n');
    }
    if let Some(m) = summary.median_regret {
        let _ = writeln!(out, "  median regret {m:.6}");
    }
    for (k, v) in &summary.bounds {
        let _ = writeln!(out, "  bound {k} = {v:.6}");
    }
    for c in &summary.checks {
        let _ = writeln!(
            out,
            "  [{}] {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let _ = writeln!(out, "overall: {}", if summary.all_pass { "PASS" } else { "FAIL" });
    out
}
