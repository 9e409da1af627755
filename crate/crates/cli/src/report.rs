//! JSON report envelope and TSV plot tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use semloss_core::fit::{FitReport, SweepEntry};
use semloss_core::Family;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: CommandEcho,
    pub source: String,
    pub report: ReportBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    /// Arguments as given, minus the output directory.
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit1dEntry {
    pub family: Family,
    pub report: Option<FitReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub q_divisor: f64,
    pub accuracy_divisor: f64,
    pub mape: Option<f64>,
    pub max_abs_prediction: Option<f64>,
    /// 0-based term with the largest |contribution| where |ξ| peaks.
    pub dominant_term: Option<usize>,
    /// Set when an exponent left the guarded range.
    pub overflow: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedCheck {
    pub seed_index: usize,
    pub max_rel_error: f64,
    pub worst_component: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Fit1d {
        s_value: Option<f64>,
        fits: Vec<Fit1dEntry>,
        best_family: Option<Family>,
    },
    Fit2d {
        n_terms: usize,
        report: FitReport,
    },
    Sweep {
        entries: Vec<SweepEntry>,
    },
    DiagnoseTable3 {
        hypotheses: Vec<Hypothesis>,
    },
    Gradcheck {
        n_terms: usize,
        step: f64,
        tolerance: f64,
        checks: Vec<SeedCheck>,
        max_rel_error: f64,
        passed: bool,
    },
    Linkcalc {
        rate_bps_hz: f64,
        gamma_db: Option<f64>,
        gamma_shannon_db: f64,
        ratio: Option<f64>,
    },
}

impl ReportDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, dir: &Path, file: &str) -> Result<()> {
        write_file(dir, file, &self.to_json()?)
    }
}

pub fn write_file(dir: &Path, file: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(file);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Tab-separated table with a header row. Every cell must be finite.
pub fn tsv(header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        ensure!(row.iter().all(|v| v.is_finite()), "non-finite value in plot table");
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join("\t"))?;
    }
    Ok(out)
}

/// Echo of argv with `--out DIR` / `--out=DIR` removed.
pub fn echo_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
