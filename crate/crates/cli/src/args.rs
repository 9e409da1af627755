use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use semloss_core::fit::FitConfig;

#[derive(Debug, Parser)]
#[command(name = "semloss", version, about = "Fit and diagnose task-oriented semantic-loss models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit 1-D families to one s column of a grid (accuracy vs q).
    Fit1d(Fit1dArgs),
    /// Fit the sigmoid × exponential surface to a whole grid.
    Fit2d(Fit2dArgs),
    /// Fit a range of term counts with warm-start chaining.
    Sweep(SweepArgs),
    /// Evaluate the published 4-term parameters under several input conventions.
    #[command(name = "diagnose-table3")]
    DiagnoseTable3(DiagnoseArgs),
    /// Compare analytic surface gradients with central differences.
    Gradcheck(GradcheckArgs),
    /// Shannon-limit SNR and actual-to-Shannon ratio for one operating point.
    Linkcalc(LinkcalcArgs),
    /// Dump an embedded fixture as CSV.
    #[command(name = "export-fixture")]
    ExportFixture(ExportArgs),
}

#[derive(Debug, Args, Clone)]
pub struct SourceArgs {
    /// Embedded fixture name (table1, table2, table3, sigmoid_fig5).
    #[arg(long, conflicts_with = "csv")]
    pub fixture: Option<String>,
    /// Grid CSV file (`q\s` header layout).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Output directory for reports and plot tables.
    #[arg(long, default_value = "semloss-out")]
    pub out: PathBuf,
    /// Omit timestamps so repeated runs produce identical reports.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args, Clone)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iteration budget per start.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Number of seeded starts.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Relative SSE-change stopping threshold.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Feed q/100 to the surface model.
    #[arg(long)]
    pub normalize_q: bool,
    #[arg(long, overrides_with = "no_safeguard")]
    pub safeguard: bool,
    /// Accept every descent step, even ones that raise SSE.
    #[arg(long, overrides_with = "safeguard")]
    pub no_safeguard: bool,
    /// Keep summing gradients across iterations instead of resetting them.
    #[arg(long)]
    pub literal_accumulate: bool,
}

impl ConfigArgs {
    pub fn to_config(&self) -> FitConfig {
        let d = FitConfig::default();
        FitConfig {
            seed: self.seed,
            max_iterations: self.iters.unwrap_or(d.max_iterations),
            starts: self.starts.unwrap_or(d.starts),
            rel_tolerance: self.rel_tol.unwrap_or(d.rel_tolerance),
            normalize_q: self.normalize_q,
            safeguard: !self.no_safeguard,
            literal_accumulate: self.literal_accumulate,
            ..d
        }
    }
}

#[derive(Debug, Args)]
pub struct Fit1dArgs {
    /// poly2, poly3, log, exp1, exp2, sigmoid, or `all` (the five classic families).
    #[arg(long, default_value = "all")]
    pub family: String,
    /// Index of the s column to fit.
    #[arg(long, default_value_t = 0)]
    pub s_col: usize,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Fit2dArgs {
    /// Number of sigmoid × exponential terms.
    #[arg(long, default_value_t = 4)]
    pub nc: usize,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    pub nc_min: usize,
    #[arg(long, default_value_t = 4)]
    pub nc_max: usize,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Divisors applied to q before evaluation (repeatable; default 1, 100, 1000).
    #[arg(long = "q-scale", value_delimiter = ',')]
    pub q_scales: Vec<f64>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Number of random parameter draws.
    #[arg(long, default_value_t = 200)]
    pub seeds: usize,
    #[arg(long, default_value_t = 4)]
    pub nc: usize,
    /// Relative finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    pub step: f64,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LinkcalcArgs {
    /// Transmission rate, bit/s/Hz.
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    /// Received SNR, dB.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_db: Option<f64>,
    /// Also write a JSON report to this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// table1, table2, table3 or sigmoid_fig5.
    #[arg(long)]
    pub name: String,
    /// Write `<name>.csv` here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
