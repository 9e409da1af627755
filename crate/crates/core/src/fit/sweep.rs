use serde::{Deserialize, Serialize};

use super::config::{FitConfig, InitPolicy};
use super::descent::{best_of, initial_params, report_from_outcomes};
use super::report::FitReport;
use crate::error::{Error, Result};
use crate::grid::AccuracyGrid;
use crate::surface::{SemanticLossParams, SurfaceData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub n_terms: usize,
    /// The zero-padded warm start from the previous entry won.
    pub warm_start_won: bool,
    pub report: Option<FitReport>,
    pub error: Option<String>,
}

/// Fit each term count in `nc_range`. Beyond the configured random starts,
/// every entry after the first also descends from the previous optimum
/// padded with zero terms, so its final SSE cannot exceed the previous one.
pub fn nc_sweep(grid: &AccuracyGrid, nc_range: &[usize], config: &FitConfig) -> Result<Vec<SweepEntry>> {
    config.validate()?;
    if nc_range.is_empty() {
        return Err(Error::InvalidArgument("empty term-count range".into()));
    }
    if nc_range[0] == 0 || nc_range.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "term counts must be >= 1 and strictly ascending".into(),
        ));
    }
    if matches!(config.init_policy, InitPolicy::WarmStart(_)) {
        return Err(Error::InvalidArgument("a sweep cannot use a fixed warm start".into()));
    }

    let data = SurfaceData::from_grid(grid, config.q_divisor());
    let mut previous: Option<SemanticLossParams> = None;
    let mut entries = Vec::with_capacity(nc_range.len());
    for &nc in nc_range {
        let result = initial_params(&data, nc, config).and_then(|mut inits| {
            let random_starts = inits.len();
            if let Some(prev) = &previous {
                let mut padded = prev.clone();
                while padded.n_terms() < nc {
                    padded = padded.padded_with_zero_term();
                }
                inits.push(padded);
            }
            let (outcomes, best) = best_of(inits, &data, config);
            let report = report_from_outcomes(outcomes, best, &data, grid, config)?;
            Ok((report, best.is_some_and(|b| b >= random_starts)))
        });
        entries.push(match result {
            Ok((report, warm_start_won)) => {
                previous = report.surface_params().cloned();
                SweepEntry { n_terms: nc, warm_start_won, report: Some(report), error: None }
            }
            Err(e) => SweepEntry { n_terms: nc, warm_start_won: false, report: None, error: Some(e.to_string()) },
        });
    }
    Ok(entries)
}
