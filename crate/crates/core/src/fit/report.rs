use serde::{Deserialize, Serialize};

use super::config::FitConfig;
use super::metrics;
use crate::model::Model1DParams;
use crate::surface::SemanticLossParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FittedParams {
    Surface(SemanticLossParams),
    Curve(Model1DParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ClosedForm,
    ExactFit,
    Tolerance,
    IterationBudget,
    /// Safeguarded descent rejected a step with every rate at its floor.
    StepFloor,
    /// Levenberg–Marquardt damping exceeded its ceiling.
    DampingCeiling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: FittedParams,
    pub sse: f64,
    /// Percent; `None` if any measured value is zero.
    pub mape: Option<f64>,
    pub r_squared: Option<f64>,
    /// Measured minus fitted, s-major for grids.
    pub residuals: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub iterations_used: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Index of the winning start, if several were run.
    pub best_start: Option<usize>,
    /// Final SSE per start; `None` for starts that failed.
    pub start_sse: Vec<Option<f64>>,
    pub config_echo: Option<FitConfig>,
    pub data_label: String,
}

impl FitReport {
    pub(crate) fn assemble(
        params: FittedParams,
        predicted: &[f64],
        actual: &[f64],
        data_label: &str,
    ) -> FitReport {
        let residuals: Vec<f64> = actual.iter().zip(predicted).map(|(a, p)| a - p).collect();
        let sse = residuals.iter().map(|r| r * r).sum();
        FitReport {
            params,
            sse,
            mape: metrics::mape(predicted, actual).ok(),
            r_squared: metrics::r_squared(predicted, actual).ok().flatten(),
            residuals,
            trace: Vec::new(),
            iterations_used: 0,
            converged: true,
            stop_reason: StopReason::ClosedForm,
            best_start: None,
            start_sse: Vec::new(),
            config_echo: None,
            data_label: data_label.to_string(),
        }
    }

    pub fn surface_params(&self) -> Option<&SemanticLossParams> {
        match &self.params {
            FittedParams::Surface(p) => Some(p),
            FittedParams::Curve(_) => None,
        }
    }

    pub fn curve_params(&self) -> Option<&Model1DParams> {
        match &self.params {
            FittedParams::Curve(p) => Some(p),
            FittedParams::Surface(_) => None,
        }
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}
