//! Central-difference SSE gradients, the independent check on the
//! analytic gradient path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AccuracyGrid;
use crate::surface::{
    accumulate_gradients, eval_surface, SemanticLossGradient, SemanticLossParams, SurfaceData,
};

/// Central differences of SSE; parameter k is perturbed by
/// `step · max(1, |μₖ|)`.
///
/// SSE(μ⁺) − SSE(μ⁻) is formed as Σ (ξ⁻ − ξ⁺)(2y − ξ⁺ − ξ⁻), with ξ⁺ − ξ⁻
/// taken from the single perturbed term. This is the same difference,
/// without the cancellation of subtracting two large sums.
pub fn finite_diff_gradient_data(
    params: &SemanticLossParams,
    data: &SurfaceData,
    step: f64,
) -> Result<SemanticLossGradient> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("finite-difference step must be > 0, got {step}")));
    }
    let base = params.to_flat();
    let nq = data.q().len();
    let mut grad = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let h = step * base[k].abs().max(1.0);
        let mut up = base.clone();
        let mut down = base.clone();
        up[k] += h;
        down[k] -= h;
        let p_up = SemanticLossParams::from_flat(&up)?;
        let p_down = SemanticLossParams::from_flat(&down)?;
        let xi_up = eval_surface(&p_up, data)?.xi;
        let xi_down = eval_surface(&p_down, data)?.xi;
        let mut diff = 0.0;
        for (i, &s) in data.s().iter().enumerate() {
            for (j, &q) in data.q().iter().enumerate() {
                let idx = i * nq + j;
                let dxi = if k == 0 {
                    up[0] - down[0]
                } else {
                    let t = (k - 1) / 5;
                    p_up.terms[t].value(q, s, t)? - p_down.terms[t].value(q, s, t)?
                };
                diff += -dxi * (2.0 * data.y()[idx] - xi_up[idx] - xi_down[idx]);
            }
        }
        // The actual spacing after rounding of base ± h.
        grad.push(diff / (up[k] - down[k]));
    }
    SemanticLossGradient::from_flat(&grad)
}

pub fn finite_diff_gradient(
    params: &SemanticLossParams,
    grid: &AccuracyGrid,
    step: f64,
) -> Result<SemanticLossGradient> {
    finite_diff_gradient_data(params, &SurfaceData::from_grid(grid, 1.0), step)
}

/// Relative discrepancy between two gradient components. Components that
/// are tiny compared with the largest one in the gradient are measured
/// against that scale instead of against themselves.
pub fn relative_error(analytic: f64, numeric: f64, scale: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(GRADIENT_SCALE_FLOOR * scale).max(f64::MIN_POSITIVE);
    (analytic - numeric).abs() / denom
}

/// Fraction of the gradient's infinity norm below which a component is
/// compared in absolute terms.
pub const GRADIENT_SCALE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub max_rel_error: f64,
    /// Flat index (μ₀ first, then μ₁..μ₅ per term) of the worst component.
    pub worst_component: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

pub fn check_gradient(params: &SemanticLossParams, data: &SurfaceData, step: f64) -> Result<GradientCheck> {
    let eval = eval_surface(params, data)?;
    let analytic = accumulate_gradients(params, data, &eval).to_flat();
    let numeric = finite_diff_gradient_data(params, data, step)?.to_flat();
    let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (worst_component, max_rel_error) = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| relative_error(*a, *n, scale))
        .enumerate()
        .fold((0, 0.0), |(wi, wv), (i, v)| if v > wv { (i, v) } else { (wi, wv) });
    Ok(GradientCheck { max_rel_error, worst_component, analytic, numeric })
}
