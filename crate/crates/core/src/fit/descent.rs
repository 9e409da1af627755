//! Batch gradient descent on the semantic-loss surface.
//!
//! Every iteration evaluates ξ on the full grid, forms the residual
//! matrix, accumulates the analytic SSE gradient and moves each parameter
//! group by its own learning rate. Gradients are reset each iteration
//! unless `literal_accumulate` is set, in which case they keep summing
//! across iterations.

use rayon::prelude::*;

use super::config::{paper_scale_random, FitConfig, InitPolicy, STEP_FLOOR_FRACTION, TOLERANCE_WINDOW};
use super::report::{FitReport, FittedParams, StopReason, TracePoint};
use crate::error::{Error, Result};
use crate::grid::AccuracyGrid;
use crate::surface::{
    accumulate_gradients, eval_surface, SemanticLossGradient, SemanticLossParams, SurfaceData, SurfaceEval, Term,
};

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub params: SemanticLossParams,
    pub eval: SurfaceEval,
    pub sse: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<TracePoint>,
}

fn step(params: &SemanticLossParams, grad: &SemanticLossGradient, rates: &[f64; 6]) -> SemanticLossParams {
    let terms = params
        .terms
        .iter()
        .zip(&grad.terms)
        .map(|(t, g)| {
            let a = t.to_array();
            Term::from_array(std::array::from_fn(|i| a[i] - rates[i + 1] * g[i]))
        })
        .collect();
    SemanticLossParams { mu0: params.mu0 - rates[0] * grad.mu0, terms }
}

/// Run descent from `init` until the iteration budget, the relative SSE
/// tolerance, or (safeguarded) the step-size floor stops it.
pub fn descend(init: SemanticLossParams, data: &SurfaceData, config: &FitConfig) -> Result<DescentOutcome> {
    let at = |iteration: usize| move |e: Error| Error::AtIteration { iteration, source: Box::new(e) };

    let mut params = init;
    let mut eval = eval_surface(&params, data).map_err(at(0))?;
    let mut sse = eval.sse(data);
    if !sse.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let floors = config.learning_rates.map(|a| a * STEP_FLOOR_FRACTION);
    let mut rates = config.learning_rates;
    let mut trace = vec![TracePoint { iteration: 0, sse }];
    let mut window_sse = sse;
    let mut accumulated = SemanticLossGradient::zeros(params.n_terms());
    let mut direction: Option<SemanticLossGradient> = None;
    let mut stop = StopReason::IterationBudget;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        if sse == 0.0 {
            stop = StopReason::ExactFit;
            break;
        }
        iterations += 1;
        let grad = direction.get_or_insert_with(|| {
            let g = accumulate_gradients(&params, data, &eval);
            if config.literal_accumulate {
                accumulated.add_assign(&g);
                accumulated.clone()
            } else {
                g
            }
        });
        let candidate = step(&params, grad, &rates);
        if !candidate.is_finite() {
            return Err(Error::NonFinite { iteration: iterations });
        }
        let trial = eval_surface(&candidate, data).map(|e| {
            let s = e.sse(data);
            (e, s)
        });
        let accepted = match trial {
            Ok((e, s)) if !config.safeguard || s <= sse => {
                if !s.is_finite() {
                    return Err(Error::NonFinite { iteration: iterations });
                }
                Some((e, s))
            }
            Ok(_) => None,
            Err(e) if !config.safeguard => return Err(at(iterations)(e)),
            Err(_) => None,
        };
        match accepted {
            Some((e, s)) => {
                params = candidate;
                eval = e;
                sse = s;
                direction = None;
            }
            None => {
                if rates.iter().zip(&floors).all(|(r, f)| r <= f) {
                    stop = StopReason::StepFloor;
                    break;
                }
                for (r, f) in rates.iter_mut().zip(&floors) {
                    *r = (*r * 0.5).max(*f);
                }
            }
        }
        if iterations % config.trace_stride == 0 {
            trace.push(TracePoint { iteration: iterations, sse });
        }
        if iterations % TOLERANCE_WINDOW == 0 {
            if (window_sse - sse).abs() <= config.rel_tolerance * window_sse {
                stop = StopReason::Tolerance;
                break;
            }
            window_sse = sse;
        }
    }
    if trace.last().map(|t| t.iteration) != Some(iterations) {
        trace.push(TracePoint { iteration: iterations, sse });
    }
    Ok(DescentOutcome { params, eval, sse, iterations, stop, trace })
}

pub(crate) fn initial_params(data: &SurfaceData, n_terms: usize, config: &FitConfig) -> Result<Vec<SemanticLossParams>> {
    Ok(match &config.init_policy {
        InitPolicy::PaperScaleRandom => (0..config.starts)
            .map(|i| paper_scale_random(data, n_terms, &mut config.start_rng(i)))
            .collect(),
        InitPolicy::WarmStart(p) => {
            if p.n_terms() != n_terms {
                return Err(Error::InvalidArgument(format!(
                    "warm start has {} terms, fit requested {n_terms}",
                    p.n_terms()
                )));
            }
            vec![p.clone()]
        }
        InitPolicy::Zeros => vec![SemanticLossParams {
            mu0: 0.0,
            terms: vec![Term::ZERO; n_terms],
        }],
    })
}

/// Run every start (concurrently) and keep the lowest final SSE; ties go to
/// the lower start index.
pub(crate) fn best_of(
    inits: Vec<SemanticLossParams>,
    data: &SurfaceData,
    config: &FitConfig,
) -> (Vec<Result<DescentOutcome>>, Option<usize>) {
    let outcomes: Vec<Result<DescentOutcome>> = inits.into_par_iter().map(|p| descend(p, data, config)).collect();
    let best = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.as_ref().ok().map(|o| (i, o.sse)))
        .fold(None::<(usize, f64)>, |best, (i, s)| match best {
            Some((_, b)) if b <= s => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i);
    (outcomes, best)
}

pub(crate) fn report_from_outcomes(
    mut outcomes: Vec<Result<DescentOutcome>>,
    best: Option<usize>,
    data: &SurfaceData,
    grid: &AccuracyGrid,
    config: &FitConfig,
) -> Result<FitReport> {
    let start_sse = outcomes.iter().map(|o| o.as_ref().ok().map(|o| o.sse)).collect();
    let Some(index) = best else {
        return Err(outcomes
            .into_iter()
            .find_map(|o| o.err())
            .unwrap_or(Error::AllStartsDiverged { starts: 0 }));
    };
    let outcome = outcomes.swap_remove(index).expect("best start succeeded");
    let mut report = FitReport::assemble(
        FittedParams::Surface(outcome.params),
        &outcome.eval.xi,
        data.y(),
        grid.label(),
    );
    report.trace = outcome.trace;
    report.iterations_used = outcome.iterations;
    report.stop_reason = outcome.stop;
    report.converged = !matches!(outcome.stop, StopReason::IterationBudget);
    report.best_start = Some(index);
    report.start_sse = start_sse;
    report.config_echo = Some(config.clone());
    Ok(report)
}

/// Fit an `n_terms`-term surface to `grid`.
pub fn fit_semantic_loss(grid: &AccuracyGrid, n_terms: usize, config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    if n_terms == 0 {
        return Err(Error::InvalidArgument("number of terms must be >= 1".into()));
    }
    let data = SurfaceData::from_grid(grid, config.q_divisor());
    let inits = initial_params(&data, n_terms, config)?;
    let (outcomes, best) = best_of(inits, &data, config);
    report_from_outcomes(outcomes, best, &data, grid, config)
}
