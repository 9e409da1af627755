//! Parameter estimation: closed-form least squares, damped Gauss–Newton,
//! batch gradient descent on the surface, term-count sweeps and the
//! finite-difference gradient oracle.

pub mod config;
pub mod descent;
pub mod finite_diff;
pub mod linear;
pub mod metrics;
pub mod nonlinear;
pub mod report;
pub mod sweep;

pub use config::{FitConfig, InitPolicy};
pub use descent::{descend, fit_semantic_loss};
pub use finite_diff::{check_gradient, finite_diff_gradient, GradientCheck};
pub use linear::fit_linear_1d;
pub use metrics::{metrics, Metrics};
pub use nonlinear::fit_nonlinear_1d;
pub use report::{FitReport, FittedParams, StopReason, TracePoint};
pub use sweep::{nc_sweep, SweepEntry};

use crate::error::Result;
use crate::grid::Series1D;
use crate::model::Family;

/// Fit any 1-D family, routing to the closed-form or iterative solver.
pub fn fit_1d(family: Family, series: &Series1D, config: &FitConfig) -> Result<FitReport> {
    if family.is_linear() {
        fit_linear_1d(family, series)
    } else {
        fit_nonlinear_1d(family, series, config)
    }
}
