//! Closed-form least squares for the families that are linear in their
//! coefficients, solved through a Householder QR of the design matrix.

use nalgebra::{DMatrix, DVector};

use super::report::{FitReport, FittedParams};
use crate::error::{Error, Result};
use crate::grid::Series1D;
use crate::model::{Family, Model1DParams};

/// |Rᵢᵢ| below this fraction of the largest diagonal counts as rank loss.
const RANK_TOLERANCE: f64 = 1e-12;

/// Design matrix, one column per coefficient in [`Model1DParams::to_vec`] order.
pub fn design_matrix(family: Family, x: &[f64]) -> Result<DMatrix<f64>> {
    let cols = family.param_count();
    let mut m = DMatrix::zeros(x.len(), cols);
    for (i, &xi) in x.iter().enumerate() {
        let row: Vec<f64> = match family {
            Family::Poly2 => vec![xi * xi, xi, 1.0],
            Family::Poly3 => vec![xi * xi * xi, xi * xi, xi, 1.0],
            Family::Log => {
                if xi <= 0.0 {
                    return Err(Error::LogDomain(xi));
                }
                vec![xi.ln(), 1.0]
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "{other} is not linear in its parameters"
                )))
            }
        };
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn fit_linear_1d(family: Family, series: &Series1D) -> Result<FitReport> {
    let design = design_matrix(family, series.x())?;
    let (rows, cols) = design.shape();
    if rows < cols {
        return Err(Error::RankDeficient { rows, cols });
    }
    // Column equilibration keeps x³ and 1 on a comparable scale.
    let norms: Vec<f64> = (0..cols).map(|j| design.column(j).norm()).collect();
    if norms.iter().any(|&n| n == 0.0) {
        return Err(Error::RankDeficient { rows, cols });
    }
    let mut scaled = design.clone();
    for (j, n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }

    let qr = scaled.qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..cols).any(|i| r[(i, i)].abs() <= RANK_TOLERANCE * diag_max) {
        return Err(Error::RankDeficient { rows, cols });
    }
    let y = DVector::from_column_slice(series.y());
    let qty = qr.q().transpose() * &y;
    let z = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rows, cols })?;
    let coeffs: Vec<f64> = z.iter().zip(&norms).map(|(c, n)| c / n).collect();

    let params = Model1DParams::from_slice(family, &coeffs)?;
    let fitted: Vec<f64> = (&design * DVector::from_vec(coeffs)).iter().copied().collect();
    Ok(FitReport::assemble(
        FittedParams::Curve(params),
        &fitted,
        series.y(),
        series.label(),
    ))
}
