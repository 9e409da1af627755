use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Goodness-of-fit summary. MAPE is in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sse: f64,
    pub mape: f64,
    /// `None` when the actual values have zero variance.
    pub r_squared: Option<f64>,
}

pub fn sse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    Ok(actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum())
}

pub fn mape(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    if let Some(i) = actual.iter().position(|&a| a == 0.0) {
        return Err(Error::ZeroActual(i));
    }
    let total: f64 = actual.iter().zip(predicted).map(|(a, p)| ((a - p) / a).abs()).sum();
    Ok(100.0 * total / actual.len() as f64)
}

pub fn r_squared(predicted: &[f64], actual: &[f64]) -> Result<Option<f64>> {
    let sse = sse(predicted, actual)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    Ok((sst > 0.0).then(|| 1.0 - sse / sst))
}

pub fn metrics(predicted: &[f64], actual: &[f64]) -> Result<Metrics> {
    Ok(Metrics {
        sse: sse(predicted, actual)?,
        mape: mape(predicted, actual)?,
        r_squared: r_squared(predicted, actual)?,
    })
}

fn check_lengths(predicted: &[f64], actual: &[f64]) -> Result<()> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch(predicted.len(), actual.len()));
    }
    if actual.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one value".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let a = [1.0, 2.0, 4.0];
        let m = metrics(&a, &a).unwrap();
        assert_eq!((m.sse, m.mape, m.r_squared), (0.0, 0.0, Some(1.0)));
    }

    #[test]
    fn single_point_mape() {
        assert_eq!(mape(&[110.0], &[100.0]).unwrap(), 10.0);
    }

    #[test]
    fn mean_prediction_has_zero_r2() {
        let actual = [1.0, 2.0, 3.0, 6.0];
        let mean = [3.0; 4];
        assert_eq!(r_squared(&mean, &actual).unwrap(), Some(0.0));
    }

    #[test]
    fn errors() {
        assert_eq!(metrics(&[1.0], &[1.0, 2.0]).unwrap_err(), Error::LengthMismatch(1, 2));
        assert_eq!(mape(&[1.0, 1.0], &[1.0, 0.0]).unwrap_err(), Error::ZeroActual(1));
        assert!(metrics(&[], &[]).is_err());
        assert_eq!(r_squared(&[5.0, 5.0], &[5.0, 5.0]).unwrap(), None);
    }
}
