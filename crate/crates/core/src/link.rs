//! Shannon-gap arithmetic.
//!
//! The ratio is taken between two dB quantities, as the reference grids
//! were produced that way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkOperatingPoint {
    /// Received SNR in dB.
    pub gamma_db: f64,
    /// Actual transmission rate, bit/s/Hz.
    pub rate_bps_hz: f64,
}

impl LinkOperatingPoint {
    pub fn new(gamma_db: f64, rate_bps_hz: f64) -> Result<Self> {
        if !gamma_db.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma_db must be finite, got {gamma_db}")));
        }
        check_rate(rate_bps_hz)?;
        Ok(LinkOperatingPoint { gamma_db, rate_bps_hz })
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be > 0 bit/s/Hz, got {rate}")));
    }
    Ok(())
}

/// SNR (dB) at which the Shannon limit exactly supports `rate_bps_hz`:
/// 10·log₁₀(2^r − 1).
pub fn shannon_snr_db(rate_bps_hz: f64) -> Result<f64> {
    check_rate(rate_bps_hz)?;
    // exp_m1 keeps precision for small rates where 2^r − 1 cancels; powf is
    // exact at integer rates, so r = 1 gives exactly 0 dB.
    let linear = if rate_bps_hz < 0.5 {
        (rate_bps_hz * std::f64::consts::LN_2).exp_m1()
    } else {
        rate_bps_hz.exp2() - 1.0
    };
    Ok(10.0 * linear.log10())
}

/// Actual-to-Shannon SNR ratio s = γ / γ_Shannon.
pub fn snr_ratio(point: &LinkOperatingPoint) -> Result<f64> {
    let shannon = shannon_snr_db(point.rate_bps_hz)?;
    if shannon == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(point.gamma_db / shannon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 10·log10(3) to 16 digits.
    const TEN_LOG10_3: f64 = 4.771_212_547_196_624;

    #[test]
    fn unit_rate_is_zero_db() {
        assert_eq!(shannon_snr_db(1.0).unwrap(), 0.0);
    }

    #[test]
    fn rate_two() {
        assert!((shannon_snr_db(2.0).unwrap() - TEN_LOG10_3).abs() < 1e-12);
        assert!((shannon_snr_db(2.0).unwrap() - 4.7712).abs() < 1e-4);
    }

    #[test]
    fn bad_rates() {
        assert!(shannon_snr_db(0.0).is_err());
        assert!(shannon_snr_db(-1.0).is_err());
        assert!(shannon_snr_db(f64::NAN).is_err());
        assert!(LinkOperatingPoint::new(3.0, 0.0).is_err());
    }

    #[test]
    fn ratio_examples() {
        let p = LinkOperatingPoint::new(9.5424, 2.0).unwrap();
        assert!((snr_ratio(&p).unwrap() - 2.0).abs() < 1e-4);
        let at = LinkOperatingPoint::new(shannon_snr_db(3.5).unwrap(), 3.5).unwrap();
        assert_eq!(snr_ratio(&at).unwrap(), 1.0);
        let singular = LinkOperatingPoint::new(3.0, 1.0).unwrap();
        assert_eq!(snr_ratio(&singular).unwrap_err(), Error::UndefinedRatio);
    }

    proptest! {
        #[test]
        fn shannon_snr_strictly_increasing(a in 1e-3f64..64.0, b in 1e-3f64..64.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(shannon_snr_db(lo).unwrap() < shannon_snr_db(hi).unwrap());
        }

        #[test]
        fn ratio_linear_in_gamma(g in -30.0f64..30.0, r in 0.05f64..10.0) {
            prop_assume!((r - 1.0).abs() > 1e-3);
            let one = snr_ratio(&LinkOperatingPoint::new(g, r).unwrap()).unwrap();
            let two = snr_ratio(&LinkOperatingPoint::new(2.0 * g, r).unwrap()).unwrap();
            prop_assert!((two - 2.0 * one).abs() <= 1e-12 * one.abs().max(1.0));
        }
    }
}
