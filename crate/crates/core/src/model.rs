//! One-dimensional model families: two polynomials, a logarithm, single
//! and double exponentials, and the shifted sigmoid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent magnitude accepted before a range error is raised.
pub const EXP_ARG_LIMIT: f64 = 700.0;

pub(crate) fn guarded_exp(arg: f64, term: Option<usize>) -> Result<f64> {
    if arg.is_nan() || arg.abs() > EXP_ARG_LIMIT {
        return Err(Error::ExponentRange { arg, term });
    }
    Ok(arg.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Poly2,
    Poly3,
    Log,
    Exp1,
    Exp2,
    Sigmoid,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Poly2,
        Family::Poly3,
        Family::Log,
        Family::Exp1,
        Family::Exp2,
        Family::Sigmoid,
    ];

    pub fn param_count(self) -> usize {
        match self {
            Family::Log | Family::Exp1 => 2,
            Family::Poly2 => 3,
            Family::Poly3 | Family::Exp2 | Family::Sigmoid => 4,
        }
    }

    /// Families whose coefficients enter linearly and are solved in closed form.
    pub fn is_linear(self) -> bool {
        matches!(self, Family::Poly2 | Family::Poly3 | Family::Log)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Poly2 => "poly2",
            Family::Poly3 => "poly3",
            Family::Log => "log",
            Family::Exp1 => "exp1",
            Family::Exp2 => "exp2",
            Family::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', '_'], "");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model family `{s}`")))
    }
}

/// Parameters of one fitted 1-D model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Model1DParams {
    /// a·x² + b·x + c
    Poly2 { a: f64, b: f64, c: f64 },
    /// a·x³ + b·x² + c·x + d
    Poly3 { a: f64, b: f64, c: f64, d: f64 },
    /// a·ln(x) + b
    Log { a: f64, b: f64 },
    /// a·exp(b·x)
    Exp1 { a: f64, b: f64 },
    /// a·exp(b·x) + c·exp(d·x)
    Exp2 { a: f64, b: f64, c: f64, d: f64 },
    /// b + c / (1 + exp(−d·x − e))
    Sigmoid { b: f64, c: f64, d: f64, e: f64 },
}

impl Model1DParams {
    pub fn family(&self) -> Family {
        match self {
            Model1DParams::Poly2 { .. } => Family::Poly2,
            Model1DParams::Poly3 { .. } => Family::Poly3,
            Model1DParams::Log { .. } => Family::Log,
            Model1DParams::Exp1 { .. } => Family::Exp1,
            Model1DParams::Exp2 { .. } => Family::Exp2,
            Model1DParams::Sigmoid { .. } => Family::Sigmoid,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            Model1DParams::Poly2 { a, b, c } => vec![a, b, c],
            Model1DParams::Poly3 { a, b, c, d } => vec![a, b, c, d],
            Model1DParams::Log { a, b } => vec![a, b],
            Model1DParams::Exp1 { a, b } => vec![a, b],
            Model1DParams::Exp2 { a, b, c, d } => vec![a, b, c, d],
            Model1DParams::Sigmoid { b, c, d, e } => vec![b, c, d, e],
        }
    }

    /// Inverse of [`to_vec`](Self::to_vec).
    pub fn from_slice(family: Family, p: &[f64]) -> Result<Self> {
        if p.len() != family.param_count() {
            return Err(Error::LengthMismatch(p.len(), family.param_count()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite {family} parameter")));
        }
        Ok(match family {
            Family::Poly2 => Model1DParams::Poly2 { a: p[0], b: p[1], c: p[2] },
            Family::Poly3 => Model1DParams::Poly3 { a: p[0], b: p[1], c: p[2], d: p[3] },
            Family::Log => Model1DParams::Log { a: p[0], b: p[1] },
            Family::Exp1 => Model1DParams::Exp1 { a: p[0], b: p[1] },
            Family::Exp2 => Model1DParams::Exp2 { a: p[0], b: p[1], c: p[2], d: p[3] },
            Family::Sigmoid => Model1DParams::Sigmoid { b: p[0], c: p[1], d: p[2], e: p[3] },
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite abscissa {x}")));
        }
        Ok(match *self {
            Model1DParams::Poly2 { a, b, c } => (a * x + b) * x + c,
            Model1DParams::Poly3 { a, b, c, d } => ((a * x + b) * x + c) * x + d,
            Model1DParams::Log { a, b } => {
                if x <= 0.0 {
                    return Err(Error::LogDomain(x));
                }
                a * x.ln() + b
            }
            Model1DParams::Exp1 { a, b } => a * guarded_exp(b * x, None)?,
            Model1DParams::Exp2 { a, b, c, d } => {
                a * guarded_exp(b * x, None)? + c * guarded_exp(d * x, None)?
            }
            Model1DParams::Sigmoid { b, c, d, e } => b + c * logistic_1d(-d * x - e)?,
        })
    }

    /// Value and partial derivatives with respect to the parameters, in
    /// [`to_vec`](Self::to_vec) order.
    pub fn eval_with_jacobian(&self, x: f64) -> Result<(f64, Vec<f64>)> {
        let value = self.eval(x)?;
        let grad = match *self {
            Model1DParams::Poly2 { .. } => vec![x * x, x, 1.0],
            Model1DParams::Poly3 { .. } => vec![x * x * x, x * x, x, 1.0],
            Model1DParams::Log { .. } => vec![x.ln(), 1.0],
            Model1DParams::Exp1 { a, b } => {
                let e = (b * x).exp();
                vec![e, a * x * e]
            }
            Model1DParams::Exp2 { a, b, c, d } => {
                let e1 = (b * x).exp();
                let e2 = (d * x).exp();
                vec![e1, a * x * e1, e2, c * x * e2]
            }
            Model1DParams::Sigmoid { c, d, e, .. } => {
                let s = logistic_1d(-d * x - e)?;
                let ds = s * (1.0 - s);
                vec![1.0, s, c * ds * x, c * ds]
            }
        };
        Ok((value, grad))
    }
}

/// 1 / (1 + exp(arg)). Only the overflowing side (arg > 700) is guarded,
/// so the curve can be evaluated far into its saturated tail.
fn logistic_1d(arg: f64) -> Result<f64> {
    if arg.is_nan() || arg > EXP_ARG_LIMIT {
        return Err(Error::ExponentRange { arg, term: None });
    }
    Ok(1.0 / (1.0 + arg.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn exp2_degenerate_is_one() {
        let p = Model1DParams::Exp2 { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };
        assert_eq!(p.eval(42.0).unwrap(), 1.0);
    }

    #[test]
    fn exp2_table2_row1_at_q10() {
        // 86.4433·exp(−7.624e−5) − 8.0206·exp(−0.578), hand-evaluated.
        let expected = 86.4433 * (-7.624e-5f64).exp() - 8.0206 * (-0.578f64).exp();
        let p = Model1DParams::Exp2 { a: 86.4433, b: -7.624e-06, c: -8.0206, d: -0.0578 };
        let v = p.eval(10.0).unwrap();
        assert_relative_eq!(v, expected, max_relative = 1e-14);
        assert!((v - 81.93).abs() < 0.01);
        assert!((v - 81.94).abs() < 0.05);
    }

    #[test]
    fn sigmoid_fig5_at_080() {
        let p = Model1DParams::Sigmoid { b: 95.3055, c: -8.7716, d: -14.9563, e: 15.3302 };
        // exp(-(−14.9563·0.8) − 15.3302) = exp(−3.36516)
        let expected = 95.3055 - 8.7716 / (1.0 + (-3.36516f64).exp());
        let v = p.eval(0.80).unwrap();
        assert_relative_eq!(v, expected, max_relative = 1e-12);
        assert!((v - 86.83).abs() < 0.005);
    }

    #[test]
    fn log_domain() {
        let p = Model1DParams::Log { a: 1.0, b: 0.0 };
        assert_eq!(p.eval(0.0).unwrap_err(), Error::LogDomain(0.0));
        assert!(p.eval(-1.0).is_err());
    }

    #[test]
    fn exponent_guard() {
        let p = Model1DParams::Exp1 { a: 1.0, b: 8.0 };
        assert!(matches!(p.eval(100.0), Err(Error::ExponentRange { .. })));
        let neg = Model1DParams::Exp1 { a: 1.0, b: -8.0 };
        assert!(matches!(neg.eval(100.0), Err(Error::ExponentRange { .. })));
        let sig = Model1DParams::Sigmoid { b: 0.0, c: 1.0, d: -10.0, e: 0.0 };
        assert!(matches!(sig.eval(100.0), Err(Error::ExponentRange { .. })));
    }

    #[test]
    fn family_parse() {
        assert_eq!("Exp-2".parse::<Family>().unwrap(), Family::Exp2);
        assert_eq!("poly3".parse::<Family>().unwrap(), Family::Poly3);
        assert!("cubic".parse::<Family>().is_err());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let cases = [
            Model1DParams::Poly3 { a: 0.1, b: -0.3, c: 2.0, d: 1.0 },
            Model1DParams::Log { a: 3.0, b: 1.0 },
            Model1DParams::Exp1 { a: 5.0, b: 0.02 },
            Model1DParams::Exp2 { a: 86.0, b: 1e-4, c: -8.0, d: -0.05 },
            Model1DParams::Sigmoid { b: 95.0, c: -8.0, d: -15.0, e: 15.0 },
        ];
        for p in cases {
            let base = p.to_vec();
            for x in [0.5, 1.1, 7.0, 30.0] {
                let (_, jac) = p.eval_with_jacobian(x).unwrap();
                for k in 0..base.len() {
                    let h = 1e-6 * base[k].abs().max(1.0);
                    let mut up = base.clone();
                    let mut dn = base.clone();
                    up[k] += h;
                    dn[k] -= h;
                    let fu = Model1DParams::from_slice(p.family(), &up).unwrap().eval(x).unwrap();
                    let fd = Model1DParams::from_slice(p.family(), &dn).unwrap().eval(x).unwrap();
                    let fd_grad = (fu - fd) / (2.0 * h);
                    assert_relative_eq!(jac[k], fd_grad, epsilon = 1e-6, max_relative = 1e-6);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sigmoid_upper_asymptote(d in 0.1f64..10.0, b in -100.0f64..100.0, c in -100.0f64..100.0, e in -50.0f64..50.0) {
            let p = Model1DParams::Sigmoid { b, c, d, e };
            let v = p.eval(1e6).unwrap();
            prop_assert!((v - (b + c)).abs() < 1e-9 * (1.0 + (b + c).abs()));
        }
    }
}
