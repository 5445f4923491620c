//! Even positive cutoff functions and their moments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Named cutoff Φ, evaluated on the spectral ratio x = λ/Λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CutoffProfile {
    /// e^{−x²}
    Gaussian,
    /// e^{−x⁴}
    SuperGaussian,
    /// (1 + x²)^{−r}
    Rational { r: f64 },
}

impl CutoffProfile {
    pub fn rational(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "rational cutoff exponent must be positive, got {r}"
            )));
        }
        Ok(CutoffProfile::Rational { r })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CutoffProfile::Gaussian => (-x * x).exp(),
            CutoffProfile::SuperGaussian => (-x.powi(4)).exp(),
            CutoffProfile::Rational { r } => (1.0 + x * x).powf(-r),
        }
    }

    /// Φ(0), the weight of the constant term.
    pub fn at_zero(&self) -> f64 {
        1.0
    }

    /// Smallest x with Φ(y) ≤ tol for every y ≥ x.
    pub fn support_radius(&self, tol: f64) -> f64 {
        let l = -tol.ln();
        match *self {
            CutoffProfile::Gaussian => l.sqrt(),
            CutoffProfile::SuperGaussian => l.sqrt().sqrt(),
            CutoffProfile::Rational { r } => ((l / r).exp() - 1.0).sqrt(),
        }
    }

    /// Φ_k = ∫₀^∞ Φ(u) u^{k−1} du.
    ///
    /// The integral is split at u = 1 and the tail mapped to (0, 1] by
    /// u = 1/v, both pieces handled by double-exponential quadrature.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::Domain("moments start at k = 1".into()));
        }
        if let CutoffProfile::Rational { r } = *self {
            if 2.0 * r <= k as f64 {
                return Err(Error::DivergentMoment { k });
            }
        }
        let kf = k as f64;
        let head = |u: f64| self.eval(u) * u.powf(kf - 1.0);
        let tail = |v: f64| {
            if v <= 0.0 {
                0.0
            } else {
                self.eval(1.0 / v) * v.powf(-kf - 1.0)
            }
        };
        let a = quadrature::double_exponential::integrate(head, 0.0, 1.0, 1e-15);
        let b = quadrature::double_exponential::integrate(tail, 0.0, 1.0, 1e-15);
        let value = a.integral + b.integral;
        let err = a.error_estimate + b.error_estimate;
        if !value.is_finite() || err > 1e-12 * value.abs() {
            return Err(Error::DivergentMoment { k });
        }
        Ok(value)
    }

    /// Weight of the Λ^j term in the expansion: Φ_j for j ≥ 1, Φ(0) for j = 0.
    pub fn expansion_weight(&self, j: u32) -> Result<f64> {
        if j == 0 {
            Ok(self.at_zero())
        } else {
            self.moment(j)
        }
    }
}

impl fmt::Display for CutoffProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffProfile::Gaussian => write!(f, "gaussian"),
            CutoffProfile::SuperGaussian => write!(f, "super-gaussian"),
            CutoffProfile::Rational { r } => write!(f, "rational:{r}"),
        }
    }
}

/// Accepts `gaussian`, `super-gaussian` and `rational:r`.
impl FromStr for CutoffProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "gaussian" => Ok(CutoffProfile::Gaussian),
            "super-gaussian" => Ok(CutoffProfile::SuperGaussian),
            _ => match s.strip_prefix("rational:") {
                Some(r) => {
                    let r: f64 = r
                        .parse()
                        .map_err(|_| Error::Config(format!("bad exponent in {s:?}")))?;
                    CutoffProfile::rational(r).map_err(|e| Error::Config(e.to_string()))
                }
                None => Err(Error::Config(format!(
                    "unknown cutoff {s:?}; expected gaussian, super-gaussian or rational:r"
                ))),
            },
        }
    }
}
