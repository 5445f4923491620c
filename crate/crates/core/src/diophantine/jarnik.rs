//! Continued fractions whose convergents beat a prescribed profile f.
//!
//! Quotients are chosen as a_{k+1} = ⌈1/(q_k² f(q_k))⌉, which gives
//! |θ − p_k/q_k| < 1/(q_k q_{k+1}) ≤ f(q_k) for every θ with these leading
//! quotients.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cf::ContinuedFraction;
use super::hp::{interval_less, ln_bounds, Decision};
use crate::{Error, Result};

/// Decreasing approximation profile f on [1, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// c·q^{−α}
    Power { c: f64, alpha: f64 },
    /// c·e^{−λq}
    Exp { c: f64, lambda: f64 },
    /// c·q^{−α}·(1 + ln q)^{−β}
    PowerLog { c: f64, alpha: f64, beta: f64 },
}

impl Profile {
    pub fn power(alpha: f64) -> Self {
        Profile::Power { c: 1.0, alpha }
    }

    fn params_ok(&self) -> bool {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        match *self {
            Profile::Power { c, alpha } => pos(c) && nonneg(alpha),
            Profile::Exp { c, lambda } => pos(c) && pos(lambda),
            Profile::PowerLog { c, alpha, beta } => pos(c) && nonneg(alpha) && nonneg(beta),
        }
    }

    /// ln f(q) in binary64.
    pub fn ln_value(&self, q: f64) -> f64 {
        match *self {
            Profile::Power { c, alpha } => c.ln() - alpha * q.ln(),
            Profile::Exp { c, lambda } => c.ln() - lambda * q,
            Profile::PowerLog { c, alpha, beta } => {
                c.ln() - alpha * q.ln() - beta * (1.0 + q.ln()).ln()
            }
        }
    }

    pub fn value(&self, q: f64) -> f64 {
        self.ln_value(q).exp()
    }

    /// Checks that 2 ln x + ln f(x) does not increase on sampled x ≥ 2.
    ///
    /// The exponential profile increases x²f(x) on [1, 2), so the check
    /// starts at 2 for every profile.
    pub fn check_monotone(&self) -> Result<()> {
        if !self.params_ok() {
            return Err(Error::Domain(format!("invalid profile parameters: {self}")));
        }
        let mut prev = f64::INFINITY;
        let mut x = 2.0f64;
        while x < 1e300 {
            let g = 2.0 * x.ln() + self.ln_value(x);
            if g > prev + 1e-12 * prev.abs().max(1.0) {
                return Err(Error::ProfileNotMonotone(x));
            }
            prev = g;
            x *= 1.25;
        }
        Ok(())
    }

    /// Enclosure of ln f(q) with error about 2^{−prec}·(size of the terms).
    fn ln_enclosure(&self, q: &BigInt, prec: u64) -> Result<(BigRational, BigRational)> {
        let exact = |x: f64| BigRational::from_float(x).expect("finite parameter");
        let qr = BigRational::from_integer(q.clone());
        let (lnc_lo, lnc_hi) = match *self {
            Profile::Power { c, .. } | Profile::Exp { c, .. } | Profile::PowerLog { c, .. } => {
                ln_bounds(&exact(c), prec)?
            }
        };
        let (lq_lo, lq_hi) = ln_bounds(&qr, prec)?;
        match *self {
            Profile::Power { alpha, .. } => {
                let a = exact(alpha);
                Ok((lnc_lo - &a * lq_hi, lnc_hi - &a * lq_lo))
            }
            Profile::Exp { lambda, .. } => {
                let l = exact(lambda) * qr;
                Ok((lnc_lo - &l, lnc_hi - l))
            }
            Profile::PowerLog { alpha, beta, .. } => {
                let a = exact(alpha);
                let b = exact(beta);
                let one = BigRational::one();
                let (ll_lo, _) = ln_bounds(&(&one + &lq_lo), prec)?;
                let (_, ll_hi) = ln_bounds(&(&one + &lq_hi), prec)?;
                Ok((
                    lnc_lo - &a * &lq_hi - &b * ll_hi,
                    lnc_hi - &a * lq_lo - b * ll_lo,
                ))
            }
        }
    }

    /// For Power with α = a/r, r ≤ 16, decides x < c·q^{−α} as
    /// x^r·q^a < c^r without logarithms.
    fn exact_less(&self, x: &BigRational, q: &BigInt) -> Option<bool> {
        let Profile::Power { c, alpha } = *self else {
            return None;
        };
        let a = BigRational::from_float(alpha)?;
        let r = a.denom().to_u32().filter(|&r| r <= 16)?;
        let num = a.numer().to_u32()?;
        let lhs = x.pow(r as i32) * BigRational::from_integer(q.pow(num));
        let rhs = BigRational::from_float(c)?.pow(r as i32);
        Some(lhs < rhs)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Profile::Power { c, alpha } => write!(f, "power:{alpha}:{c}"),
            Profile::Exp { c, lambda } => write!(f, "exp:{lambda}:{c}"),
            Profile::PowerLog { c, alpha, beta } => write!(f, "power-log:{alpha}:{beta}:{c}"),
        }
    }
}

/// Accepts `power:α[:c]`, `exp[:λ[:c]]` and `power-log:α:β[:c]`.
impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize, default: Option<f64>| -> Result<f64> {
            match parts.get(i) {
                Some(t) => t
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {t:?} in profile {s:?}"))),
                None => default
                    .ok_or_else(|| Error::Config(format!("profile {s:?} is missing a parameter"))),
            }
        };
        let (p, max_parts) = match parts[0] {
            "power" => (
                Profile::Power {
                    alpha: num(1, None)?,
                    c: num(2, Some(1.0))?,
                },
                3,
            ),
            "exp" => (
                Profile::Exp {
                    lambda: num(1, Some(1.0))?,
                    c: num(2, Some(1.0))?,
                },
                3,
            ),
            "power-log" => (
                Profile::PowerLog {
                    alpha: num(1, None)?,
                    beta: num(2, None)?,
                    c: num(3, Some(1.0))?,
                },
                4,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown profile {other:?}; expected power, exp or power-log"
                )))
            }
        };
        if parts.len() > max_parts {
            return Err(Error::Config(format!(
                "too many parameters in profile {s:?}"
            )));
        }
        if !p.params_ok() {
            return Err(Error::Config(format!(
                "invalid parameters in profile {s:?}"
            )));
        }
        Ok(p)
    }
}

/// Precision cap (bits) while choosing quotients.
const CONSTRUCTION_PREC: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JarnikOptions {
    /// Construction stops once a quotient would need more bits than this.
    pub max_bits: u64,
    /// Largest working precision (bits) of the logarithmic comparisons.
    pub max_prec: u64,
}

impl Default for JarnikOptions {
    fn default() -> Self {
        JarnikOptions {
            max_bits: 20_000,
            max_prec: 1 << 17,
        }
    }
}

/// |θ − p_k/q_k| < f(q_k) for the final θ of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub q_bits: u64,
    /// q_k in decimal, omitted above 60 digits.
    pub q: Option<String>,
    pub ln_residual: f64,
    pub ln_bound: f64,
    pub certified: bool,
    /// Whether the comparison avoided logarithms entirely.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JarnikResult {
    pub profile: Profile,
    pub cf: ContinuedFraction,
    pub certificates: Vec<Certificate>,
    /// Set when fewer than the requested quotients were produced.
    pub truncated: bool,
    pub stop_reason: Option<String>,
}

impl JarnikResult {
    /// θ = [0; a₁, …, a_K] as an exact rational.
    pub fn theta(&self) -> BigRational {
        self.cf.value()
    }

    pub fn all_certified(&self) -> bool {
        self.certificates.iter().all(|c| c.certified)
    }
}

pub fn jarnik_construct(profile: &Profile, depth: usize) -> Result<JarnikResult> {
    jarnik_construct_with(profile, depth, JarnikOptions::default())
}

/// Builds [0; a₁, …, a_{depth−1}] and certifies every convergent but the last.
pub fn jarnik_construct_with(
    profile: &Profile,
    depth: usize,
    opts: JarnikOptions,
) -> Result<JarnikResult> {
    profile.check_monotone()?;
    if depth < 2 {
        return Err(Error::Domain(format!(
            "depth {depth} is below the minimum of 2"
        )));
    }
    let mut cf = ContinuedFraction::from_quotients(vec![BigInt::zero()], false)?;
    let mut stop_reason = None;
    while cf.depth() < depth {
        let k = cf.depth() - 1;
        let qk = cf.denominators()[k].clone();
        let q_prev = if k == 0 {
            BigInt::zero()
        } else {
            cf.denominators()[k - 1].clone()
        };
        let ln_q = super::hp::ln_big_abs(&qk);
        // ln of 1/(q² f(q)), finite or +∞ once q leaves the f64 range
        let ln_target = -2.0 * ln_q - ln_value_big(profile, &qk, ln_q);
        let bits = (ln_target / std::f64::consts::LN_2).max(0.0);
        if !bits.is_finite() || bits > opts.max_bits as f64 {
            stop_reason = Some(format!(
                "quotient {} would need about {bits:.0} bits",
                k + 1
            ));
            break;
        }
        let mut a = approx_exp(ln_target);
        // 1/(q_k q_{k+1}) < f(q_k), with q_{k+1} = a q_k + q_{k−1}
        let mut tries = 0;
        loop {
            let q_next = &a * &qk + &q_prev;
            let x = BigRational::new(BigInt::one(), &qk * &q_next);
            // Ties such as x = f(q) never resolve, so the search precision is capped.
            match certify(profile, &x, &qk, opts.max_prec.min(CONSTRUCTION_PREC))?.0 {
                Decision::True => break,
                _ if tries == 0 => {
                    a += 1;
                    tries += 1;
                }
                _ => {
                    a *= 2;
                    tries += 1;
                    if tries > 64 {
                        return Err(Error::Domain(format!(
                            "could not certify quotient {}",
                            k + 1
                        )));
                    }
                }
            }
        }
        cf.push(a);
    }

    let theta = cf.value();
    let last = cf.depth() - 1;
    let mut certificates = Vec::with_capacity(last);
    for k in 0..last {
        let qk = &cf.denominators()[k];
        let x = (&theta - cf.convergent(k)).abs();
        let (decision, exact, ln_f) = certify(profile, &x, qk, opts.max_prec)?;
        let digits = qk.to_string();
        certificates.push(Certificate {
            k,
            q_bits: qk.bits(),
            q: (digits.len() <= 60).then_some(digits),
            ln_residual: ln_rational_f64(&x),
            ln_bound: ln_f,
            certified: decision == Decision::True,
            exact,
        });
    }
    Ok(JarnikResult {
        profile: *profile,
        cf,
        certificates,
        truncated: stop_reason.is_some(),
        stop_reason,
    })
}

/// ln f(q) in f64 from ln q, valid for q beyond the f64 range.
fn ln_value_big(profile: &Profile, q: &BigInt, ln_q: f64) -> f64 {
    match *profile {
        Profile::Exp { c, lambda } => c.ln() - lambda * q.to_f64().unwrap_or(f64::INFINITY),
        Profile::Power { c, alpha } => c.ln() - alpha * ln_q,
        Profile::PowerLog { c, alpha, beta } => c.ln() - alpha * ln_q - beta * (1.0 + ln_q).ln(),
    }
}

/// An integer slightly above e^y, at least 1.
fn approx_exp(y: f64) -> BigInt {
    if y <= 0.0 {
        return BigInt::one();
    }
    if y < 40.0 {
        return BigInt::from(y.exp().ceil() as u64).max(BigInt::one());
    }
    let e2 = y / std::f64::consts::LN_2;
    let shift = e2.floor() as u64 - 52;
    let mant = (e2 - shift as f64).exp2().ceil() as u64 + 1;
    BigInt::from(mant) << shift
}

fn ln_rational_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    super::hp::ln_big_abs(x.numer()) - super::hp::ln_big_abs(x.denom())
}

/// Decides x < f(q). Returns (decision, used the exact path, ln f(q) in f64).
fn certify(
    profile: &Profile,
    x: &BigRational,
    q: &BigInt,
    max_prec: u64,
) -> Result<(Decision, bool, f64)> {
    let ln_q = super::hp::ln_big_abs(q);
    let ln_f = ln_value_big(profile, q, ln_q);
    if x.is_zero() {
        return Ok((Decision::True, true, ln_f));
    }
    if let Some(b) = profile.exact_less(x, q) {
        return Ok((if b { Decision::True } else { Decision::False }, true, ln_f));
    }
    let mut prec = 64u64;
    loop {
        let (xl, xh) = ln_bounds(x, prec)?;
        let (fl, fh) = profile.ln_enclosure(q, prec)?;
        match interval_less((&xl, &xh), (&fl, &fh)) {
            Decision::Undecided if prec < max_prec => prec *= 2,
            d => return Ok((d, false, ln_f)),
        }
    }
}
