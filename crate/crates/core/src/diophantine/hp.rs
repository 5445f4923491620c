//! Rational interval reals and rigorous logarithm bounds.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Default number of decimal digits carried by the constructors.
pub const DEFAULT_DIGITS: u32 = 150;

fn pow10(d: u32) -> BigInt {
    BigInt::from(10u32).pow(d)
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// A real number known to lie in the closed rational interval [lo, hi].
#[derive(Clone, PartialEq, Eq)]
pub struct HpReal {
    lo: BigRational,
    hi: BigRational,
}

impl fmt::Debug for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HpReal({} ± {:.1e})",
            self.to_decimal(30),
            self.width().to_f64().unwrap_or(f64::INFINITY)
        )
    }
}

impl HpReal {
    pub fn exact(r: BigRational) -> Self {
        HpReal {
            lo: r.clone(),
            hi: r,
        }
    }

    pub fn from_interval(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain("interval with lo > hi".into()));
        }
        Ok(HpReal { lo, hi })
    }

    pub fn from_integer(n: i64) -> Self {
        Self::exact(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::exact(BigRational::new(p.into(), q.into())))
    }

    /// The exact binary value of a finite double.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Self::exact)
            .ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
    }

    /// Parses decimal notation such as `-0.125`, `3`, `2.5e-7` exactly.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let err = || Error::Domain(format!("not a decimal number: {s:?}"));
        let s = s.trim();
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
        let scale = exp - frac.len() as i32;
        let mut r = BigRational::from_integer(digits);
        if scale >= 0 {
            r *= BigRational::from_integer(pow10(scale as u32));
        } else {
            r /= BigRational::from_integer(pow10((-scale) as u32));
        }
        Ok(Self::exact(if neg { -r } else { r }))
    }

    /// √r to `digits` decimal places.
    pub fn sqrt(r: &BigRational, digits: u32) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain("square root of a negative number".into()));
        }
        // √(p/q) = √(pq)/q
        let (p, q) = (r.numer().clone(), r.denom().clone());
        let scale = pow10(digits);
        let s = (&p * &q * &scale * &scale).sqrt();
        let den = &q * &scale;
        let lo = BigRational::new(s.clone(), den.clone());
        let hi = if &s * &s == &p * &q * &scale * &scale {
            lo.clone()
        } else {
            BigRational::new(s + 1, den)
        };
        Ok(HpReal { lo, hi })
    }

    /// (a + b√d)/c.
    pub fn quadratic(a: i64, b: i64, d: u64, c: i64, digits: u32) -> Result<Self> {
        if c == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let root = Self::sqrt(&BigRational::from_integer(d.into()), digits)?;
        let bb = BigRational::from_integer(b.into());
        Ok(root
            .scale(&bb)
            .shift(&BigRational::from_integer(a.into()))
            .scale(&BigRational::new(1.into(), c.into())))
    }

    /// (1 + √5)/2.
    pub fn golden(digits: u32) -> Self {
        Self::quadratic(1, 1, 5, 2, digits).expect("valid constants")
    }

    /// Σ_{j≥1} base^{−j!}, enclosed to at least `digits` decimal places.
    pub fn liouville(base: u32, digits: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::Domain("Liouville base must be at least 2".into()));
        }
        let b = BigInt::from(base);
        let log_b = (base as f64).log10();
        let mut sum = BigRational::zero();
        let mut fact: u32 = 1;
        let mut j: u32 = 1;
        loop {
            sum += BigRational::new(BigInt::one(), b.pow(fact));
            j += 1;
            let next = fact
                .checked_mul(j)
                .ok_or_else(|| Error::Domain("too many digits".into()))?;
            if next as f64 * log_b > digits as f64 + 1.0 {
                // Tail Σ_{i≥j} b^{−i!} < 2 b^{−j!}
                let tail = BigRational::new(BigInt::from(2), b.pow(next));
                return Ok(HpReal {
                    hi: &sum + tail,
                    lo: sum,
                });
            }
            fact = next;
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    pub fn neg(&self) -> Self {
        HpReal {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        HpReal {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn shift(&self, r: &BigRational) -> Self {
        HpReal {
            lo: &self.lo + r,
            hi: &self.hi + r,
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let (a, b) = (&self.lo * r, &self.hi * r);
        if a <= b {
            HpReal { lo: a, hi: b }
        } else {
            HpReal { lo: b, hi: a }
        }
    }

    /// floor(x) when the whole interval agrees on it.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        (self.hi.floor().to_integer() == a).then_some(a)
    }

    /// floor(frac(m)·2^128) for the midpoint m, i.e. x mod 1 in 0.128 fixed point.
    pub fn frac_u128(&self) -> u128 {
        let m = self.midpoint();
        let frac = &m - m.floor();
        let scaled = (frac * BigRational::from_integer(pow2(128)))
            .floor()
            .to_integer();
        scaled.to_u128().unwrap_or(u128::MAX)
    }

    /// Midpoint truncated to `digits` decimal places.
    pub fn to_decimal(&self, digits: u32) -> String {
        rational_to_decimal(&self.midpoint(), digits)
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(40))
    }
}

/// Best-effort conversion that survives numerators and denominators beyond
/// the f64 range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let (n, d) = (r.numer(), r.denom());
    // Integer quotient with about 64 significant bits, then a power of two.
    let shift = d.bits() as i64 - n.bits() as i64 + 64;
    let q = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        n / (d << (-shift) as u64)
    };
    let mut v = q.to_f64().unwrap_or(f64::NAN);
    let mut e = -shift;
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        v /= 2f64.powi(step as i32);
        e += step;
    }
    v
}

/// Approximate ln|n| for nonzero big integers of any size.
pub fn ln_big_abs(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    let top = (n.abs() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn rational_to_decimal(r: &BigRational, digits: u32) -> String {
    let neg = r.is_negative();
    let scaled = (r.abs() * BigRational::from_integer(pow10(digits)))
        .floor()
        .to_integer();
    let s = scaled.to_string();
    let d = digits as usize;
    let body = if d == 0 {
        s
    } else if s.len() <= d {
        format!("0.{}{}", "0".repeat(d - s.len()), s)
    } else {
        format!("{}.{}", &s[..s.len() - d], &s[s.len() - d..])
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Bounds on 2·atanh(num/den) for 0 ≤ num/den ≤ 1/3 as integers over 2^w.
fn two_atanh(num: &BigInt, den: &BigInt, w: u64) -> (BigInt, BigInt) {
    let z = (num << w) / den;
    let z2 = (&z * &z) >> w;
    let mut pw = z;
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    loop {
        let term = &pw / BigInt::from(2 * j + 1);
        if term.is_zero() {
            break;
        }
        sum += term;
        pw = (&pw * &z2) >> w;
        j += 1;
    }
    // Every rounding is downward; the slack covers the accumulated floors
    // and the geometric tail once terms vanish.
    let slack = BigInt::from(8 * (j + 8));
    (&sum << 1u32, (sum + slack) << 1u32)
}

/// Bounds on ln m for a positive integer m, as integers over 2^w.
fn ln_integer(m: &BigInt, w: u64) -> (BigInt, BigInt) {
    let b = m.bits() - 1;
    let base = pow2(b);
    let (zl, zh) = two_atanh(&(m - &base), &(m + &base), w);
    if b == 0 {
        return (zl, zh);
    }
    let (l2l, l2h) = two_atanh(&BigInt::one(), &BigInt::from(3), w);
    let bb = BigInt::from(b);
    (&bb * l2l + zl, &bb * l2h + zh)
}

/// Rigorous rational bounds lo ≤ ln x ≤ hi with hi − lo ≲ 2^{−prec}.
pub fn ln_bounds(x: &BigRational, prec: u64) -> Result<(BigRational, BigRational)> {
    if !x.is_positive() {
        return Err(Error::Domain("logarithm of a non-positive number".into()));
    }
    let guard = 24 + 64 - (x.numer().bits().max(x.denom().bits()).max(1)).leading_zeros() as u64;
    let w = prec + guard;
    let (nl, nh) = ln_integer(x.numer(), w);
    let (dl, dh) = ln_integer(x.denom(), w);
    let den = pow2(w);
    Ok((
        BigRational::new(nl - dh, den.clone()),
        BigRational::new(nh - dl, den),
    ))
}

/// Three-valued comparison result for certified inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    Undecided,
}

/// Decides lo_a..hi_a < lo_b..hi_b for two enclosures.
pub fn interval_less(a: (&BigRational, &BigRational), b: (&BigRational, &BigRational)) -> Decision {
    if a.1 < b.0 {
        Decision::True
    } else if a.0 >= b.1 {
        Decision::False
    } else {
        Decision::Undecided
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_brackets_and_is_exact_on_squares() {
        let two = BigRational::from_integer(2.into());
        let r = HpReal::sqrt(&two, 50).unwrap();
        assert!((r.lo() * r.lo()) <= two && (r.hi() * r.hi()) >= two);
        assert!(r.width() <= BigRational::new(1.into(), pow10(50)));
        assert!(HpReal::sqrt(&BigRational::new(9.into(), 4.into()), 10)
            .unwrap()
            .is_exact());
    }

    #[test]
    fn decimal_round_trip() {
        let x = HpReal::parse_decimal("-12.0625").unwrap();
        assert_eq!(x.to_f64(), -12.0625);
        assert_eq!(x.to_decimal(4), "-12.0625");
        assert_eq!(HpReal::parse_decimal("2.5e-3").unwrap().to_f64(), 0.0025);
        assert!(HpReal::parse_decimal("1.2.3").is_err());
        assert!(HpReal::parse_decimal("").is_err());
    }

    #[test]
    fn ln_bounds_enclose_reference_values() {
        for (x, want) in [
            (2.0f64, std::f64::consts::LN_2),
            (0.1, 0.1f64.ln()),
            (12345.678, 12345.678f64.ln()),
        ] {
            let r = BigRational::from_float(x).unwrap();
            let (lo, hi) = ln_bounds(&r, 80).unwrap();
            let (l, h) = (rational_to_f64(&lo), rational_to_f64(&hi));
            assert!(
                l <= want + 1e-15 && h >= want - 1e-15,
                "{x}: [{l}, {h}] vs {want}"
            );
            assert!(rational_to_f64(&(hi - lo)) < 1e-20);
        }
        let huge = BigRational::from_integer(BigInt::one() << 5000u32);
        let (lo, hi) = ln_bounds(&huge, 64).unwrap();
        let want = 5000.0 * std::f64::consts::LN_2;
        assert!(
            (rational_to_f64(&lo) - want).abs() < 1e-9
                && (rational_to_f64(&hi) - want).abs() < 1e-9
        );
    }

    #[test]
    fn liouville_enclosure() {
        let l = HpReal::liouville(10, 60).unwrap();
        assert!((l.to_f64() - 0.110_001).abs() < 1e-17, "{}", l.to_f64());
        assert!(l.width() < BigRational::new(1.into(), pow10(60)));
    }

    #[test]
    fn big_conversions() {
        let big = BigRational::new(BigInt::one() << 3000u32, (BigInt::one() << 2999u32) * 3);
        assert!((rational_to_f64(&big) - 2.0 / 3.0).abs() < 1e-12);
        assert!(
            (ln_big_abs(&(BigInt::one() << 4000u32)) - 4000.0 * std::f64::consts::LN_2).abs()
                < 1e-9
        );
    }
}
