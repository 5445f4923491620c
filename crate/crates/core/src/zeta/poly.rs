//! Homogeneous polynomials in k₁..k_n with real coefficients.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::special::{gamma_half, Neumaier};
use crate::{Error, Result};

/// Highest supported total degree.
pub const MAX_DEGREE: u32 = 6;

/// A homogeneous polynomial stored as exponent vector → coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPolynomial {
    n: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl HomogeneousPolynomial {
    pub fn new<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut degree = None;
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: alpha.len(),
                });
            }
            let d: u32 = alpha.iter().sum();
            if d > MAX_DEGREE {
                return Err(Error::UnsupportedDegree(d));
            }
            match degree {
                None => degree = Some(d),
                Some(e) if e != d => return Err(Error::NotHomogeneous),
                _ => {}
            }
            *map.entry(alpha).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(HomogeneousPolynomial {
            n,
            degree: degree.unwrap_or(0),
            terms: map,
        })
    }

    /// The constant polynomial c.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(n, [(vec![0; n], c)]).expect("constant is homogeneous")
    }

    /// c·k^α.
    pub fn monomial(alpha: &[u32], c: f64) -> Result<Self> {
        Self::new(alpha.len(), [(alpha.to_vec(), c)])
    }

    /// Parses sums of monomials such as `k1^2*k2^2`, `2*k1*k2 - 0.5*k3^2` or `1`.
    /// Variables are 1-based: `k1` is the first coordinate.
    pub fn parse(n: usize, src: &str) -> Result<Self> {
        let err = |m: &str| Error::PolynomialSyntax(format!("{m} in {src:?}"));
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty input"));
        }
        let mut terms = Vec::new();
        let bytes = s.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut sign = 1.0;
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                if bytes[pos] == b'-' {
                    sign = -1.0;
                }
                pos += 1;
            } else if pos > 0 {
                return Err(err("expected + or -"));
            }
            let end = s[pos..]
                .find(['+', '-'])
                .map(|e| pos + e)
                .unwrap_or(s.len());
            // Allow exponents like 1e-3 inside a numeric coefficient.
            let end = extend_past_exponent(&s, pos, end);
            let term = &s[pos..end];
            if term.is_empty() {
                return Err(err("empty term"));
            }
            let mut coeff = sign;
            let mut alpha = vec![0u32; n];
            for factor in term.split('*') {
                if let Some(var) = factor.strip_prefix('k') {
                    let (idx, pow) = match var.split_once('^') {
                        Some((i, p)) => (i, p.parse::<u32>().map_err(|_| err("bad exponent"))?),
                        None => (var, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| err("bad variable index"))?;
                    if idx == 0 || idx > n {
                        return Err(err("variable index out of range"));
                    }
                    alpha[idx - 1] += pow;
                } else {
                    coeff *= factor.parse::<f64>().map_err(|_| err("bad factor"))?;
                }
            }
            terms.push((alpha, coeff));
            pos = end;
        }
        Self::new(n, terms)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// P(0): the constant coefficient when the degree is 0, else 0.
    pub fn at_origin(&self) -> f64 {
        if self.degree == 0 {
            self.terms.values().sum()
        } else {
            0.0
        }
    }

    pub fn eval(&self, k: &[f64]) -> f64 {
        let mut acc = Neumaier::default();
        for (alpha, c) in &self.terms {
            let mut v = *c;
            for (x, &e) in k.iter().zip(alpha) {
                v *= x.powi(e as i32);
            }
            acc.add(v);
        }
        acc.sum()
    }

    /// P(−k) = (−1)^p P(k).
    pub fn is_even(&self) -> bool {
        self.degree % 2 == 0
    }

    /// Σ over all-even exponents of c_α Π Γ((α_i+1)/2), i.e. ∫_{R^n} P(x) e^{−|x|²} dx.
    pub fn gaussian_moment(&self) -> f64 {
        let mut acc = Neumaier::default();
        for (alpha, c) in &self.terms {
            if alpha.iter().all(|a| a % 2 == 0) {
                acc.add(c * alpha.iter().map(|&a| gamma_half(a + 1)).product::<f64>());
            }
        }
        acc.sum()
    }
}

fn extend_past_exponent(s: &str, start: usize, end: usize) -> usize {
    let b = s.as_bytes();
    if end < b.len() && end > start && (b[end - 1] == b'e' || b[end - 1] == b'E') {
        let before = &s[start..end - 1];
        let tail = before.rsplit('*').next().unwrap_or("");
        if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit() || c == '.') {
            let rest = s[end + 1..]
                .find(['+', '-'])
                .map(|e| end + 1 + e)
                .unwrap_or(s.len());
            return rest;
        }
    }
    end
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "{}", if *c < 0.0 { " - " } else { " + " })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            let mut parts = Vec::new();
            if c.abs() != 1.0 || alpha.iter().all(|&a| a == 0) {
                parts.push(format!("{}", c.abs()));
            }
            for (j, &a) in alpha.iter().enumerate() {
                match a {
                    0 => {}
                    1 => parts.push(format!("k{}", j + 1)),
                    _ => parts.push(format!("k{}^{}", j + 1, a)),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// ∫_{S^{n−1}} P(u) dS(u) from the monomial moments
/// ∫ u^α dS = 2 Π Γ((α_i+1)/2) / Γ((|α|+n)/2), zero unless every α_i is even.
pub fn sphere_integral(p: &HomogeneousPolynomial) -> f64 {
    let n = p.dim() as u32;
    let mut acc = Neumaier::default();
    for (alpha, c) in p.terms() {
        if alpha.iter().any(|a| a % 2 == 1) {
            continue;
        }
        let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
        let deg: u32 = alpha.iter().sum();
        acc.add(c * 2.0 * num / gamma_half(deg + n));
    }
    acc.sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_examples() {
        let p = HomogeneousPolynomial::parse(4, "k1^2*k2^2").unwrap();
        assert_eq!(p.degree(), 4);
        assert_eq!(p.eval(&[2.0, 3.0, 0.0, 0.0]), 36.0);
        let q = HomogeneousPolynomial::parse(2, "2*k1*k2 - 0.5*k2^2 + k1^2").unwrap();
        assert_eq!(q.eval(&[1.0, 2.0]), 4.0 - 2.0 + 1.0);
        let r = HomogeneousPolynomial::parse(3, "1").unwrap();
        assert_eq!(r.at_origin(), 1.0);
        let e = HomogeneousPolynomial::parse(2, "1e-3*k1").unwrap();
        assert_eq!(e.eval(&[2.0, 0.0]), 2e-3);
        assert!(HomogeneousPolynomial::parse(2, "k1^2 + k2").is_err());
        assert!(HomogeneousPolynomial::parse(2, "k3").is_err());
        assert!(HomogeneousPolynomial::parse(2, "k1^7").is_err());
        assert!(HomogeneousPolynomial::parse(2, "").is_err());
        assert!(HomogeneousPolynomial::parse(2, "x1").is_err());
    }

    #[test]
    fn display_round_trips() {
        let p = HomogeneousPolynomial::parse(3, "-2*k1*k3 + k2^2 - k1^2").unwrap();
        let q = HomogeneousPolynomial::parse(3, &p.to_string()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn sphere_volumes() {
        assert!(
            (sphere_integral(&HomogeneousPolynomial::constant(2, 1.0)) - 2.0 * PI).abs() < 1e-15
        );
        assert!(
            (sphere_integral(&HomogeneousPolynomial::constant(4, 1.0)) - 2.0 * PI * PI).abs()
                < 1e-14
        );
        let odd = HomogeneousPolynomial::parse(3, "k1*k2").unwrap();
        assert_eq!(sphere_integral(&odd), 0.0);
    }
}
