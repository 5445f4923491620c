//! Continued fractions with exact convergents.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::hp::{ln_big_abs, HpReal};
use crate::{Error, Result};

/// [a₀; a₁, a₂, …] with convergents p_k/q_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<BigInt>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    terminated: bool,
}

impl ContinuedFraction {
    /// Builds the convergents. `terminated` marks the expansion of a
    /// rational number that ends at the last quotient.
    pub fn from_quotients(quotients: Vec<BigInt>, terminated: bool) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::Domain("a continued fraction needs a₀".into()));
        }
        if quotients[1..].iter().any(|a| !a.is_positive()) {
            return Err(Error::Domain(
                "partial quotients beyond a₀ must be positive".into(),
            ));
        }
        let mut cf = ContinuedFraction {
            quotients: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            terminated,
        };
        for a in quotients {
            cf.push(a);
        }
        Ok(cf)
    }

    pub(crate) fn push(&mut self, a: BigInt) {
        let k = self.quotients.len();
        let (p1, q1, p2, q2) = match k {
            0 => (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()),
            1 => (
                self.p[0].clone(),
                self.q[0].clone(),
                BigInt::one(),
                BigInt::zero(),
            ),
            _ => (
                self.p[k - 1].clone(),
                self.q[k - 1].clone(),
                self.p[k - 2].clone(),
                self.q[k - 2].clone(),
            ),
        };
        self.p.push(&a * &p1 + p2);
        self.q.push(&a * &q1 + q2);
        self.quotients.push(a);
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    /// Number of partial quotients, a₀ included.
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.p
    }

    pub fn denominators(&self) -> &[BigInt] {
        &self.q
    }

    pub fn convergent(&self, k: usize) -> BigRational {
        BigRational::new(self.p[k].clone(), self.q[k].clone())
    }

    /// The last convergent, which is the value when the expansion terminated.
    pub fn value(&self) -> BigRational {
        self.convergent(self.depth() - 1)
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Checks the recurrences and p_kq_{k−1} − p_{k−1}q_k = (−1)^{k−1}.
    pub fn check_invariants(&self) -> bool {
        let rebuilt =
            match ContinuedFraction::from_quotients(self.quotients.clone(), self.terminated) {
                Ok(c) => c,
                Err(_) => return false,
            };
        if rebuilt.p != self.p || rebuilt.q != self.q {
            return false;
        }
        (1..self.depth()).all(|k| {
            let det = &self.p[k] * &self.q[k - 1] - &self.p[k - 1] * &self.q[k];
            let want = if k % 2 == 1 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            det == want
        })
    }

    pub fn quotient_strings(&self) -> Vec<String> {
        self.quotients.iter().map(|a| a.to_string()).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CfRepr {
    quotients: Vec<String>,
    terminated: bool,
}

impl Serialize for ContinuedFraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CfRepr {
            quotients: self.quotient_strings(),
            terminated: self.terminated,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ContinuedFraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CfRepr::deserialize(d)?;
        let qs = r
            .quotients
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        ContinuedFraction::from_quotients(qs, r.terminated).map_err(D::Error::custom)
    }
}

/// Expands as many quotients (up to `max_depth`) as the enclosure of x
/// determines. Each quotient is accepted only if every point of the
/// current interval has the same integer part.
pub fn cf_expand_available(x: &HpReal, max_depth: usize) -> ContinuedFraction {
    let mut cf = ContinuedFraction {
        quotients: Vec::new(),
        p: Vec::new(),
        q: Vec::new(),
        terminated: false,
    };
    let (mut lo, mut hi) = (x.lo().clone(), x.hi().clone());
    while cf.depth() < max_depth {
        let a = lo.floor().to_integer();
        if hi.floor().to_integer() != a {
            break;
        }
        if cf.depth() > 0 && !a.is_positive() {
            break;
        }
        let aq = BigRational::from_integer(a.clone());
        cf.push(a);
        let (fl, fh) = (&lo - &aq, &hi - &aq);
        if fl.is_zero() {
            cf.terminated = fh.is_zero();
            break;
        }
        lo = fh.recip();
        hi = fl.recip();
    }
    cf
}

/// Continued fraction of x to `depth` quotients (fewer if x is a rational
/// whose expansion ends first).
///
/// Fails with [`Error::PrecisionExhausted`] when the enclosure of x cannot
/// determine the requested depth; `max_depth` reports what it can.
pub fn cf_expand(x: &HpReal, depth: usize) -> Result<ContinuedFraction> {
    let cf = cf_expand_available(x, depth);
    if cf.depth() < depth && !cf.is_terminated() {
        return Err(Error::PrecisionExhausted {
            max_depth: cf.depth(),
        });
    }
    Ok(cf)
}

/// Empirical irrationality exponent 2 + max ln a_{k+1}/ln q_k over the
/// latter half of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrationalityEstimate {
    pub value: f64,
    pub depth_used: usize,
    /// Set for terminated expansions, whose exponent is infinite.
    pub divergent: bool,
}

pub fn irrationality_exponent_estimate(cf: &ContinuedFraction) -> Result<IrrationalityEstimate> {
    if cf.is_terminated() {
        return Ok(IrrationalityEstimate {
            value: f64::INFINITY,
            depth_used: cf.depth(),
            divergent: true,
        });
    }
    let d = cf.depth();
    if d < 3 {
        return Err(Error::Domain(format!(
            "depth {d} is below the minimum of 3"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    for k in (d / 2).max(1)..d - 1 {
        let q = &cf.denominators()[k];
        if q <= &BigInt::one() {
            continue;
        }
        let ratio = ln_big_abs(&cf.quotients()[k + 1]) / ln_big_abs(q);
        best = best.max(ratio);
    }
    let value = if best.is_finite() { best + 2.0 } else { 2.0 };
    Ok(IrrationalityEstimate {
        value,
        depth_used: d,
        divergent: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_expansions_terminate() {
        let three = cf_expand(&HpReal::from_integer(3), 10).unwrap();
        assert_eq!(three.quotient_strings(), vec!["3"]);
        assert!(three.is_terminated());
        let r = cf_expand(&HpReal::from_ratio(-7, 5).unwrap(), 10).unwrap();
        assert_eq!(r.quotient_strings(), vec!["-2", "1", "1", "2"]);
        assert_eq!(r.value(), BigRational::new((-7).into(), 5.into()));
        assert!(r.check_invariants());
    }

    #[test]
    fn exhausted_precision_is_reported() {
        let g = HpReal::golden(10);
        match cf_expand(&g, 200) {
            Err(Error::PrecisionExhausted { max_depth }) => {
                assert!(max_depth > 15 && max_depth < 30)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serde_round_trip() {
        let cf = cf_expand(&HpReal::quadratic(0, 1, 2, 1, 40).unwrap(), 20).unwrap();
        let s = serde_json::to_string(&cf).unwrap();
        let back: ContinuedFraction = serde_json::from_str(&s).unwrap();
        assert_eq!(cf, back);
    }
}
