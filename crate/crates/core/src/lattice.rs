//! Integer lattice points with overflow-checked arithmetic.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::{Error, Result};

/// A point of Z^n. Coordinates are stored inline for n up to 6.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(SmallVec<[i64; 6]>);

impl LatticePoint {
    pub fn zero(n: usize) -> Self {
        LatticePoint(SmallVec::from_elem(0, n))
    }

    pub fn new(coords: &[i64]) -> Self {
        LatticePoint(SmallVec::from_slice(coords))
    }

    /// Unit vector along the 0-based `axis`.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut p = Self::zero(n);
        p.0[axis] = 1;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut out = SmallVec::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_add(*b).ok_or(Error::LatticeOverflow)?);
        }
        Ok(LatticePoint(out))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.checked_neg()?)
    }

    pub fn checked_neg(&self) -> Result<Self> {
        let mut out = SmallVec::with_capacity(self.dim());
        for a in &self.0 {
            out.push(a.checked_neg().ok_or(Error::LatticeOverflow)?);
        }
        Ok(LatticePoint(out))
    }

    /// Addition for callers that have already bounded the coordinates.
    ///
    /// # Panics
    /// On dimension mismatch or overflow.
    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other)
            .expect("lattice addition overflowed")
    }

    /// # Panics
    /// On overflow (only possible for `i64::MIN` coordinates).
    pub fn neg(&self) -> Self {
        self.checked_neg().expect("lattice negation overflowed")
    }

    pub fn scaled(&self, c: i64) -> Result<Self> {
        let mut out = SmallVec::with_capacity(self.dim());
        for a in &self.0 {
            out.push(a.checked_mul(c).ok_or(Error::LatticeOverflow)?);
        }
        Ok(LatticePoint(out))
    }

    /// Squared Euclidean norm, exact.
    pub fn norm2(&self) -> i128 {
        self.0.iter().map(|&c| (c as i128) * (c as i128)).sum()
    }

    pub fn max_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn dot_f64(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(&c, x)| c as f64 * x).sum()
    }
}

impl std::ops::Index<usize> for LatticePoint {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl PartialOrd for LatticePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LatticePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.as_slice().cmp(other.0.as_slice())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(SmallVec::from_vec(v))
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint(SmallVec::from_slice(&v))
    }
}

/// All points with max-norm at most `radius`, in lexicographic order.
pub fn cube(n: usize, radius: i64) -> Vec<LatticePoint> {
    let side = (2 * radius + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![-radius; n];
    for _ in 0..total {
        out.push(LatticePoint::new(&cur));
        for i in (0..n).rev() {
            if cur[i] < radius {
                cur[i] += 1;
                break;
            }
            cur[i] = -radius;
        }
    }
    out
}

/// All points with squared Euclidean norm at most `r2`, in lexicographic order.
pub fn ball(n: usize, r2: i64) -> Vec<LatticePoint> {
    let r = (r2.max(0) as f64).sqrt().floor() as i64;
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(i: usize, rem: i64, r: i64, cur: &mut Vec<i64>, out: &mut Vec<LatticePoint>) {
        if i == cur.len() {
            out.push(LatticePoint::new(cur));
            return;
        }
        let lim = ((rem as f64).sqrt().floor() as i64).min(r);
        for c in -lim..=lim {
            if c * c > rem {
                continue;
            }
            cur[i] = c;
            rec(i + 1, rem - c * c, r, cur, out);
        }
    }
    if r2 >= 0 {
        rec(0, r2, r, &mut cur, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_is_reported() {
        let a = LatticePoint::new(&[i64::MAX, 0]);
        let b = LatticePoint::new(&[1, 0]);
        assert_eq!(a.checked_add(&b), Err(Error::LatticeOverflow));
    }

    #[test]
    fn cube_and_ball_counts() {
        assert_eq!(cube(2, 1).len(), 9);
        assert_eq!(cube(3, 2).len(), 125);
        // r_2 sums: points with x^2+y^2 <= 2 are 9, <= 4 are 13.
        assert_eq!(ball(2, 2).len(), 9);
        assert_eq!(ball(2, 4).len(), 13);
        let c = cube(2, 3);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }
}
