use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::window::ModeWindow;
use crate::{Error, LatticePoint, Result};

/// A basis vector U_k ⊗ e_i, with the spinor index i 0-based.
pub type BasisIndex = (LatticePoint, usize);

/// Image of one basis vector. Repeated indices are allowed and add up.
pub type Output = Vec<(LatticePoint, usize, Complex64)>;

type Rule = dyn Fn(&LatticePoint, usize) -> Output + Send + Sync;

/// Finitely supported vector in the mode basis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: FxHashMap<BasisIndex, Complex64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(k: LatticePoint, i: usize) -> Self {
        let mut v = Self::new();
        v.add_to(k, i, Complex64::new(1.0, 0.0));
        v
    }

    pub fn add_to(&mut self, k: LatticePoint, i: usize, c: Complex64) {
        *self.entries.entry((k, i)).or_default() += c;
    }

    pub fn get(&self, k: &LatticePoint, i: usize) -> Complex64 {
        self.entries
            .get(&(k.clone(), i))
            .copied()
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisIndex, &Complex64)> {
        self.entries.iter()
    }

    /// max |v_j|.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// max_j |v_j − w_j|.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (key, c) in &self.entries {
            let o = other.entries.get(key).copied().unwrap_or_default();
            m = m.max((c - o).norm());
        }
        for (key, c) in &other.entries {
            if !self.entries.contains_key(key) {
                m = m.max(c.norm());
            }
        }
        m
    }

    /// Entries sorted by (k, i), zeros dropped.
    pub fn sorted(&self) -> Vec<(BasisIndex, Complex64)> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    fn into_output(self) -> Output {
        self.entries
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|((k, i), c)| (k, i, c))
            .collect()
    }
}

/// An exact linear operator on the mode basis of ℓ²(Z^n) ⊗ C^{2^m}.
///
/// `spread` bounds how far (in max-norm) any output mode lies from its
/// input. It is used to decide whether a window truncation is exact.
#[derive(Clone)]
pub struct ModeMap {
    n: usize,
    spin_dim: usize,
    spread: u64,
    rule: Arc<Rule>,
}

impl fmt::Debug for ModeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeMap")
            .field("n", &self.n)
            .field("spin_dim", &self.spin_dim)
            .field("spread", &self.spread)
            .finish_non_exhaustive()
    }
}

impl ModeMap {
    /// Wraps a rule. The caller promises that every output lies within
    /// max-norm distance `spread` of the input mode.
    pub fn from_rule<F>(n: usize, spin_dim: usize, spread: u64, rule: F) -> Self
    where
        F: Fn(&LatticePoint, usize) -> Output + Send + Sync + 'static,
    {
        ModeMap {
            n,
            spin_dim,
            spread,
            rule: Arc::new(rule),
        }
    }

    pub fn zero(n: usize, spin_dim: usize) -> Self {
        Self::from_rule(n, spin_dim, 0, |_, _| Vec::new())
    }

    pub fn identity(n: usize, spin_dim: usize) -> Self {
        Self::from_rule(n, spin_dim, 0, |k, i| {
            vec![(k.clone(), i, Complex64::new(1.0, 0.0))]
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn spread(&self) -> u64 {
        self.spread
    }

    /// Image of U_k ⊗ e_i.
    pub fn apply_basis(&self, k: &LatticePoint, i: usize) -> Output {
        debug_assert!(i < self.spin_dim && k.dim() == self.n);
        (self.rule)(k, i)
    }

    pub fn apply(&self, v: &SparseVector) -> SparseVector {
        let mut out = SparseVector::new();
        // Sorted order keeps floating-point accumulation reproducible.
        for ((k, i), c) in v.sorted() {
            for (k2, j, a) in self.apply_basis(&k, i) {
                out.add_to(k2, j, a * c);
            }
        }
        out
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.spin_dim != other.spin_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spin_dim,
                found: other.spin_dim,
            });
        }
        Ok(())
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.compatible(inner)?;
        let (outer, inner) = (self.clone(), inner.clone());
        let spread = outer.spread + inner.spread;
        Ok(Self::from_rule(
            self.n,
            self.spin_dim,
            spread,
            move |k, i| {
                let mut acc = SparseVector::new();
                for (k1, j, a) in inner.apply_basis(k, i) {
                    for (k2, l, b) in outer.apply_basis(&k1, j) {
                        acc.add_to(k2, l, a * b);
                    }
                }
                acc.into_output()
            },
        ))
    }

    /// Linear combination Σ c_j T_j of maps with equal shapes.
    pub fn linear_combination(terms: &[(Complex64, ModeMap)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Domain("empty linear combination".into()))?;
        for (_, t) in terms {
            first.1.compatible(t)?;
        }
        let spread = terms.iter().map(|(_, t)| t.spread).max().unwrap_or(0);
        let owned: Vec<(Complex64, ModeMap)> = terms.to_vec();
        let (n, s) = (first.1.n, first.1.spin_dim);
        Ok(Self::from_rule(n, s, spread, move |k, i| {
            let mut acc = SparseVector::new();
            for (c, t) in &owned {
                for (k2, j, a) in t.apply_basis(k, i) {
                    acc.add_to(k2, j, a * c);
                }
            }
            acc.into_output()
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self.clone()), (one, other.clone())])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self.clone()), (-one, other.clone())])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let inner = self.clone();
        Self::from_rule(self.n, self.spin_dim, self.spread, move |k, i| {
            inner
                .apply_basis(k, i)
                .into_iter()
                .map(|(k2, j, a)| (k2, j, a * c))
                .collect()
        })
    }

    /// [self, other].
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// max over the basis inputs of `window` of the largest output
    /// difference. Both maps are applied exactly, so no truncation enters.
    pub fn max_deviation(&self, other: &Self, window: &ModeWindow) -> Result<f64> {
        self.compatible(other)?;
        let pts = window.points(self.n);
        let worst = pts
            .par_iter()
            .map(|k| {
                let mut m: f64 = 0.0;
                for i in 0..self.spin_dim {
                    let mut a = SparseVector::new();
                    for (k2, j, c) in self.apply_basis(k, i) {
                        a.add_to(k2, j, c);
                    }
                    let mut b = SparseVector::new();
                    for (k2, j, c) in other.apply_basis(k, i) {
                        b.add_to(k2, j, c);
                    }
                    m = m.max(a.max_diff(&b));
                }
                m
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst)
    }

    /// Largest output amplitude over the basis inputs of `window`.
    pub fn max_abs_on(&self, window: &ModeWindow) -> f64 {
        let z = Self::zero(self.n, self.spin_dim);
        self.max_deviation(&z, window).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift(n: usize, by: i64) -> ModeMap {
        ModeMap::from_rule(n, 1, by.unsigned_abs(), move |k, i| {
            let mut k2 = k.coords().to_vec();
            k2[0] += by;
            vec![(LatticePoint::new(&k2), i, Complex64::new(2.0, 0.0))]
        })
    }

    #[test]
    fn composition_adds_spread_and_multiplies_amplitudes() {
        let s = shift(2, 1);
        let t = s.compose(&s).unwrap();
        assert_eq!(t.spread(), 2);
        let out = t.apply_basis(&LatticePoint::new(&[0, 0]), 0);
        assert_eq!(
            out,
            vec![(LatticePoint::new(&[2, 0]), 0, Complex64::new(4.0, 0.0))]
        );
    }

    #[test]
    fn sums_merge_and_cancel() {
        let s = shift(1, 1);
        let d = s.sub(&s).unwrap();
        assert!(d.apply_basis(&LatticePoint::new(&[3]), 0).is_empty());
        assert_eq!(s.add(&shift(1, -2)).unwrap().spread(), 2);
        let w = ModeWindow::max_norm(3);
        assert_eq!(d.max_abs_on(&w), 0.0);
        assert_eq!(
            s.max_deviation(&s.scale(Complex64::new(0.5, 0.0)), &w)
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        assert!(ModeMap::identity(2, 2)
            .compose(&ModeMap::identity(2, 1))
            .is_err());
        assert!(ModeMap::identity(1, 2)
            .add(&ModeMap::identity(2, 2))
            .is_err());
    }
}
