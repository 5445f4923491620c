//! The smooth noncommutative torus with finitely supported coefficients.
//!
//! Elements are finite sums a = Σ a_k U_k with U_k U_q = e^{−(i/2) k·Θq} U_{k+q}.
//! Axis indices are 0-based throughout the library.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lattice::LatticePoint;
use crate::{Error, Result};

/// The skew-symmetric deformation matrix Θ of the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationMatrix {
    n: usize,
    theta: DMatrix<f64>,
}

impl DeformationMatrix {
    /// Builds Θ from row-major entries, checking exact skew-symmetry.
    pub fn new(n: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        let theta = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        for i in 0..n {
            for j in 0..n {
                if theta[(i, j)] != -theta[(j, i)] {
                    return Err(Error::NotSkew { i, j });
                }
            }
        }
        Ok(DeformationMatrix { n, theta })
    }

    pub fn zero(n: usize) -> Self {
        DeformationMatrix {
            n,
            theta: DMatrix::zeros(n, n),
        }
    }

    /// Θ built from a single parameter: θ on every (2j, 2j+1) block,
    /// i.e. θ·diag(J, J, …) with J = [[0,1],[−1,0]]. An odd trailing axis is
    /// left commutative.
    pub fn block_symplectic(n: usize, theta: f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        let mut i = 0;
        while i + 1 < n {
            m[(i, i + 1)] = theta;
            m[(i + 1, i)] = -theta;
            i += 2;
        }
        DeformationMatrix { n, theta: m }
    }

    /// The golden preset 2π·(√5−1)/2 on every symplectic block.
    pub fn golden(n: usize) -> Self {
        Self::block_symplectic(n, 2.0 * PI * golden_conjugate())
    }

    /// The rational preset 2π·p/q on every symplectic block.
    pub fn rational(n: usize, p: i64, q: i64) -> Self {
        Self::block_symplectic(n, 2.0 * PI * p as f64 / q as f64)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.theta[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.theta[(i, j)]).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.theta.iter().all(|&x| x == 0.0)
    }

    /// k·Θq evaluated from the exact integer antisymmetric combinations
    /// k_i q_j − k_j q_i, so only the final weighting is floating point.
    pub fn bilinear(&self, k: &LatticePoint, q: &LatticePoint) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let t = self.theta[(i, j)];
                if t == 0.0 {
                    continue;
                }
                let c = k[i] as i128 * q[j] as i128 - k[j] as i128 * q[i] as i128;
                if c != 0 {
                    acc += t * c as f64;
                }
            }
        }
        acc
    }

    /// Θ applied to an integer vector, as floats.
    pub fn apply(&self, q: &LatticePoint) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.theta[(i, j)] * q[j] as f64).sum())
            .collect()
    }

    fn check(&self, k: &LatticePoint) -> Result<()> {
        if k.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: k.dim(),
            });
        }
        Ok(())
    }
}

/// (√5 − 1)/2.
pub fn golden_conjugate() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Phase exponent φ with U_k U_q = e^{iφ} U_{k+q}, namely −½ k·Θq.
pub fn weyl_phase(k: &LatticePoint, q: &LatticePoint, theta: &DeformationMatrix) -> Result<f64> {
    theta.check(k)?;
    theta.check(q)?;
    Ok(-0.5 * theta.bilinear(k, q))
}

fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// A finitely supported element Σ a_k U_k of A_Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierElement {
    dim: usize,
    coeffs: BTreeMap<LatticePoint, Complex64>,
}

impl FourierElement {
    pub fn zero(dim: usize) -> Self {
        FourierElement {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// c·U_k.
    pub fn monomial(k: LatticePoint, c: Complex64) -> Self {
        let mut e = Self::zero(k.dim());
        e.insert(k, c);
        e
    }

    /// U_k.
    pub fn unitary(k: LatticePoint) -> Self {
        Self::monomial(k, Complex64::new(1.0, 0.0))
    }

    /// c·U_0.
    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self::monomial(LatticePoint::zero(dim), c)
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticePoint, Complex64)>,
    {
        let mut e = Self::zero(dim);
        for (k, c) in terms {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            e.accumulate(k, c);
        }
        Ok(e)
    }

    fn insert(&mut self, k: LatticePoint, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.coeffs.insert(k, c);
        }
    }

    fn accumulate(&mut self, k: LatticePoint, c: Complex64) {
        let entry = self.coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    fn drop_zeros(mut self) -> Self {
        self.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, k: &LatticePoint) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &LatticePoint> {
        self.coeffs.keys()
    }

    /// Largest max-norm over the support (0 for the empty element).
    pub fn spread(&self) -> u64 {
        self.coeffs.keys().map(|k| k.max_norm()).max().unwrap_or(0)
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.accumulate(k.clone(), *c);
        }
        Ok(out.drop_zeros())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.coeffs {
            out.insert(k.clone(), v * c);
        }
        out
    }

    /// Product in A_Θ: (ab)_m = Σ_{k+q=m} a_k b_q e^{−(i/2)k·Θq}.
    pub fn multiply(&self, other: &Self, theta: &DeformationMatrix) -> Result<Self> {
        self.same_dim(other)?;
        if theta.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: theta.dim(),
            });
        }
        let mut out = Self::zero(self.dim);
        for (k, a) in &self.coeffs {
            for (q, b) in &other.coeffs {
                let m = k.checked_add(q)?;
                let ph = -0.5 * theta.bilinear(k, q);
                out.accumulate(m, a * b * cis(ph));
            }
        }
        Ok(out.drop_zeros())
    }

    /// (a*)_k = conj(a_{−k}).
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.coeffs {
            out.insert(k.neg(), c.conj());
        }
        out
    }

    /// τ(a) = a_0.
    pub fn trace(&self) -> Complex64 {
        self.get(&LatticePoint::zero(self.dim))
    }

    /// (δ_μ a)_k = i k_μ a_k for the 0-based axis μ.
    pub fn derivation(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, n: self.dim });
        }
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.coeffs {
            out.insert(k.clone(), c * Complex64::new(0.0, k[axis] as f64));
        }
        Ok(out)
    }

    /// ab − ba.
    pub fn commutator(&self, other: &Self, theta: &DeformationMatrix) -> Result<Self> {
        self.multiply(other, theta)?
            .sub(&other.multiply(self, theta)?)
    }

    /// Drops coefficients of modulus ≤ `threshold`. A threshold of 0 keeps
    /// every nonzero coefficient.
    pub fn pruned(&self, threshold: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() > threshold);
        out
    }

    /// max_k |a_k − b_k|.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (k, c) in &self.coeffs {
            m = m.max((c - other.get(k)).norm());
        }
        for (k, c) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                m = m.max(c.norm());
            }
        }
        m
    }

    /// max_k |a_k|.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// max_k |a_k + (a*)_k|; zero exactly when a is anti-selfadjoint.
    pub fn anti_selfadjoint_defect(&self) -> f64 {
        self.max_diff(&self.adjoint().scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialization of plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Curvature F_{αβ} = δ_α(A_β) − δ_β(A_α) + [A_α, A_β], indexed `[α][β]`.
pub fn field_strength(
    components: &[FourierElement],
    theta: &DeformationMatrix,
) -> Result<Vec<Vec<FourierElement>>> {
    let n = theta.dim();
    if components.len() != n {
        return Err(Error::ComponentCount {
            expected: n,
            found: components.len(),
        });
    }
    let mut f = vec![vec![FourierElement::zero(n); n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let v = components[b]
                .derivation(a)?
                .sub(&components[a].derivation(b)?)?
                .add(&components[a].commutator(&components[b], theta)?)?;
            f[b][a] = v.scale(Complex64::new(-1.0, 0.0));
            f[a][b] = v;
        }
    }
    Ok(f)
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for FourierElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .coeffs
            .iter()
            .map(|(k, c)| TermRepr {
                k: k.coords().to_vec(),
                re: c.re,
                im: c.im,
            })
            .collect();
        ElementRepr {
            dim: self.dim,
            terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ElementRepr::deserialize(d)?;
        FourierElement::from_terms(
            r.dim,
            r.terms
                .into_iter()
                .map(|t| (LatticePoint::from(t.k), Complex64::new(t.re, t.im))),
        )
        .map(FourierElement::drop_zeros)
        .map_err(serde::de::Error::custom)
    }
}
