//! Twisted Epstein-type series f_a(s) = Σ_{k≠0} P(k) |k|^{−s} e^{2πik·a}.
//!
//! Continuation uses the Mellin representation
//! Γ(s/2) f_a(s) = ∫₀^∞ t^{s/2−1} Θ_a(t) dt split at t = 1. The upper part is
//! a shell sum of E(s/2, |k|²) where E(z, b) = ∫₁^∞ u^{z−1}e^{−bu}du; the lower
//! part is rewritten through Poisson summation into E((e−s)/2, π²|m−a|²)
//! terms, an explicit pole 2C_P/(s−n−p) when a ∈ Z^n, and −P(0)·2/s.

mod poly;
pub mod theta;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use poly::{sphere_integral, HomogeneousPolynomial, MAX_DEGREE};
pub use theta::{jacobi_theta_1d, poisson_dual, theta_magnitude, theta_sum};

use crate::lattice::{ball, LatticePoint};
use crate::special::{mellin_tail, rgamma, ComplexSum};
use crate::{Error, Result};

/// Tolerance used to decide whether a twist coordinate is an integer.
pub const INTEGER_TWIST_TOL: f64 = 1e-9;

/// The data (n, P, a) of f_a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistedSeries {
    n: usize,
    poly: HomogeneousPolynomial,
    twist: Vec<f64>,
}

impl TwistedSeries {
    pub fn new(poly: HomogeneousPolynomial, twist: Vec<f64>) -> Result<Self> {
        let n = poly.dim();
        if twist.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: twist.len(),
            });
        }
        if twist.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("twist must be finite".into()));
        }
        Ok(TwistedSeries { n, poly, twist })
    }

    /// The untwisted series with P = 1: the Epstein zeta function of Z^n.
    pub fn epstein(n: usize) -> Self {
        TwistedSeries {
            n,
            poly: HomogeneousPolynomial::constant(n, 1.0),
            twist: vec![0.0; n],
        }
    }

    pub fn untwisted(poly: HomogeneousPolynomial) -> Self {
        let n = poly.dim();
        TwistedSeries {
            n,
            poly,
            twist: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn poly(&self) -> &HomogeneousPolynomial {
        &self.poly
    }

    pub fn twist(&self) -> &[f64] {
        &self.twist
    }

    /// n + deg P, the only candidate pole.
    pub fn pole_location(&self) -> f64 {
        (self.n as u32 + self.poly.degree()) as f64
    }

    /// Exactly integral twist: the pole at n + p can then be present.
    pub fn has_integer_twist(&self) -> bool {
        self.twist.iter().all(|x| x.fract() == 0.0)
    }

    pub(crate) fn abs_majorant(&self) -> TwistedSeries {
        let poly = HomogeneousPolynomial::new(
            self.n,
            self.poly.terms().map(|(a, c)| (a.clone(), c.abs())),
        )
        .expect("same exponents");
        TwistedSeries {
            n: self.n,
            poly,
            twist: vec![0.0; self.n],
        }
    }

    fn reduced_twist(&self) -> Vec<f64> {
        self.twist.iter().map(|x| x - x.floor()).collect()
    }
}

/// Method information attached to a continued value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFlags {
    /// The analytic pole term was included.
    pub pole_term: bool,
    /// Largest |k|² used on the direct side.
    pub lattice_radius2: i64,
    /// Largest π²|m − a|² used on the dual side.
    pub dual_cutoff: f64,
}

/// Value of f_a(s) with an error estimate obtained by refining both cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub s: Complex64,
    pub value: Complex64,
    pub est_error: f64,
    pub method: MethodFlags,
}

fn pick_cutoff(growth: f64) -> f64 {
    // smallest B with −B + growth·ln B < −42
    let mut b: f64 = 44.0;
    while -b + growth.max(0.0) * b.ln() > -42.0 {
        b += 4.0;
    }
    b
}

struct Pass {
    value: Complex64,
    magnitude: f64,
}

fn direct_side(series: &TwistedSeries, s: Complex64, r2: i64) -> (Complex64, f64) {
    let twist = series.reduced_twist();
    let points: Vec<LatticePoint> = ball(series.n, r2)
        .into_iter()
        .filter(|k| !k.is_zero())
        .collect();
    let shells = r2 as usize + 1;
    let partial: Vec<Vec<ComplexSum>> = points
        .par_chunks(2048)
        .map(|chunk| {
            let mut w = vec![ComplexSum::default(); shells];
            for k in chunk {
                let kf = k.as_f64();
                let phase = 2.0 * PI * k.dot_f64(&twist);
                let v = Complex64::from_polar(series.poly.eval(&kf), phase);
                w[k.norm2() as usize].add(v);
            }
            w
        })
        .collect();
    let mut weights = vec![ComplexSum::default(); shells];
    for chunk in &partial {
        for (j, c) in chunk.iter().enumerate() {
            weights[j].add(c.sum());
        }
    }
    let mut acc = ComplexSum::default();
    let mut mag = 0.0;
    for (j, w) in weights.iter().enumerate().skip(1).rev() {
        let w = w.sum();
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        let term = w * mellin_tail(s / 2.0, j as f64);
        mag += term.norm();
        acc.add(term);
    }
    (acc.sum(), mag)
}

fn dual_side(series: &TwistedSeries, s: Complex64, cutoff: f64) -> (Complex64, f64) {
    let n = series.n;
    let a = series.reduced_twist();
    let r = cutoff.sqrt() / PI;
    let ranges: Vec<(i64, i64)> = a
        .iter()
        .map(|&x| ((x - r).floor() as i64, (x + r).ceil() as i64))
        .collect();
    let mut shifts = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        let w: Vec<f64> = cur.iter().zip(&a).map(|(&m, &x)| m as f64 - x).collect();
        let b = PI * PI * w.iter().map(|x| x * x).sum::<f64>();
        if b > 0.0 && b <= cutoff {
            shifts.push((w, b));
        }
        for i in (0..n).rev() {
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                continue 'outer;
            }
            cur[i] = ranges[i].0;
        }
        break;
    }
    // Largest b first so that dominant terms are accumulated last.
    shifts.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    let max_e = (2 * series.poly.degree() + n as u32) as usize;
    let terms: Vec<(Complex64, f64)> = shifts
        .par_iter()
        .map(|(w, b)| {
            let mut g = vec![Complex64::new(0.0, 0.0); max_e + 1];
            for (alpha, c) in series.poly.terms() {
                let mut acc: Vec<(u32, Complex64)> = vec![(0, Complex64::new(*c, 0.0))];
                for (i, &ai) in alpha.iter().enumerate() {
                    let f = theta::dual_terms_1d(ai, w[i]);
                    let mut next = Vec::with_capacity(acc.len() * f.len());
                    for &(e0, c0) in &acc {
                        for &(e1, c1) in f.iter() {
                            next.push((e0 + e1, c0 * c1));
                        }
                    }
                    acc = next;
                }
                for (e, c) in acc {
                    g[e as usize] += c;
                }
            }
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for (e, ge) in g.iter().enumerate() {
                if *ge == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let term = ge * mellin_tail((e as f64 - s) / 2.0, *b);
                mag += term.norm();
                sum += term;
            }
            (sum, mag)
        })
        .collect();
    let mut acc = ComplexSum::default();
    let mut mag = 0.0;
    for (t, m) in terms {
        acc.add(t);
        mag += m;
    }
    (acc.sum(), mag)
}

fn one_pass(series: &TwistedSeries, s: Complex64, r2: i64, cutoff: f64, with_pole: bool) -> Pass {
    let rg = rgamma(s / 2.0);
    let (direct, m1) = direct_side(series, s, r2);
    let (dual, m2) = dual_side(series, s, cutoff);
    let mut value = rg * (direct + dual);
    let mut magnitude = rg.norm() * (m1 + m2);
    if with_pole {
        let cp = series.poly.gaussian_moment();
        let pole = rg * 2.0 * cp / (s - series.pole_location());
        value += pole;
        magnitude += pole.norm();
    }
    let origin = series.poly.at_origin();
    if origin != 0.0 {
        let c = -origin * rgamma(s / 2.0 + 1.0);
        value += c;
        magnitude += c.norm();
    }
    Pass { value, magnitude }
}

/// The continued value of f_a at s.
pub fn evaluate(series: &TwistedSeries, s: Complex64) -> Result<ContinuationResult> {
    let with_pole = series.has_integer_twist();
    let pole = series.pole_location();
    if with_pole && (s - pole).norm() < 1e-8 {
        return Err(Error::AtPole(pole));
    }
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::Domain("s must be finite".into()));
    }
    let n = series.n as f64;
    let p = series.poly.degree() as f64;
    let r2 = pick_cutoff(s.re / 2.0 - 1.0 + (n + p) / 2.0) as i64;
    let cutoff = pick_cutoff((2.0 * p + n - s.re) / 2.0 - 1.0 + n / 2.0);
    let coarse = one_pass(series, s, r2, cutoff, with_pole);
    let fine = one_pass(series, s, r2 + 12, cutoff + 12.0, with_pole);
    let est_error =
        (fine.value - coarse.value).norm() + 1e-15 * fine.magnitude.max(fine.value.norm());
    Ok(ContinuationResult {
        s,
        value: fine.value,
        est_error,
        method: MethodFlags {
            pole_term: with_pole,
            lattice_radius2: r2 + 12,
            dual_cutoff: cutoff + 12.0,
        },
    })
}

/// Res_{s=n+p} f_a(s). Equal to ∫_{S^{n−1}} P for integral twists and 0 otherwise.
pub fn residue(series: &TwistedSeries, s0: Complex64) -> Result<Complex64> {
    let pole = series.pole_location();
    if (s0 - pole).norm() > 1e-12 {
        return Err(Error::Domain(format!(
            "{s0} is not the candidate pole {pole}"
        )));
    }
    if !series.has_integer_twist() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cp = series.poly.gaussian_moment();
    Ok(rgamma(Complex64::new(pole / 2.0, 0.0)) * 2.0 * cp)
}

/// Residue at s = 0 of Σ_{k≠0} P(k)|k|^{−(s+c)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedResidue {
    pub value: f64,
    /// False when c ≠ n + p: the shifted series is regular at 0.
    pub pole_present: bool,
}

pub fn residue_shifted(poly: &HomogeneousPolynomial, offset: f64) -> Result<ShiftedResidue> {
    let series = TwistedSeries::untwisted(poly.clone());
    if (offset - series.pole_location()).abs() > 1e-12 {
        return Ok(ShiftedResidue {
            value: 0.0,
            pole_present: false,
        });
    }
    let v = residue(&series, Complex64::new(series.pole_location(), 0.0))?;
    Ok(ShiftedResidue {
        value: v.re,
        pole_present: true,
    })
}

fn spin_mult(n: usize) -> f64 {
    (1u64 << (n / 2)) as f64
}

/// ζ_D(s) = 2^m Σ_{k≠0} |k|^{−s} + dim Ker D with dim Ker D = 2^m.
pub fn zeta_d(s: Complex64, n: usize) -> Result<ContinuationResult> {
    if n == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let mut r = evaluate(&TwistedSeries::epstein(n), s)?;
    let m = spin_mult(n);
    r.value = r.value * m + m;
    r.est_error *= m;
    Ok(r)
}

/// Res_{s=n} ζ_D = 2^m vol(S^{n−1}).
pub fn zeta_d_residue(n: usize) -> Result<f64> {
    let series = TwistedSeries::epstein(n);
    Ok(spin_mult(n) * residue(&series, Complex64::new(n as f64, 0.0))?.re)
}

/// Residue of a finite family Σ_j c_j f_{a_j}(s) sharing the polynomial P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidue {
    pub value: Complex64,
    /// Set when the caller could not certify the Diophantine hypothesis.
    pub uncertified: bool,
    /// Number of terms whose twist is integral.
    pub resonant_terms: usize,
}

/// Σ_j c_j Res f_{a_j}: only integral twists contribute, each with ∫_{S^{n−1}} P.
pub fn twisted_family_residue(
    terms: &[(Complex64, Vec<f64>)],
    poly: &HomogeneousPolynomial,
    certified: bool,
) -> Result<FamilyResidue> {
    let n = poly.dim();
    let sphere = sphere_integral(poly);
    let mut acc = ComplexSum::default();
    let mut resonant = 0;
    for (c, a) in terms {
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.len(),
            });
        }
        if is_integral(a) {
            resonant += 1;
            acc.add(c * sphere);
        }
    }
    Ok(FamilyResidue {
        value: acc.sum(),
        uncertified: !certified,
        resonant_terms: resonant,
    })
}

/// Every coordinate within `INTEGER_TWIST_TOL` of an integer.
pub fn is_integral(a: &[f64]) -> bool {
    a.iter().all(|x| (x - x.round()).abs() <= INTEGER_TWIST_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn riemann_zeta_values() {
        // n = 1, P = 1: f(s) = 2ζ(s)
        let z = TwistedSeries::epstein(1);
        let v = evaluate(&z, c(2.0)).unwrap();
        assert!((v.value.re - PI * PI / 3.0).abs() < 1e-13, "{:?}", v);
        let v = evaluate(&z, c(0.0)).unwrap();
        assert!((v.value.re + 1.0).abs() < 1e-14);
        let v = evaluate(&z, c(-1.0)).unwrap();
        assert!((v.value.re + 1.0 / 6.0).abs() < 1e-13, "{:?}", v); // 2ζ(−1)
    }

    #[test]
    fn pole_is_refused() {
        assert!(matches!(
            evaluate(&TwistedSeries::epstein(2), c(2.0)),
            Err(Error::AtPole(_))
        ));
    }

    #[test]
    fn residues_basic() {
        let r = residue(&TwistedSeries::epstein(2), c(2.0)).unwrap();
        assert!((r.re - 2.0 * PI).abs() < 1e-14);
        assert!(residue(&TwistedSeries::epstein(2), c(3.0)).is_err());
        let tw =
            TwistedSeries::new(HomogeneousPolynomial::constant(2, 1.0), vec![0.3, 0.0]).unwrap();
        assert_eq!(residue(&tw, c(2.0)).unwrap(), c(0.0));
    }
}
