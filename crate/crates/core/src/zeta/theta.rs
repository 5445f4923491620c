//! Gaussian lattice sums Σ P(k) e^{2πik·a} e^{−t|k|²} in direct and dual form.
//!
//! Both forms factor over coordinates monomial by monomial, so only
//! one-dimensional sums are ever evaluated.

use std::f64::consts::PI;

use num_complex::Complex64;
use smallvec::SmallVec;

use super::TwistedSeries;
use crate::special::{binomial, gamma_half, ComplexSum};
use crate::{Error, Result};

/// Radius K with e^{−tK²}K^j below 1e−17 of the k = 1 scale.
fn direct_radius(t: f64, j: u32) -> i64 {
    let mut k = ((41.0 / t).sqrt()).ceil().max(1.0);
    while -t * k * k + j as f64 * k.ln() > -41.0 {
        k += 1.0;
    }
    k as i64
}

/// Σ_{k∈Z} k^j e^{2πikx − tk²}, summed in ± pairs from the outside in.
pub fn direct_1d(j: u32, t: f64, x: f64) -> Complex64 {
    let kmax = direct_radius(t, j);
    let mut re = crate::special::Neumaier::default();
    let mut im = crate::special::Neumaier::default();
    for k in (1..=kmax).rev() {
        let kf = k as f64;
        let w = kf.powi(j as i32) * (-t * kf * kf).exp();
        let phi = 2.0 * PI * (k as f64) * x.fract();
        if j % 2 == 0 {
            re.add(2.0 * w * phi.cos());
        } else {
            im.add(2.0 * w * phi.sin());
        }
    }
    if j == 0 {
        re.add(1.0);
    }
    Complex64::new(re.sum(), im.sum())
}

/// Terms of ∫ x^j e^{−2πixw − tx²} dx = e^{−π²w²/t} Σ_e c_e t^{−e/2},
/// returned as (e, c_e) with e = 2j − l + 1 for even l ≤ j.
pub fn dual_terms_1d(j: u32, w: f64) -> SmallVec<[(u32, Complex64); 4]> {
    let mut out = SmallVec::new();
    let base = Complex64::new(0.0, -PI * w);
    for l in (0..=j).step_by(2) {
        let c = base.powu(j - l) * (binomial(j, l) * gamma_half(l + 1));
        if c != Complex64::new(0.0, 0.0) {
            out.push((2 * j - l + 1, c));
        }
    }
    out
}

/// ∫ x^j e^{−2πixw − tx²} dx.
pub fn gaussian_fourier_1d(j: u32, t: f64, w: f64) -> Complex64 {
    let damp = (-PI * PI * w * w / t).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for (e, c) in dual_terms_1d(j, w) {
        acc += c * t.powf(-(e as f64) / 2.0);
    }
    acc * damp
}

/// Σ_{m∈Z} ∫ x^j e^{−2πix(m−x₀) − tx²} dx, equal to `direct_1d(j, t, x₀)` by Poisson.
pub fn dual_1d(j: u32, t: f64, x0: f64) -> Complex64 {
    let x0 = x0 - x0.floor();
    let reach = ((45.0 * t).sqrt() / PI).ceil() as i64 + 2 + j as i64;
    let mut acc = ComplexSum::default();
    // Outermost shifts first so the dominant terms are added last.
    let mut ms: Vec<i64> = (-reach..=reach + 1).collect();
    ms.sort_by(|a, b| {
        let (wa, wb) = ((*a as f64 - x0).abs(), (*b as f64 - x0).abs());
        wb.partial_cmp(&wa).unwrap()
    });
    for m in ms {
        acc.add(gaussian_fourier_1d(j, t, m as f64 - x0));
    }
    acc.sum()
}

/// Σ_{k∈Z} e^{2πikx − tk²}, via the dual representation when t < π.
pub fn jacobi_theta_1d(t: f64, x: f64) -> Complex64 {
    if t < PI {
        dual_1d(0, t, x)
    } else {
        direct_1d(0, t, x)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    Ok(())
}

fn factorized<F>(series: &TwistedSeries, one_d: F) -> Complex64
where
    F: Fn(u32, f64) -> Complex64,
{
    let n = series.n();
    let p = series.poly().degree();
    // table[i][j] = one-dimensional factor for coordinate i and power j
    let table: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..=p).map(|j| one_d(j, series.twist()[i])).collect())
        .collect();
    let mut acc = ComplexSum::default();
    for (alpha, c) in series.poly().terms() {
        let mut v = Complex64::new(*c, 0.0);
        for (i, &a) in alpha.iter().enumerate() {
            v *= table[i][a as usize];
        }
        acc.add(v);
    }
    acc.add(Complex64::new(-series.poly().at_origin(), 0.0));
    acc.sum()
}

/// Σ_{k≠0} P(k) e^{2πik·a} e^{−t|k|²} by direct summation.
pub fn theta_sum(series: &TwistedSeries, t: f64) -> Result<Complex64> {
    check_t(t)?;
    Ok(factorized(series, |j, x| direct_1d(j, t, x)))
}

/// The same sum through Poisson summation: Hermite-weighted Gaussians at
/// the dual shifts m − a.
pub fn poisson_dual(series: &TwistedSeries, t: f64) -> Result<Complex64> {
    check_t(t)?;
    Ok(factorized(series, |j, x| dual_1d(j, t, x)))
}

/// Σ_{k≠0} |P(k)| e^{−t|k|²}: the scale against which both
/// representations are compared.
pub fn theta_magnitude(series: &TwistedSeries, t: f64) -> f64 {
    let abs_series = series.abs_majorant();
    factorized(&abs_series, |j, _| Complex64::new(abs_1d(j, t), 0.0)).re
}

/// Σ_{k∈Z} |k|^j e^{−tk²}.
pub fn abs_1d(j: u32, t: f64) -> f64 {
    let kmax = direct_radius(t, j);
    let s: f64 = (1..=kmax)
        .rev()
        .map(|k| 2.0 * (k as f64).powi(j as i32) * (-t * (k * k) as f64).exp())
        .sum();
    if j == 0 {
        s + 1.0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_identity_one_dimensional() {
        for &t in &[0.01, 0.3, 1.0, 5.0] {
            for &x in &[0.0, 0.25, 0.5, 0.8] {
                for j in 0..=4 {
                    let d = direct_1d(j, t, x);
                    let p = dual_1d(j, t, x);
                    let scale = abs_1d(j, t);
                    assert!(
                        (d - p).norm() < 1e-13 * scale,
                        "j={j} t={t} x={x}: {d} vs {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn fourier_transform_against_quadrature() {
        let (j, t, w) = (3u32, 0.7, 0.4);
        let f = |x: f64| x.powi(j as i32) * (-t * x * x).exp();
        let re = quadrature::double_exponential::integrate(
            |x| f(x) * (2.0 * PI * x * w).cos(),
            -12.0,
            12.0,
            1e-14,
        );
        let im = quadrature::double_exponential::integrate(
            |x| -f(x) * (2.0 * PI * x * w).sin(),
            -12.0,
            12.0,
            1e-14,
        );
        let v = gaussian_fourier_1d(j, t, w);
        assert!((v.re - re.integral).abs() < 1e-12);
        assert!((v.im - im.integral).abs() < 1e-12);
    }
}
