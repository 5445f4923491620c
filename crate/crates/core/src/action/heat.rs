//! Heat traces Tr e^{−tD_A²}, twisted traces Tr(L(a)R(b)e^{−tD²}) and the
//! small-t behaviour of their off-diagonal corrections.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dense::{window_radius, window_trace, TraceMethod, WindowOptions};
use super::lattice::gaussian_lattice_sum;
use crate::operator::{OneForm, SpectralTriple};
use crate::special::ComplexSum;
use crate::zeta::jacobi_theta_1d;
use crate::{DeformationMatrix, Error, FourierElement, LatticePoint, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatSample {
    pub t: f64,
    /// The imaginary part is a diagnostic and should vanish for selfadjoint data.
    pub value: Complex64,
    pub method: TraceMethod,
    /// Lattice or window radius used.
    pub cutoff_radius: f64,
    pub tail_bound: f64,
    pub std_error: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "t must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Radius beyond which e^{−tρ²} < 1e−17.
fn gaussian_reach(t: f64, tol: f64) -> f64 {
    (-tol.ln() / t).sqrt()
}

/// Tr e^{−tD²} = 2^m Σ_k e^{−t|k|²} for the free Dirac operator.
pub fn free_heat_trace(n: usize, t: f64) -> Result<HeatSample> {
    check_t(t)?;
    let m = (1u64 << (n / 2)) as f64;
    let v = m * gaussian_lattice_sum(n, t);
    Ok(HeatSample {
        t,
        value: Complex64::new(v, 0.0),
        method: TraceMethod::ExactFormula,
        cutoff_radius: gaussian_reach(t, 1e-17),
        tail_bound: 1e-16 * v,
        std_error: 0.0,
    })
}

/// Tr e^{−tD_A²}. The exact formula needs A = 0; the dense window is sized
/// so that e^{−tλ²} is below `opts.edge_tol` past the reach of A.
pub fn heat_trace(
    triple: &SpectralTriple,
    a: Option<&OneForm>,
    t: f64,
    method: TraceMethod,
    opts: &WindowOptions,
) -> Result<HeatSample> {
    check_t(t)?;
    let n = triple.n();
    match method {
        TraceMethod::ExactFormula => {
            if a.is_some_and(|a| a.components().iter().any(|c| !c.is_empty())) {
                return Err(Error::Domain(
                    "the exact formula applies to A = 0 only".into(),
                ));
            }
            free_heat_trace(n, t)
        }
        TraceMethod::DenseWindow | TraceMethod::Stochastic => {
            let zero = OneForm::zero(n);
            let a = a.unwrap_or(&zero);
            let cutoff = window_radius(gaussian_reach(t, opts.edge_tol), a);
            let mut o = *opts;
            if method == TraceMethod::Stochastic {
                // Asking for the estimator means every block goes through it.
                o.allow_stochastic = true;
                o.block_limit = 0;
            }
            let w = window_trace(triple, a, |x| (-t * x * x).exp(), cutoff, opts.edge_tol, &o)?;
            Ok(HeatSample {
                t,
                value: Complex64::new(w.value, 0.0),
                method: w.method,
                cutoff_radius: w.cutoff as f64,
                tail_bound: w.truncation_bound,
                std_error: w.std_error,
            })
        }
    }
}

/// S_q(t) = Σ_k e^{−iq·Θk − t|k|²}, a product of one-dimensional theta
/// functions with twists (Θq)_j/2π.
pub fn twisted_lattice_sum(theta: &DeformationMatrix, q: &LatticePoint, t: f64) -> f64 {
    theta
        .apply(q)
        .iter()
        .map(|x| jacobi_theta_1d(t, x / TAU).re)
        .product()
}

/// Contributions 2^m a_q b_{−q} S_q(t) of each q in the support of a.
pub fn twisted_terms(
    a: &FourierElement,
    b: &FourierElement,
    theta: &DeformationMatrix,
    t: f64,
) -> Result<Vec<(LatticePoint, Complex64)>> {
    check_t(t)?;
    let n = theta.dim();
    if a.dim() != n || b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if a.dim() != n { a.dim() } else { b.dim() },
        });
    }
    let m = (1u64 << (n / 2)) as f64;
    let mut out: Vec<(LatticePoint, Complex64)> = a
        .iter()
        .filter_map(|(q, aq)| {
            let bq = b.get(&q.neg());
            (bq != Complex64::new(0.0, 0.0))
                .then(|| (q.clone(), aq * bq * (m * twisted_lattice_sum(theta, q, t))))
        })
        .collect();
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}

/// Tr(L(a)R(b)e^{−tD²}) = 2^m Σ_q a_q b_{−q} S_q(t).
pub fn twisted_heat_trace(
    a: &FourierElement,
    b: &FourierElement,
    theta: &DeformationMatrix,
    t: f64,
) -> Result<HeatSample> {
    let terms = twisted_terms(a, b, theta, t)?;
    let mut acc = ComplexSum::default();
    let mut scale = 0.0;
    for (_, v) in &terms {
        acc.add(*v);
        scale += v.norm();
    }
    Ok(HeatSample {
        t,
        value: acc.sum(),
        method: TraceMethod::ExactFormula,
        cutoff_radius: gaussian_reach(t, 1e-17),
        tail_bound: 1e-16 * scale,
        std_error: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOptions {
    /// The probe pair is a = Σ_{j=0}^J e^{−βj}U_{je₀}, b = Σ_{j=0}^J U_{−je₀}.
    pub decay: f64,
    pub terms: usize,
    /// Relative size of Δ(t) below which it counts as numerically zero.
    pub noise_floor: f64,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        CorrectionOptions {
            decay: 0.5,
            terms: 30,
            noise_floor: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionRegime {
    /// Δ(t) ~ C t^s with a measurable slope s.
    PowerLaw,
    /// Δ(t) falls below the noise floor at the smallest t.
    ExponentiallySmall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionPoint {
    pub t: f64,
    /// Σ_{q≠0} contributions.
    pub delta: f64,
    /// The q = 0 contribution.
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRow {
    pub label: String,
    pub regime: CorrectionRegime,
    /// Slope of log|Δ| against log t over the points above the noise floor.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub points: Vec<CorrectionPoint>,
}

/// The probe pair used by [`correction_scaling`].
pub fn correction_probe(
    n: usize,
    opts: &CorrectionOptions,
) -> Result<(FourierElement, FourierElement)> {
    let e0 = LatticePoint::unit(n, 0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..=opts.terms as i64 {
        let q = e0.scaled(j)?;
        a.push((
            q.clone(),
            Complex64::new((-opts.decay * j as f64).exp(), 0.0),
        ));
        b.push((q.neg(), Complex64::new(1.0, 0.0)));
    }
    Ok((
        FourierElement::from_terms(n, a)?,
        FourierElement::from_terms(n, b)?,
    ))
}

fn check_log_grid(ts: &[f64]) -> Result<()> {
    if ts.len() < 6 {
        return Err(Error::Domain(format!(
            "need at least 6 t values, got {}",
            ts.len()
        )));
    }
    if ts.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Domain("t values must be positive".into()));
    }
    let r = ts[1] / ts[0];
    let uniform = ts
        .windows(2)
        .all(|w| ((w[1] / w[0]) / r - 1.0).abs() < 1e-6);
    if !uniform || r <= 1.0 {
        return Err(Error::Domain(
            "t grid must be increasing and log-spaced".into(),
        ));
    }
    Ok(())
}

/// For each Θ, Δ(t) = Tr(L(a)R(b)e^{−tD²}) minus its q = 0 part on the probe
/// pair, and the slope of log|Δ| against log t.
pub fn correction_scaling(
    family: &[(String, DeformationMatrix)],
    t_grid: &[f64],
    opts: &CorrectionOptions,
) -> Result<Vec<CorrectionRow>> {
    check_log_grid(t_grid)?;
    family
        .par_iter()
        .map(|(label, theta)| {
            let (a, b) = correction_probe(theta.dim(), opts)?;
            let mut points = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                let terms = twisted_terms(&a, &b, theta, t)?;
                let mut delta = ComplexSum::default();
                let mut baseline = 0.0;
                for (q, v) in terms {
                    if q.is_zero() {
                        baseline = v.re;
                    } else {
                        delta.add(v);
                    }
                }
                points.push(CorrectionPoint {
                    t,
                    delta: delta.sum().re,
                    baseline,
                });
            }
            Ok(classify(label.clone(), points, opts.noise_floor))
        })
        .collect()
}

fn classify(label: String, points: Vec<CorrectionPoint>, floor: f64) -> CorrectionRow {
    let above: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.delta.abs() > floor * p.baseline.abs())
        .map(|p| (p.t.ln(), p.delta.abs().ln()))
        .collect();
    let smallest = points.iter().min_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    let vanishes = smallest.is_some_and(|p| p.delta.abs() <= floor * p.baseline.abs());
    let regime = if vanishes {
        CorrectionRegime::ExponentiallySmall
    } else {
        CorrectionRegime::PowerLaw
    };
    let fit = (above.len() >= 2).then(|| linear_fit(&above));
    CorrectionRow {
        label,
        regime,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        r_squared: fit.map(|f| f.2),
        points,
    }
}

/// Least-squares line y = s x + c with its R².
fn linear_fit(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let s = sxy / sxx;
    let c = my - s * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    (s, c, r2)
}

/// n points log-spaced on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
