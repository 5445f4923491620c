//! Spectral action Tr Φ(D_A/Λ) and its large-Λ expansion.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dense::{window_radius, window_trace, TraceMethod, WindowOptions};
use super::lattice::{gaussian_lattice_sum, radial_lattice_sum};
use super::profile::CutoffProfile;
use crate::operator::{OneForm, SpectralTriple};
use crate::zeta::zeta_d_residue;
use crate::{Error, Result};

/// Condition number of the scaled design matrix above which a fit is refused.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub lambda: f64,
    pub value: f64,
    pub std_error: f64,
    pub method: TraceMethod,
    pub cutoff_radius: f64,
    pub truncation_bound: f64,
}

fn spin_mult(n: usize) -> f64 {
    (1u64 << (n / 2)) as f64
}

/// Tr Φ(D_A/Λ). Without a one-form the free spectrum is summed over the whole
/// lattice; otherwise D_A is diagonalised on a window large enough that Φ is
/// below `opts.edge_tol` at its edge.
pub fn spectral_action(
    triple: &SpectralTriple,
    profile: &CutoffProfile,
    lambda: f64,
    a: Option<&OneForm>,
    opts: &WindowOptions,
) -> Result<ActionValue> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "Λ must be positive and finite, got {lambda}"
        )));
    }
    let n = triple.n();
    let trivial = a.map_or(true, |a| a.components().iter().all(|c| c.is_empty()));
    if trivial {
        let m = spin_mult(n);
        let radius = lambda * profile.support_radius(1e-17);
        let (v, tail) = match profile {
            CutoffProfile::Gaussian => (gaussian_lattice_sum(n, 1.0 / (lambda * lambda)), 0.0),
            _ => radial_lattice_sum(n, radius, |rho| profile.eval(rho / lambda)),
        };
        return Ok(ActionValue {
            lambda,
            value: m * v,
            std_error: 0.0,
            method: TraceMethod::ExactFormula,
            cutoff_radius: radius,
            truncation_bound: m * (tail * 1e-10 + 1e-16 * v),
        });
    }
    let a = a.unwrap();
    let reach = lambda * profile.support_radius(opts.edge_tol);
    let cutoff = window_radius(reach, a);
    let w = window_trace(
        triple,
        a,
        |x| profile.eval(x / lambda),
        cutoff,
        opts.edge_tol,
        opts,
    )?;
    Ok(ActionValue {
        lambda,
        value: w.value,
        std_error: w.std_error,
        method: w.method,
        cutoff_radius: w.cutoff as f64,
        truncation_bound: w.truncation_bound,
    })
}

/// Evaluates the action on every Λ of the grid in parallel.
pub fn action_samples(
    triple: &SpectralTriple,
    profile: &CutoffProfile,
    lambdas: &[f64],
    a: Option<&OneForm>,
    opts: &WindowOptions,
) -> Result<Vec<ActionValue>> {
    lambdas
        .par_iter()
        .map(|&l| spectral_action(triple, profile, l, a, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficient {
    /// Power of Λ.
    pub power: i32,
    /// Raw least-squares coefficient of Λ^power.
    pub raw: f64,
    /// Φ_power for power ≥ 1, Φ(0) for power 0.
    pub weight: f64,
    /// raw / weight.
    pub c: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub n: usize,
    pub profile: CutoffProfile,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// Coefficients for Λ^n, …, Λ^0.
    pub coefficients: Vec<FitCoefficient>,
    /// Coefficient of the Λ^{−1} guard column.
    pub guard: f64,
    pub residual_rms: f64,
    pub condition: f64,
}

impl ExpansionFit {
    /// The coefficient c_j of Λ^j.
    pub fn c(&self, j: usize) -> Option<&FitCoefficient> {
        self.coefficients.iter().find(|c| c.power == j as i32)
    }
}

/// Least-squares fit of S(Λ) ≈ Σ_{j=0}^{n} Φ_j c_j Λ^j + g Λ^{−1}.
///
/// Columns are normalised before the SVD; the reported condition number is
/// that of the normalised design matrix. Uncertainties combine the residual
/// variance with a rounding floor of 1e−15·max|S| propagated through the
/// pseudo-inverse.
pub fn fit_expansion(
    profile: &CutoffProfile,
    n: usize,
    lambdas: &[f64],
    values: &[f64],
) -> Result<ExpansionFit> {
    let p = n + 2;
    let m = lambdas.len();
    if values.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: values.len(),
        });
    }
    if m < n + 3 {
        return Err(Error::Domain(format!(
            "need at least {} Λ values, got {m}",
            n + 3
        )));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Domain("Λ values must be positive".into()));
    }
    let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().cloned().fold(0.0, f64::max);
    if hi < 4.0 * lo {
        return Err(Error::Domain(format!(
            "Λ range [{lo}, {hi}] spans less than a factor 4"
        )));
    }
    let powers: Vec<i32> = (-1..=n as i32).rev().collect();
    let mut design = DMatrix::<f64>::from_fn(m, p, |i, j| lambdas[i].powi(powers[j]));
    let scales: Vec<f64> = (0..p).map(|j| design.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    // pseudo-inverse V Σ⁻¹ Uᵀ
    let mut sinv = DMatrix::<f64>::zeros(p, p);
    for k in 0..p {
        sinv[(k, k)] = 1.0 / svd.singular_values[k];
    }
    let pinv = vt.transpose() * &sinv * u.transpose();
    let y = DVector::from_column_slice(values);
    let x = &pinv * &y;
    let resid = &design * &x - &y;
    let rss = resid.norm_squared();
    let sigma2 = if m > p { rss / (m - p) as f64 } else { 0.0 };
    let ymax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor2 = (1e-15 * ymax).powi(2);
    let mut coefficients = Vec::with_capacity(n + 1);
    let mut guard = 0.0;
    for j in 0..p {
        let row2: f64 = pinv.row(j).iter().map(|v| v * v).sum();
        let raw = x[j] / scales[j];
        let raw_err = ((sigma2 + floor2) * row2).sqrt() / scales[j];
        if powers[j] < 0 {
            guard = raw;
            continue;
        }
        let weight = profile.expansion_weight(powers[j] as u32)?;
        coefficients.push(FitCoefficient {
            power: powers[j],
            raw,
            weight,
            c: raw / weight,
            uncertainty: raw_err / weight.abs(),
        });
    }
    Ok(ExpansionFit {
        n,
        profile: *profile,
        lambdas: lambdas.to_vec(),
        values: values.to_vec(),
        coefficients,
        guard,
        residual_rms: (rss / m as f64).sqrt(),
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmologicalTerm {
    pub value: f64,
    pub uncertainty: f64,
    /// Res_{s=n} ζ_D = 2^m vol(S^{n−1}).
    pub reference: f64,
    pub relative_deviation: f64,
}

/// Leading coefficient c_n of a fit, compared with the residue of ζ_D at n.
pub fn cosmological_term(fit: &ExpansionFit) -> Result<CosmologicalTerm> {
    let c = fit
        .c(fit.n)
        .ok_or_else(|| Error::Domain("fit has no leading coefficient".into()))?;
    let reference = zeta_d_residue(fit.n)?;
    Ok(CosmologicalTerm {
        value: c.c,
        uncertainty: c.uncertainty,
        reference,
        relative_deviation: (c.c - reference).abs() / reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_polynomial_is_recovered() {
        let p = CutoffProfile::Gaussian;
        let lambdas: Vec<f64> = (0..10).map(|i| 3.0 * 1.2f64.powi(i)).collect();
        let w2 = p.moment(2).unwrap();
        let values: Vec<f64> = lambdas
            .iter()
            .map(|l| w2 * 7.0 * l * l + 0.5 + 0.25 / l)
            .collect();
        let fit = fit_expansion(&p, 2, &lambdas, &values).unwrap();
        assert!((fit.c(2).unwrap().c - 7.0).abs() < 1e-10);
        assert!(fit.c(1).unwrap().c.abs() < 1e-9);
        assert!((fit.c(0).unwrap().c - 0.5).abs() < 1e-8);
        assert!((fit.guard - 0.25).abs() < 1e-7);
    }

    #[test]
    fn narrow_or_short_grids_are_refused() {
        let p = CutoffProfile::Gaussian;
        assert!(fit_expansion(&p, 2, &[1.0, 2.0, 3.0, 4.0], &[0.0; 4]).is_err());
        let l: Vec<f64> = (0..6).map(|i| 10.0 + i as f64).collect();
        assert!(fit_expansion(&p, 2, &l, &[0.0; 6]).is_err());
    }
}
