//! Noncommutative integrals ∮(ÃD⁻¹)^q with Ã = D_A − D, and the constant
//! term of the spectral action they assemble into.
//!
//! The diagonal amplitude of (ÃD⁻¹)^q at mode k is a finite sum over closed
//! shift paths. Each D⁻¹ factor (k+u)̸/|k+u|² is expanded in |k|⁻¹, each
//! sine coming from Ã is split into two exponentials, and the resulting
//! homogeneous pieces k^α|k|^{−2r}e^{2πik·a} are handed to the residue
//! machinery of the zeta module. Pieces of degree below −n are regular at
//! s = 0, so the expansion is cut there.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::clifford::CMatrix;
use crate::diophantine::{classify_matrix, Verdict};
use crate::operator::{OneForm, SpectralTriple};
use crate::special::{binomial, gamma_half, ComplexSum};
use crate::weyl::field_strength;
use crate::zeta::is_integral;
use crate::{DeformationMatrix, Error, FourierElement, LatticePoint, Result};

type Alpha = Vec<u32>;
/// (α, r) ↦ coefficient of k^α |k|^{−2r}.
type Symbol = FxHashMap<(Alpha, u32), Complex64>;

fn grading(alpha: &Alpha, r: u32) -> i64 {
    alpha.iter().sum::<u32>() as i64 - 2 * r as i64
}

fn mul_symbols(a: &Symbol, b: &Symbol, gmin: i64) -> Symbol {
    let mut out = Symbol::default();
    for ((a1, r1), c1) in a {
        for ((a2, r2), c2) in b {
            let alpha: Alpha = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
            let r = r1 + r2;
            if grading(&alpha, r) < gmin {
                continue;
            }
            *out.entry((alpha, r)).or_default() += c1 * c2;
        }
    }
    out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    out
}

/// 1/|k+u|² = Σ_{a,b} (−1)^{a+b} C(a+b, a)(2k·u)^a |u|^{2b} |k|^{−2(1+a+b)}
/// for a + 2b ≤ order.
fn inverse_square(u: &[i64], order: u32) -> Symbol {
    let n = u.len();
    let uu: i64 = u.iter().map(|x| x * x).sum();
    // powers of the linear form 2k·u as polynomials in k
    let mut powers: Vec<BTreeMap<Alpha, f64>> = vec![BTreeMap::from([(vec![0; n], 1.0)])];
    for _ in 0..order {
        let prev = powers.last().unwrap();
        let mut next: BTreeMap<Alpha, f64> = BTreeMap::new();
        for (alpha, c) in prev {
            for (i, &ui) in u.iter().enumerate() {
                if ui != 0 {
                    let mut a2 = alpha.clone();
                    a2[i] += 1;
                    *next.entry(a2).or_insert(0.0) += c * 2.0 * ui as f64;
                }
            }
        }
        powers.push(next);
    }
    let mut out = Symbol::default();
    for a in 0..=order {
        for b in 0..=(order - a) / 2 {
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * binomial(a + b, a) * (uu as f64).powi(b as i32);
            if c == 0.0 {
                continue;
            }
            for (alpha, p) in &powers[a as usize] {
                *out.entry((alpha.clone(), 1 + a + b)).or_default() += Complex64::new(c * p, 0.0);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct NcOptions {
    /// Highest a + 2b kept when expanding each |k+u|^{−2}.
    pub order: Option<u32>,
    /// Whether Θ is known to satisfy the Diophantine hypothesis. When unset
    /// it is tested with a badly-approximable scan.
    pub certified: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NcIntegral {
    pub q: usize,
    pub value: Complex64,
    /// |value(order) − value(order − 1)|.
    pub error_estimate: f64,
    pub order: u32,
    /// Θ was not certified badly approximable, so dropping non-integral
    /// twists is not justified by the residue theorem.
    pub uncertified: bool,
    pub closed_paths: usize,
}

/// Default expansion order n + 3.
pub fn default_order(n: usize) -> u32 {
    n as u32 + 3
}

/// Search bound of the badly-approximable scan behind [`diophantine_certified`].
pub const CERTIFY_QMAX: u64 = 1000;

/// Scan-based check of the Diophantine hypothesis on Θ.
pub fn diophantine_certified(theta: &DeformationMatrix) -> bool {
    if theta.is_zero() {
        return false;
    }
    classify_matrix(theta, 1.0, 1e-3, CERTIFY_QMAX).verdict == Verdict::NoViolationUpToQ
}

struct Prepared {
    n: usize,
    spin: usize,
    gammas: Vec<CMatrix>,
    theta: DeformationMatrix,
    /// Nonzero shifts v with their Clifford coefficient B_v = Σ_α A_α(v)γ^α.
    shifts: Vec<(LatticePoint, CMatrix)>,
}

fn prepare(triple: &SpectralTriple, a: &OneForm) -> Result<Prepared> {
    let n = triple.n();
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.dim(),
        });
    }
    let spin = triple.spin_dim();
    let gammas = triple.gammas().gammas.clone();
    let mut map: BTreeMap<LatticePoint, CMatrix> = BTreeMap::new();
    for (alpha, comp) in a.components().iter().enumerate() {
        for (v, c) in comp.iter() {
            // The zero mode commutes with everything: L(A₀) − R(A₀) = 0.
            if v.is_zero() || *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let entry = map
                .entry(v.clone())
                .or_insert_with(|| CMatrix::zeros(spin, spin));
            *entry += &gammas[alpha] * *c;
        }
    }
    Ok(Prepared {
        n,
        spin,
        gammas,
        theta: triple.theta().clone(),
        shifts: map.into_iter().collect(),
    })
}

/// Closed paths of length q through the shift list, as index sequences.
fn closed_paths(shifts: &[(LatticePoint, CMatrix)], n: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(q);
    fn rec(
        shifts: &[(LatticePoint, CMatrix)],
        q: usize,
        pos: LatticePoint,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if stack.len() == q {
            if pos.is_zero() {
                out.push(stack.clone());
            }
            return;
        }
        for (i, (v, _)) in shifts.iter().enumerate() {
            stack.push(i);
            rec(shifts, q, pos.add(v), stack, out);
            stack.pop();
        }
    }
    rec(shifts, q, LatticePoint::zero(n), &mut stack, &mut out);
    out
}

/// Residue contributions grouped by exponent α: (coefficient, twist) lists.
type Contributions = BTreeMap<Alpha, Vec<(Complex64, Vec<f64>)>>;

fn path_contributions(
    p: &Prepared,
    path: &[usize],
    order: u32,
    out: &mut Contributions,
) -> Result<()> {
    let n = p.n;
    let q = path.len();
    let gmin = -(n as i64);
    // u_j: position before step j
    let mut us: Vec<LatticePoint> = vec![LatticePoint::zero(n)];
    for &i in &path[..q - 1] {
        let next = us.last().unwrap().add(&p.shifts[i].0);
        us.push(next);
    }
    // numerator Π_j B_{v_j}(k + u_j)̸ as a matrix polynomial in k, then traced
    let mut num: BTreeMap<Alpha, CMatrix> =
        BTreeMap::from([(vec![0; n], CMatrix::identity(p.spin, p.spin))]);
    for (j, &i) in path.iter().enumerate() {
        let u = us[j].coords();
        let mut slash_u = CMatrix::zeros(p.spin, p.spin);
        for (mu, g) in p.gammas.iter().enumerate() {
            if u[mu] != 0 {
                slash_u += g * Complex64::new(u[mu] as f64, 0.0);
            }
        }
        let mut next: BTreeMap<Alpha, CMatrix> = BTreeMap::new();
        for (alpha, m) in &num {
            let base = &slash_u * m;
            next.entry(alpha.clone())
                .and_modify(|x| *x += &base)
                .or_insert(base);
            for (mu, g) in p.gammas.iter().enumerate() {
                let mut a2 = alpha.clone();
                a2[mu] += 1;
                let t = g * m;
                next.entry(a2).and_modify(|x| *x += &t).or_insert(t);
            }
        }
        let b = &p.shifts[i].1;
        num = next.into_iter().map(|(alpha, m)| (alpha, b * m)).collect();
    }
    let mut symbol: Symbol = num
        .into_iter()
        .map(|(alpha, m)| ((alpha, 0u32), m.trace()))
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .collect();
    for u in &us {
        symbol = mul_symbols(&symbol, &inverse_square(u.coords(), order), gmin);
    }
    let top: Vec<(Alpha, Complex64)> = symbol
        .into_iter()
        .filter(|((alpha, r), _)| grading(alpha, *r) == gmin)
        .map(|((a, _), c)| (a, c))
        .collect();
    if top.is_empty() {
        return Ok(());
    }
    // Each Ã step contributes 2 sin(−½ v·Θ(k+u)) = Σ_σ (iσ) e^{iσ½ v·Θ(k+u)}.
    for mask in 0..(1u32 << q) {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut w = LatticePoint::zero(n);
        for (j, &i) in path.iter().enumerate() {
            let sigma = if mask >> j & 1 == 0 { 1.0 } else { -1.0 };
            let v = &p.shifts[i].0;
            let x = 0.5 * p.theta.bilinear(v, &us[j]);
            phase *= Complex64::new(0.0, sigma) * Complex64::from_polar(1.0, sigma * x);
            w = if sigma > 0.0 {
                w.add(v)
            } else {
                w.add(&v.neg())
            };
        }
        // e^{i½ w·Θk} = e^{2πik·a} with a = −Θw/4π
        let twist: Vec<f64> = p.theta.apply(&w).iter().map(|x| -x / (4.0 * PI)).collect();
        for (alpha, c) in &top {
            out.entry(alpha.clone())
                .or_default()
                .push((c * phase, twist.clone()));
        }
    }
    Ok(())
}

fn integral_at_order(p: &Prepared, q: usize, order: u32) -> Result<(Complex64, usize)> {
    let paths = closed_paths(&p.shifts, p.n, q);
    let mut contributions = Contributions::new();
    for path in &paths {
        path_contributions(p, path, order, &mut contributions)?;
    }
    let mut acc = ComplexSum::default();
    for (alpha, terms) in contributions {
        let sphere = sphere_monomial(&alpha);
        if sphere == 0.0 {
            continue;
        }
        // Only integral twists leave a pole at s = 0.
        for (c, twist) in terms {
            if is_integral(&twist) {
                acc.add(c * sphere);
            }
        }
    }
    Ok((acc.sum(), paths.len()))
}

/// ∫_{S^{n−1}} k^α dσ = 2 Π Γ((α_i+1)/2) / Γ((|α|+n)/2), zero for odd α.
fn sphere_monomial(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let deg: u32 = alpha.iter().sum();
    2.0 * alpha.iter().map(|&a| gamma_half(a + 1)).product::<f64>()
        / gamma_half(deg + alpha.len() as u32)
}

/// ∮(ÃD⁻¹)^q = Res_{s=0} Tr((ÃD⁻¹)^q |D|^{−s}).
pub fn nc_integral_power(
    triple: &SpectralTriple,
    a: &OneForm,
    q: usize,
    opts: &NcOptions,
) -> Result<NcIntegral> {
    let n = triple.n();
    if q == 0 || q > n {
        return Err(Error::Domain(format!("q must lie in 1..={n}, got {q}")));
    }
    let order = opts.order.unwrap_or(default_order(n));
    if order < n as u32 + 2 {
        return Err(Error::Domain(format!(
            "expansion order {order} is below n + 2 = {}",
            n + 2
        )));
    }
    let certified = opts
        .certified
        .unwrap_or_else(|| diophantine_certified(triple.theta()));
    let p = prepare(triple, a)?;
    let (value, closed) = integral_at_order(&p, q, order)?;
    let (lower, _) = integral_at_order(&p, q, order - 1)?;
    Ok(NcIntegral {
        q,
        value,
        error_estimate: (value - lower).norm(),
        order,
        uncertified: !certified,
        closed_paths: closed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantTerm {
    /// ζ_{D_A}(0) − ζ_D(0) = Σ_q ((−1)^q/q) ∮(ÃD⁻¹)^q.
    pub value: Complex64,
    pub terms: Vec<NcIntegral>,
    pub error_estimate: f64,
    pub uncertified: bool,
    /// −(4π²/3) τ(F_{μν}F_{μν}) for n = 4.
    pub curvature_target: Option<Complex64>,
}

pub fn constant_term(
    triple: &SpectralTriple,
    a: &OneForm,
    opts: &NcOptions,
) -> Result<ConstantTerm> {
    let n = triple.n();
    let mut o = *opts;
    if o.certified.is_none() {
        o.certified = Some(diophantine_certified(triple.theta()));
    }
    let mut acc = ComplexSum::default();
    let mut err = 0.0;
    let mut terms = Vec::with_capacity(n);
    for q in 1..=n {
        let t = nc_integral_power(triple, a, q, &o)?;
        let w = if q % 2 == 0 { 1.0 } else { -1.0 } / q as f64;
        acc.add(t.value * w);
        err += t.error_estimate * w.abs();
        terms.push(t);
    }
    let curvature_target = if n == 4 {
        Some(tau_ff(a.components(), triple.theta())? * (-4.0 * PI * PI / 3.0))
    } else {
        None
    };
    Ok(ConstantTerm {
        value: acc.sum(),
        terms,
        error_estimate: err,
        uncertified: !o.certified.unwrap_or(false),
        curvature_target,
    })
}

/// τ(F_{μν}F_{μν}) summed over ordered pairs, with the trace τ(U_k) = δ_{k,0}.
pub fn tau_ff(components: &[FourierElement], theta: &DeformationMatrix) -> Result<Complex64> {
    let f = field_strength(components, theta)?;
    let mut acc = ComplexSum::default();
    for row in &f {
        for fmn in row {
            acc.add(fmn.multiply(fmn, theta)?.trace());
        }
    }
    Ok(acc.sum())
}
