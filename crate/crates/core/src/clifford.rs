//! Hermitian gamma matrices, chirality and charge conjugation for 1 ≤ n ≤ 6.
//!
//! The representation is fixed: σ₁, σ₂ for n = 2, and the step n → n+2 maps
//! a set {γ_a} with chirality χ to {γ_a⊗σ₁, χ⊗σ₁, 1⊗σ₂}. Odd n appends the
//! chirality of the even set below it. The charge conjugation is stored as
//! a unitary matrix C; the antilinear operator is C₀ = C∘K with K complex
//! conjugation, so the defining relation reads C·conj(γ^α)·C⁻¹ = −ε γ^α.
//!
//! Signs produced by this construction (ε, sign of C₀²):
//!
//! | n | ε  | C₀² |
//! |---|----|-----|
//! | 1 | −1 | +1  |
//! | 2 | +1 | −1  |
//! | 3 | +1 | −1  |
//! | 4 | +1 | −1  |
//! | 5 | −1 | −1  |
//! | 6 | +1 | +1  |
//!
//! For even n both signs of ε are realisable; ε = +1 is chosen.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Gamma matrices and the associated chirality and charge conjugation.
#[derive(Debug, Clone)]
pub struct GammaSet {
    pub n: usize,
    pub m: usize,
    pub gammas: Vec<CMatrix>,
    /// (−i)^m γ¹⋯γⁿ, present for even n.
    pub chirality: Option<CMatrix>,
    pub c0: CMatrix,
    pub epsilon: i8,
    /// Sign s with C₀² = s·1.
    pub c0_square_sign: i8,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sigma1() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn sigma2() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn ordered_product(ms: &[CMatrix]) -> CMatrix {
    let d = ms[0].nrows();
    ms.iter().fold(CMatrix::identity(d, d), |acc, g| acc * g)
}

fn chirality_of(gammas: &[CMatrix]) -> CMatrix {
    let m = gammas.len() / 2;
    let mut phase = c(1.0, 0.0);
    for _ in 0..m {
        phase *= c(0.0, -1.0);
    }
    ordered_product(gammas) * phase
}

fn even_set(n: usize) -> Vec<CMatrix> {
    if n == 2 {
        return vec![sigma1(), sigma2()];
    }
    let lower = even_set(n - 2);
    let chi = chirality_of(&lower);
    let d = lower[0].nrows();
    let mut out: Vec<CMatrix> = lower.iter().map(|g| kron(g, &sigma1())).collect();
    out.push(kron(&chi, &sigma1()));
    out.push(kron(&CMatrix::identity(d, d), &sigma2()));
    out
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Searches the products γ^{a₁}⋯γ^{a_r} (a₁ < ⋯ < a_r) for a matrix C with
/// C·conj(γ^α) = −ε γ^α·C for every α.
fn find_conjugation(gammas: &[CMatrix], epsilon: f64) -> Option<CMatrix> {
    let n = gammas.len();
    let d = gammas[0].nrows();
    for mask in 0u32..(1 << n) {
        let mut cm = CMatrix::identity(d, d);
        for (a, g) in gammas.iter().enumerate() {
            if mask & (1 << a) != 0 {
                cm *= g;
            }
        }
        let ok = gammas.iter().all(|g| {
            let lhs = &cm * g.map(|z| z.conj());
            let rhs = g * &cm * c(-epsilon, 0.0);
            max_abs(&(lhs - rhs)) < 1e-14
        });
        if ok {
            return Some(cm);
        }
    }
    None
}

/// Constructs the gamma set for dimension n.
pub fn build_gamma(n: usize) -> Result<GammaSet> {
    if !(1..=6).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let m = n / 2;
    let (gammas, chirality) = if n == 1 {
        (vec![CMatrix::identity(1, 1)], None)
    } else if n % 2 == 0 {
        let g = even_set(n);
        let chi = chirality_of(&g);
        (g, Some(chi))
    } else {
        let mut g = even_set(n - 1);
        let chi = chirality_of(&g);
        g.push(chi);
        (g, None)
    };
    let (c0, epsilon) = match find_conjugation(&gammas, 1.0) {
        Some(cm) => (cm, 1i8),
        None => (
            find_conjugation(&gammas, -1.0).expect("a charge conjugation exists for every n"),
            -1i8,
        ),
    };
    let sq = &c0 * c0.map(|z| z.conj());
    let c0_square_sign = if sq[(0, 0)].re > 0.0 { 1 } else { -1 };
    Ok(GammaSet {
        n,
        m,
        gammas,
        chirality,
        c0,
        epsilon,
        c0_square_sign,
    })
}

/// The pair (C, ε) of the constructed representation.
pub fn charge_conjugation(n: usize) -> Result<(CMatrix, i8)> {
    let gs = build_gamma(n)?;
    Ok((gs.c0, gs.epsilon))
}

/// γ^{a₁a₂} = ½(γ^{a₁}γ^{a₂} − γ^{a₂}γ^{a₁}) for 0-based axes.
pub fn gamma_pair_symbol(a1: usize, a2: usize, gs: &GammaSet) -> Result<CMatrix> {
    for &a in &[a1, a2] {
        if a >= gs.n {
            return Err(Error::AxisOutOfRange { axis: a, n: gs.n });
        }
    }
    let (g1, g2) = (&gs.gammas[a1], &gs.gammas[a2]);
    Ok((g1 * g2 - g2 * g1) * c(0.5, 0.0))
}

impl GammaSet {
    pub fn spin_dim(&self) -> usize {
        1 << self.m
    }

    /// Σ_μ v_μ γ^μ.
    pub fn slash(&self, v: &[f64]) -> CMatrix {
        let d = self.spin_dim();
        let mut out = CMatrix::zeros(d, d);
        for (g, &x) in self.gammas.iter().zip(v) {
            if x != 0.0 {
                out += g * c(x, 0.0);
            }
        }
        out
    }

    /// Largest deviation from the type invariants: Clifford relations,
    /// hermiticity, chirality relations, the C₀ relation, unitarity of C and
    /// C₀² = ±1.
    pub fn invariant_defect(&self) -> f64 {
        let d = self.spin_dim();
        let id = CMatrix::identity(d, d);
        let mut worst: f64 = 0.0;
        for (a, ga) in self.gammas.iter().enumerate() {
            worst = worst.max(max_abs(&(ga - ga.adjoint())));
            for (b, gb) in self.gammas.iter().enumerate() {
                let want = if a == b {
                    &id * c(2.0, 0.0)
                } else {
                    CMatrix::zeros(d, d)
                };
                worst = worst.max(max_abs(&(ga * gb + gb * ga - want)));
            }
            let lhs = &self.c0 * ga.map(|z| z.conj());
            let rhs = ga * &self.c0 * c(-(self.epsilon as f64), 0.0);
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
        if let Some(chi) = &self.chirality {
            worst = worst.max(max_abs(&(chi * chi - &id)));
            worst = worst.max(max_abs(&(chi - chi.adjoint())));
            for g in &self.gammas {
                worst = worst.max(max_abs(&(chi * g + g * chi)));
            }
        }
        worst = worst.max(max_abs(&(self.c0.adjoint() * &self.c0 - &id)));
        let sq = &self.c0 * self.c0.map(|z| z.conj());
        worst = worst.max(max_abs(&(sq - &id * c(self.c0_square_sign as f64, 0.0))));
        worst
    }
}
