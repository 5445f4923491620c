use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::map::{ModeMap, SparseVector};
use super::window::ModeWindow;
use crate::clifford::{build_gamma, gamma_pair_symbol, CMatrix, GammaSet};
use crate::weyl::field_strength;
use crate::{DeformationMatrix, Error, FourierElement, LatticePoint, Result};

const UNITARITY_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Components A_α of the one-form Σ L(−iA_α) ⊗ γ^α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    components: Vec<FourierElement>,
}

impl OneForm {
    pub fn new(components: Vec<FourierElement>, n: usize) -> Result<Self> {
        if components.len() != n {
            return Err(Error::ComponentCount {
                expected: n,
                found: components.len(),
            });
        }
        for a in &components {
            if a.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.dim(),
                });
            }
        }
        Ok(OneForm { components })
    }

    pub fn zero(n: usize) -> Self {
        OneForm {
            components: vec![FourierElement::zero(n); n],
        }
    }

    /// The form U_k δ_α(U_k*) = −i k_α U_0 produced by gauging zero with U_k.
    pub fn pure_gauge(k: &LatticePoint) -> Self {
        let n = k.dim();
        let components = (0..n)
            .map(|a| FourierElement::scalar(n, c(0.0, -(k[a] as f64))))
            .collect();
        OneForm { components }
    }

    /// Random anti-selfadjoint form: each component is a sum of `terms`
    /// modes b U_p − conj(b) U_{−p} with |p|_∞ ≤ radius and |b| ≤ scale.
    pub fn random_anti_selfadjoint<R: Rng>(
        n: usize,
        terms: usize,
        radius: i64,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let components = (0..n)
            .map(|_| {
                let mut acc = FourierElement::zero(n);
                for _ in 0..terms {
                    let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
                    let b = c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                    let m = FourierElement::monomial(LatticePoint::new(&p), b);
                    let term = m.sub(&m.adjoint()).expect("same dimension");
                    acc = acc.add(&term).expect("same dimension");
                }
                acc.scale(c(0.5, 0.0))
            })
            .collect();
        OneForm { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FourierElement] {
        &self.components
    }

    pub fn component(&self, alpha: usize) -> &FourierElement {
        &self.components[alpha]
    }

    /// Largest support max-norm over the components.
    pub fn spread(&self) -> u64 {
        self.components
            .iter()
            .map(|a| a.spread())
            .max()
            .unwrap_or(0)
    }

    /// max_α max_k |(A_α + A_α*)_k|.
    pub fn anti_selfadjoint_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|a| a.anti_selfadjoint_defect())
            .fold(0.0, f64::max)
    }

    /// (A_α − A_α*)/2 componentwise.
    pub fn anti_selfadjoint_part(&self) -> Self {
        let components = self
            .components
            .iter()
            .map(|a| {
                a.sub(&a.adjoint())
                    .expect("same dimension")
                    .scale(c(0.5, 0.0))
            })
            .collect();
        OneForm { components }
    }

    /// max_α max_k |A_α,k − B_α,k|.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }
}

/// The data (A_Θ, H, D) needed to build mode-level operators: Θ and a
/// gamma set for the same n.
#[derive(Debug, Clone)]
pub struct SpectralTriple {
    theta: DeformationMatrix,
    gammas: GammaSet,
}

impl SpectralTriple {
    pub fn new(theta: DeformationMatrix) -> Result<Self> {
        let gammas = build_gamma(theta.dim())?;
        Ok(SpectralTriple { theta, gammas })
    }

    pub fn n(&self) -> usize {
        self.theta.dim()
    }

    pub fn spin_dim(&self) -> usize {
        self.gammas.spin_dim()
    }

    pub fn theta(&self) -> &DeformationMatrix {
        &self.theta
    }

    pub fn gammas(&self) -> &GammaSet {
        &self.gammas
    }

    pub fn epsilon(&self) -> i8 {
        self.gammas.epsilon
    }

    /// A max-norm window small enough for exhaustive identity checks.
    pub fn probe_window(&self) -> ModeWindow {
        ModeWindow::max_norm(match self.n() {
            1 | 2 => 4,
            3 => 3,
            4 => 2,
            _ => 1,
        })
    }

    fn check_element(&self, a: &FourierElement) -> Result<()> {
        if a.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: a.dim(),
            });
        }
        Ok(())
    }

    fn check_form(&self, a: &OneForm) -> Result<()> {
        if a.dim() != self.n() {
            return Err(Error::ComponentCount {
                expected: self.n(),
                found: a.dim(),
            });
        }
        Ok(())
    }

    /// D: U_k ⊗ e_i ↦ k_μ U_k ⊗ γ^μ e_i.
    pub fn dirac(&self) -> ModeMap {
        let gammas = self.gammas.clone();
        let s = self.spin_dim();
        ModeMap::from_rule(self.n(), s, 0, move |k, i| {
            let kf = k.as_f64();
            let m = gammas.slash(&kf);
            (0..s)
                .filter(|&j| m[(j, i)] != c(0.0, 0.0))
                .map(|j| (k.clone(), j, m[(j, i)]))
                .collect()
        })
    }

    /// δ_μ ⊗ 1 for the 0-based axis μ.
    pub fn derivation(&self, axis: usize) -> Result<ModeMap> {
        if axis >= self.n() {
            return Err(Error::AxisOutOfRange { axis, n: self.n() });
        }
        Ok(ModeMap::from_rule(
            self.n(),
            self.spin_dim(),
            0,
            move |k, i| {
                if k[axis] == 0 {
                    Vec::new()
                } else {
                    vec![(k.clone(), i, c(0.0, k[axis] as f64))]
                }
            },
        ))
    }

    /// 1 ⊗ M for a spinor matrix M.
    pub fn spinor(&self, m: &CMatrix) -> Result<ModeMap> {
        let s = self.spin_dim();
        if m.nrows() != s || m.ncols() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: m.nrows(),
            });
        }
        let m = m.clone();
        Ok(ModeMap::from_rule(self.n(), s, 0, move |k, i| {
            (0..s)
                .filter(|&j| m[(j, i)] != c(0.0, 0.0))
                .map(|j| (k.clone(), j, m[(j, i)]))
                .collect()
        }))
    }

    /// L(a) ⊗ 1: U_k ↦ a U_k.
    pub fn left_rep(&self, a: &FourierElement) -> Result<ModeMap> {
        self.check_element(a)?;
        let terms: Vec<(LatticePoint, Complex64)> =
            a.iter().map(|(q, v)| (q.clone(), *v)).collect();
        let theta = self.theta.clone();
        Ok(ModeMap::from_rule(
            self.n(),
            self.spin_dim(),
            a.spread(),
            move |k, i| {
                terms
                    .iter()
                    .map(|(q, v)| {
                        (
                            q.add(k),
                            i,
                            v * Complex64::from_polar(1.0, -0.5 * theta.bilinear(q, k)),
                        )
                    })
                    .collect()
            },
        ))
    }

    /// R(a) ⊗ 1: U_k ↦ U_k a.
    pub fn right_rep(&self, a: &FourierElement) -> Result<ModeMap> {
        self.check_element(a)?;
        let terms: Vec<(LatticePoint, Complex64)> =
            a.iter().map(|(q, v)| (q.clone(), *v)).collect();
        let theta = self.theta.clone();
        Ok(ModeMap::from_rule(
            self.n(),
            self.spin_dim(),
            a.spread(),
            move |k, i| {
                terms
                    .iter()
                    .map(|(q, v)| {
                        (
                            k.add(q),
                            i,
                            v * Complex64::from_polar(1.0, -0.5 * theta.bilinear(k, q)),
                        )
                    })
                    .collect()
            },
        ))
    }

    /// L(a) ⊗ γ^α.
    fn left_gamma(&self, a: &FourierElement, alpha: usize) -> Result<ModeMap> {
        self.left_rep(a)?
            .compose(&self.spinor(&self.gammas.gammas[alpha])?)
    }

    /// εJ(L(a) ⊗ γ^α)J⁻¹, written as −R(a*) ⊗ γ^α.
    pub fn j_conjugate(&self, a: &FourierElement, alpha: usize) -> Result<ModeMap> {
        Ok(self
            .right_rep(&a.adjoint())?
            .compose(&self.spinor(&self.gammas.gammas[alpha])?)?
            .scale(c(-1.0, 0.0)))
    }

    /// Σ_α L(b_α) ⊗ γ^α.
    pub fn clifford_left(&self, b: &[FourierElement]) -> Result<ModeMap> {
        let mut terms = Vec::with_capacity(b.len());
        for (alpha, ba) in b.iter().enumerate() {
            terms.push((c(1.0, 0.0), self.left_gamma(ba, alpha)?));
        }
        ModeMap::linear_combination(&terms)
    }

    /// Σ_α εJ(L(b_α) ⊗ γ^α)J⁻¹.
    pub fn clifford_left_j(&self, b: &[FourierElement]) -> Result<ModeMap> {
        let mut terms = Vec::with_capacity(b.len());
        for (alpha, ba) in b.iter().enumerate() {
            terms.push((c(1.0, 0.0), self.j_conjugate(ba, alpha)?));
        }
        ModeMap::linear_combination(&terms)
    }

    /// The one-form operator A = Σ L(−iA_α) ⊗ γ^α, without its J-image.
    pub fn one_form_operator(&self, a: &OneForm) -> Result<ModeMap> {
        self.check_form(a)?;
        let b: Vec<FourierElement> = a
            .components()
            .iter()
            .map(|x| x.scale(c(0.0, -1.0)))
            .collect();
        self.clifford_left(&b)
    }

    /// D_A = D + A + εJAJ⁻¹, the J-term realised through −R(·*) ⊗ γ^α.
    pub fn covariant_dirac(&self, a: &OneForm) -> Result<ModeMap> {
        self.check_form(a)?;
        let b: Vec<FourierElement> = a
            .components()
            .iter()
            .map(|x| x.scale(c(0.0, -1.0)))
            .collect();
        ModeMap::linear_combination(&[
            (c(1.0, 0.0), self.dirac()),
            (c(1.0, 0.0), self.clifford_left(&b)?),
            (c(1.0, 0.0), self.clifford_left_j(&b)?),
        ])
    }

    /// −i(δ_α + L(A_α) − R(A_α)) ⊗ γ^α as a single fused rule.
    ///
    /// Agrees with [`covariant_dirac`](Self::covariant_dirac) when every A_α
    /// is anti-selfadjoint and is much cheaper to apply.
    pub fn covariant_dirac_direct(&self, a: &OneForm) -> Result<ModeMap> {
        self.check_form(a)?;
        let n = self.n();
        let s = self.spin_dim();
        let gammas = self.gammas.gammas.clone();
        let theta = self.theta.clone();
        let comps: Vec<Vec<(LatticePoint, Complex64)>> = a
            .components()
            .iter()
            .map(|x| x.iter().map(|(q, v)| (q.clone(), *v)).collect())
            .collect();
        Ok(ModeMap::from_rule(n, s, a.spread(), move |k, i| {
            let mut acc = SparseVector::new();
            for (alpha, g) in gammas.iter().enumerate() {
                let kd = k[alpha] as f64;
                if kd != 0.0 {
                    for j in 0..s {
                        if g[(j, i)] != c(0.0, 0.0) {
                            acc.add_to(k.clone(), j, g[(j, i)] * kd);
                        }
                    }
                }
                for (q, v) in &comps[alpha] {
                    // −i v (e^{−i/2 q·Θk} − e^{−i/2 k·Θq}) = 2 v sin(−½ q·Θk)
                    let amp = *v * (2.0 * (-0.5 * theta.bilinear(q, k)).sin());
                    if amp == c(0.0, 0.0) {
                        continue;
                    }
                    let k2 = q.add(k);
                    for j in 0..s {
                        if g[(j, i)] != c(0.0, 0.0) {
                            acc.add_to(k2.clone(), j, g[(j, i)] * amp);
                        }
                    }
                }
            }
            acc.sorted()
                .into_iter()
                .map(|((k2, j), v)| (k2, j, v))
                .collect()
        }))
    }

    /// ∇_α ⊗ 1 = (δ_α + L(A_α) − R(A_α)) ⊗ 1.
    pub fn covariant_derivative(&self, a: &OneForm, alpha: usize) -> Result<ModeMap> {
        self.check_form(a)?;
        let aa = a.component(alpha);
        ModeMap::linear_combination(&[
            (c(1.0, 0.0), self.derivation(alpha)?),
            (c(1.0, 0.0), self.left_rep(aa)?),
            (c(-1.0, 0.0), self.right_rep(aa)?),
        ])
    }

    fn check_unitary(&self, u: &FourierElement) -> Result<()> {
        self.check_element(u)?;
        let one = FourierElement::scalar(self.n(), c(1.0, 0.0));
        let d1 = u.multiply(&u.adjoint(), &self.theta)?.max_diff(&one);
        let d2 = u.adjoint().multiply(u, &self.theta)?.max_diff(&one);
        let d = d1.max(d2);
        if d > UNITARITY_TOL {
            return Err(Error::NotUnitary(d));
        }
        Ok(())
    }

    /// V_u = L(u)R(u*) ⊗ 1.
    pub fn vu(&self, u: &FourierElement) -> Result<ModeMap> {
        self.check_unitary(u)?;
        self.left_rep(u)?.compose(&self.right_rep(&u.adjoint())?)
    }

    /// V_u T V_u*.
    pub fn conjugate_by_vu(&self, t: &ModeMap, u: &FourierElement) -> Result<ModeMap> {
        let v = self.vu(u)?;
        let v_adj = self.left_rep(&u.adjoint())?.compose(&self.right_rep(u)?)?;
        v.compose(&t.compose(&v_adj)?)
    }

    /// γ_u(A)_α = u A_α u* + u δ_α(u*).
    pub fn gauge_transform(&self, u: &FourierElement, a: &OneForm) -> Result<OneForm> {
        self.check_form(a)?;
        self.check_unitary(u)?;
        let th = &self.theta;
        let us = u.adjoint();
        let mut components = Vec::with_capacity(self.n());
        for (alpha, aa) in a.components().iter().enumerate() {
            let conj = u.multiply(aa, th)?.multiply(&us, th)?;
            let grad = u.multiply(&us.derivation(alpha)?, th)?;
            components.push(conj.add(&grad)?);
        }
        OneForm::new(components, self.n())
    }

    /// Deviation of L(U_k)[D, L(U_k*)] from 1 ⊗ (−k_μγ^μ) on the probe window.
    pub fn pure_gauge_check(&self, k: &LatticePoint) -> Result<f64> {
        self.pure_gauge_check_on(k, &self.probe_window())
    }

    pub fn pure_gauge_check_on(&self, k: &LatticePoint, window: &ModeWindow) -> Result<f64> {
        if k.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: k.dim(),
            });
        }
        let lhs = self.gauge_commutator(k)?;
        let neg_k: Vec<f64> = k.as_f64().iter().map(|x| -x).collect();
        let rhs = self.spinor(&self.gammas.slash(&neg_k))?;
        lhs.max_deviation(&rhs, window)
    }

    fn gauge_commutator(&self, k: &LatticePoint) -> Result<ModeMap> {
        let uk = FourierElement::unitary(k.clone());
        let l = self.left_rep(&uk)?;
        let l_adj = self.left_rep(&uk.adjoint())?;
        l.compose(&self.dirac().commutator(&l_adj)?)
    }

    /// max deviation from 0 of U_k[D,U_k*] + εJ U_k[D,U_k*] J⁻¹, with the
    /// one-form U_k[D,U_k*] = Σ L(U_k(−i)δ_α(U_k*)) ⊗ γ^α.
    pub fn pure_gauge_vanishing(&self, k: &LatticePoint) -> Result<f64> {
        let window = self.probe_window();
        let uk = FourierElement::unitary(k.clone());
        let mut b = Vec::with_capacity(self.n());
        for alpha in 0..self.n() {
            b.push(
                uk.multiply(&uk.adjoint().derivation(alpha)?, &self.theta)?
                    .scale(c(0.0, -1.0)),
            );
        }
        let form = self.clifford_left(&b)?;
        let exact = self.gauge_commutator(k)?;
        let agree = exact.max_deviation(&form, &window)?;
        let total = form.add(&self.clifford_left_j(&b)?)?;
        Ok(agree.max(total.max_abs_on(&window)))
    }

    /// Deviation of V_{U_k} D V_{U_k}* from D on the probe window.
    pub fn covariance_check(&self, k: &LatticePoint) -> Result<f64> {
        self.covariance_check_on(k, &self.probe_window())
    }

    pub fn covariance_check_on(&self, k: &LatticePoint, window: &ModeWindow) -> Result<f64> {
        let d = self.dirac();
        let conj = self.conjugate_by_vu(&d, &FourierElement::unitary(k.clone()))?;
        conj.max_deviation(&d, window)
    }

    /// Deviation of V_u D_A V_u* from D_{γ_u(A)} on `window`.
    pub fn gauge_covariance_check(
        &self,
        u: &FourierElement,
        a: &OneForm,
        window: &ModeWindow,
    ) -> Result<f64> {
        let lhs = self.conjugate_by_vu(&self.covariant_dirac(a)?, u)?;
        let rhs = self.covariant_dirac(&self.gauge_transform(u, a)?)?;
        lhs.max_deviation(&rhs, window)
    }

    /// The right side −∇_α∇_α ⊗ 1 − ½ Σ_{α,β}(L(F_αβ) − R(F_αβ)) ⊗ γ^{αβ}.
    pub fn square_expansion(&self, a: &OneForm) -> Result<ModeMap> {
        self.check_form(a)?;
        let n = self.n();
        let f = field_strength(a.components(), &self.theta)?;
        let mut terms = Vec::new();
        for alpha in 0..n {
            let nab = self.covariant_derivative(a, alpha)?;
            terms.push((c(-1.0, 0.0), nab.compose(&nab)?));
        }
        for (alpha, row) in f.iter().enumerate() {
            for (beta, fab) in row.iter().enumerate() {
                if alpha == beta || fab.is_empty() {
                    continue;
                }
                let sym = self.spinor(&gamma_pair_symbol(alpha, beta, &self.gammas)?)?;
                let ad = self.left_rep(fab)?.sub(&self.right_rep(fab)?)?;
                terms.push((c(-0.5, 0.0), ad.compose(&sym)?));
            }
        }
        ModeMap::linear_combination(&terms)
    }

    /// Deviation of D_A ∘ D_A from its curvature expansion on the probe window.
    pub fn square_expansion_check(&self, a: &OneForm) -> Result<f64> {
        self.square_expansion_check_on(a, &self.probe_window())
    }

    pub fn square_expansion_check_on(&self, a: &OneForm, window: &ModeWindow) -> Result<f64> {
        let da = self.covariant_dirac_direct(a)?;
        let lhs = da.compose(&da)?;
        let rhs = self.square_expansion(a)?;
        lhs.max_deviation(&rhs, window)
    }
}

/// e^{iφ} U_p, the unitaries used for gauge sweeps.
pub fn phase_unitary(p: LatticePoint, phi: f64) -> FourierElement {
    FourierElement::monomial(p, Complex64::from_polar(1.0, phi))
}
