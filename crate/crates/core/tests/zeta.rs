//! Continuation, residue and theta-identity checks against closed forms.

use std::f64::consts::PI;

use ncspectral::zeta::{
    evaluate, poisson_dual, residue, residue_shifted, sphere_integral, theta_magnitude, theta_sum,
    twisted_family_residue, zeta_d, zeta_d_residue, HomogeneousPolynomial, TwistedSeries,
};
use ncspectral::Complex64;
use proptest::prelude::*;

const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn poly(n: usize, s: &str) -> HomogeneousPolynomial {
    HomogeneousPolynomial::parse(n, s).unwrap()
}

/// Brute-force Σ_{0<|k|²≤R²} P(k) e^{2πik·a} |k|^{−s} for real s.
fn direct_sum(series: &TwistedSeries, s: f64, r: i64) -> Complex64 {
    let n = series.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in ncspectral::lattice::ball(n, r * r) {
        if k.is_zero() {
            continue;
        }
        let kf = k.as_f64();
        let norm = (k.norm2() as f64).sqrt();
        let phase = 2.0 * PI * k.dot_f64(series.twist());
        acc += Complex64::from_polar(series.poly().eval(&kf) * norm.powf(-s), phase);
    }
    acc
}

#[test]
fn epstein_two_dimensional_closed_form() {
    // Σ' (k1²+k2²)^{−s} = 4ζ(s)β(s); at s = 2 (i.e. exponent 4): 4·(π²/6)·G
    let v = evaluate(&TwistedSeries::epstein(2), c(4.0)).unwrap();
    let want = 4.0 * PI * PI / 6.0 * CATALAN;
    assert!((v.value.re - want).abs() < 1e-12, "{} vs {}", v.value, want);
    assert!(v.value.im.abs() < 1e-14);
    assert!(v.est_error < 1e-12);
}

#[test]
fn value_at_zero_is_minus_one() {
    for n in 1..=4 {
        let v = evaluate(&TwistedSeries::epstein(n), c(0.0)).unwrap();
        assert!((v.value.re + 1.0).abs() < 1e-13, "n={n}: {:?}", v.value);
    }
}

#[test]
fn zeta_d_vanishes_at_zero_and_has_volume_residue() {
    for n in [2usize, 4] {
        let z = zeta_d(c(0.0), n).unwrap();
        assert!(z.value.norm() < 1e-10, "n={n}: {}", z.value);
    }
    assert!((zeta_d_residue(2).unwrap() - 4.0 * PI).abs() < 1e-12);
    assert!((zeta_d_residue(4).unwrap() - 8.0 * PI * PI).abs() < 1e-12);
    assert!(zeta_d(c(2.0), 2).is_err());
}

#[test]
fn twisted_one_dimensional_clausen_values() {
    for &a in &[0.1, 0.3, 0.5, 0.77] {
        let tw = TwistedSeries::new(HomogeneousPolynomial::constant(1, 1.0), vec![a]).unwrap();
        // 2Σ cos(2πka)/k² = 2π²(a² − a + 1/6)
        let v = evaluate(&tw, c(2.0)).unwrap().value;
        assert!(
            (v.re - 2.0 * PI * PI * (a * a - a + 1.0 / 6.0)).abs() < 1e-12,
            "a={a}"
        );
        // At the untwisted pole s = 1 the twisted series is finite: −2 ln(2 sin πa)
        let v = evaluate(&tw, c(1.0)).unwrap().value;
        assert!(
            (v.re + 2.0 * (2.0 * (PI * a).sin()).ln()).abs() < 1e-12,
            "a={a}"
        );
        // Odd numerator: Σ k e^{2πika}|k|^{−2} = iπ(1 − 2a)
        let odd = TwistedSeries::new(poly(1, "k1"), vec![a]).unwrap();
        let v = evaluate(&odd, c(2.0)).unwrap().value;
        assert!(
            (v - Complex64::new(0.0, PI * (1.0 - 2.0 * a))).norm() < 1e-12,
            "a={a}"
        );
    }
}

#[test]
fn no_blow_up_near_pole_for_irrational_twist() {
    let tw =
        TwistedSeries::new(HomogeneousPolynomial::constant(2, 1.0), vec![0.381966, 0.2]).unwrap();
    let near = evaluate(&tw, c(2.0 + 1e-9)).unwrap().value;
    let at = evaluate(&tw, c(2.0)).unwrap().value;
    assert!(near.norm() < 1e3);
    assert!((near - at).norm() < 1e-6);
}

#[test]
fn large_real_part_matches_direct_summation() {
    let cases = [
        (TwistedSeries::epstein(2), 14.0, 40),
        (
            TwistedSeries::new(poly(2, "k1*k2"), vec![0.2, 0.7]).unwrap(),
            16.0,
            40,
        ),
        (
            TwistedSeries::new(poly(3, "k1^2 - k3^2"), vec![0.5, 0.0, 0.25]).unwrap(),
            17.0,
            25,
        ),
        (TwistedSeries::untwisted(poly(4, "k1^2*k2^2")), 20.0, 16),
    ];
    for (series, s, r) in cases {
        let want = direct_sum(&series, s, r);
        let got = evaluate(&series, c(s)).unwrap();
        assert!(
            (got.value - want).norm() < 1e-10,
            "{:?}: {} vs {}",
            series.poly().to_string(),
            got.value,
            want
        );
    }
}

#[test]
fn complex_argument_matches_direct_summation() {
    let series = TwistedSeries::new(poly(2, "k1^2"), vec![0.1, 0.0]).unwrap();
    let s = Complex64::new(18.0, 3.0);
    let got = evaluate(&series, s).unwrap().value;
    let mut want = Complex64::new(0.0, 0.0);
    for k in ncspectral::lattice::ball(2, 40 * 40) {
        if k.is_zero() {
            continue;
        }
        let ln_norm = 0.5 * (k.norm2() as f64).ln();
        let phase = 2.0 * PI * k.dot_f64(series.twist());
        want += series.poly().eval(&k.as_f64())
            * (-s * ln_norm).exp()
            * Complex64::from_polar(1.0, phase);
    }
    assert!((got - want).norm() < 1e-10, "{got} vs {want}");
}

#[test]
fn residue_equals_sphere_integral_for_low_degree_monomials() {
    for n in 2..=4usize {
        for deg in 0..=4u32 {
            let mut alpha = vec![0u32; n];
            // enumerate all exponent vectors of total degree deg
            fn rec(i: usize, left: u32, alpha: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                if i + 1 == alpha.len() {
                    alpha[i] = left;
                    out.push(alpha.clone());
                    return;
                }
                for e in 0..=left {
                    alpha[i] = e;
                    rec(i + 1, left - e, alpha, out);
                }
            }
            let mut all = Vec::new();
            rec(0, deg, &mut alpha, &mut all);
            for a in all {
                let p = HomogeneousPolynomial::monomial(&a, 1.0).unwrap();
                let series = TwistedSeries::untwisted(p.clone());
                let r = residue(&series, c(series.pole_location())).unwrap();
                assert!((r.re - sphere_integral(&p)).abs() < 1e-12, "{a:?}");
            }
        }
    }
}

#[test]
fn residue_by_limit_agrees_with_analytic_pole() {
    // (s − s0) f(s) → Res as s → s0, approached from both sides.
    let series = TwistedSeries::untwisted(poly(2, "k1^2"));
    let h = 1e-5;
    let lo = evaluate(&series, c(4.0 - h)).unwrap().value * (-h);
    let hi = evaluate(&series, c(4.0 + h)).unwrap().value * h;
    let r = residue(&series, c(4.0)).unwrap();
    assert!(((lo + hi) / 2.0 - r).norm() < 1e-6);
    assert!((r.re - PI).abs() < 1e-14);
}

#[test]
fn shifted_residue_examples() {
    let off = residue_shifted(&poly(2, "k1*k2"), 4.0).unwrap();
    assert_eq!(off.value, 0.0);
    let r = residue_shifted(&poly(4, "k1^2*k2^2"), 8.0).unwrap();
    assert!(r.pole_present);
    assert!((r.value - PI * PI / 12.0).abs() < 1e-14);
    let r = residue_shifted(&poly(4, "k1^4"), 8.0).unwrap();
    assert!((r.value - PI * PI / 4.0).abs() < 1e-14);
    // Exponent s + 6 with a quartic numerator in Z⁴ is regular at s = 0.
    let miss = residue_shifted(&poly(4, "k1^4"), 6.0).unwrap();
    assert!(!miss.pole_present && miss.value == 0.0);
    // sphere integral of u1²u2² on S³: 2π²·(1·1)/(4·6)
    assert!((sphere_integral(&poly(4, "k1^2*k2^2")) - 2.0 * PI * PI / 24.0).abs() < 1e-15);
}

#[test]
fn family_residue_linearity() {
    let p = HomogeneousPolynomial::constant(2, 1.0);
    let single = twisted_family_residue(&[(c(1.0), vec![0.0, 0.0])], &p, true).unwrap();
    assert!((single.value.re - 2.0 * PI).abs() < 1e-14);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let irr = twisted_family_residue(&[(c(1.0), vec![g, 0.0])], &p, true).unwrap();
    assert_eq!(irr.value, c(0.0));
    let two = twisted_family_residue(
        &[(c(0.7), vec![0.0, 0.0]), (c(3.0), vec![g, -g])],
        &p,
        false,
    )
    .unwrap();
    assert!((two.value.re - 0.7 * 2.0 * PI).abs() < 1e-14);
    assert!(two.uncertified);
    assert_eq!(two.resonant_terms, 1);
}

#[test]
fn theta_sum_examples() {
    // n = 1, P = 1, t = π: Σ_{k≠0} e^{−πk²} by plain summation
    let want: f64 = (1..40).map(|k| 2.0 * (-PI * (k * k) as f64).exp()).sum();
    let got = theta_sum(&TwistedSeries::epstein(1), PI).unwrap();
    assert!((got.re - want).abs() < 1e-16);
    // Jacobi: Σ' e^{−tk²} = −1 + √(π/t) Σ e^{−π²m²/t}
    let t = 0.2;
    let dual: f64 = -1.0
        + (PI / t).sqrt()
            * (-20..=20)
                .map(|m| (-PI * PI * (m * m) as f64 / t).exp())
                .sum::<f64>();
    assert!((poisson_dual(&TwistedSeries::epstein(1), t).unwrap().re - dual).abs() < 1e-14);
    // half-integer twist flips odd modes
    let half = TwistedSeries::new(HomogeneousPolynomial::constant(1, 1.0), vec![0.5]).unwrap();
    let want: f64 = (1..40)
        .map(|k| 2.0 * (if k % 2 == 1 { -1.0 } else { 1.0 }) * (-0.5 * (k * k) as f64).exp())
        .sum();
    assert!((theta_sum(&half, 0.5).unwrap().re - want).abs() < 1e-15);
    // odd numerator vanishes on both sides
    let odd = TwistedSeries::untwisted(poly(2, "k1"));
    assert_eq!(theta_sum(&odd, 0.7).unwrap(), c(0.0));
    assert!(poisson_dual(&odd, 0.7).unwrap().norm() < 1e-15);
    assert!(theta_sum(&odd, 0.0).is_err());
}

#[test]
fn twist_periodicity() {
    let p = poly(2, "k1*k2 + k2^2");
    let a = TwistedSeries::new(p.clone(), vec![0.23, 0.61]).unwrap();
    let b = TwistedSeries::new(p, vec![2.23, -3.39]).unwrap();
    for s in [0.5, 3.0, 7.5] {
        let (va, vb) = (
            evaluate(&a, c(s)).unwrap().value,
            evaluate(&b, c(s)).unwrap().value,
        );
        assert!((va - vb).norm() < 1e-12 * va.norm().max(1.0), "s={s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn theta_identity_random(
        n in 1usize..=3,
        a in proptest::collection::vec(-1.0f64..1.0, 3),
        t in 0.01f64..5.0,
        deg in 0u32..=3,
    ) {
        let mut alpha = vec![0u32; n];
        alpha[0] = deg;
        let p = HomogeneousPolynomial::monomial(&alpha, 1.0).unwrap();
        let series = TwistedSeries::new(p, a[..n].to_vec()).unwrap();
        let d = theta_sum(&series, t).unwrap();
        let q = poisson_dual(&series, t).unwrap();
        let scale = theta_magnitude(&series, t);
        prop_assert!((d - q).norm() <= 1e-12 * scale);
    }

    #[test]
    fn parity_of_odd_numerators(t in 0.05f64..3.0, s in 5.0f64..9.0) {
        let series = TwistedSeries::new(poly(2, "k1^2*k2 - k2^3"), vec![0.5, 0.0]).unwrap();
        prop_assert!(theta_sum(&series, t).unwrap().norm() < 1e-12);
        prop_assert!(evaluate(&series, c(s)).unwrap().value.norm() < 1e-12);
    }
}
