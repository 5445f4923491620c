//! Continued fractions, badly-approximable scans and Jarnik constructions,
//! checked against Fibonacci numbers, exact rational arithmetic and
//! hand-built Liouville witnesses.

use ncspectral::diophantine::{
    bv_search, cf_expand, classify_matrix, classify_normalized, irrationality_exponent_estimate,
    jarnik_construct, BvOptions, HpReal, Profile, Verdict,
};
use ncspectral::{DeformationMatrix, Error};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(int(p), int(q))
}

#[test]
fn golden_ratio_has_all_unit_quotients_and_fibonacci_convergents() {
    let phi = HpReal::quadratic(1, 1, 5, 2, 200).unwrap();
    let cf = cf_expand(&phi, 200).unwrap();
    assert!(cf.quotients().iter().all(|a| a.is_one()));
    assert!(cf.check_invariants());
    // p_k = F_{k+2}, q_k = F_{k+1}
    let (mut f0, mut f1) = (int(1), int(1));
    for k in 0..cf.depth() {
        assert_eq!(cf.denominators()[k], f0, "k={k}");
        assert_eq!(cf.numerators()[k], f1, "k={k}");
        let next = &f0 + &f1;
        f0 = f1;
        f1 = next;
    }
}

#[test]
fn sqrt_two_and_small_cases() {
    let r2 = HpReal::sqrt(&rat(2, 1), 200).unwrap();
    let cf = cf_expand(&r2, 150).unwrap();
    assert_eq!(cf.quotients()[0], int(1));
    assert!(cf.quotients()[1..].iter().all(|a| *a == int(2)));
    // Pell: p_k² − 2q_k² = ±1
    for (p, q) in cf.numerators().iter().zip(cf.denominators()) {
        assert_eq!((p * p - int(2) * q * q).abs(), int(1));
    }
    let three = cf_expand(&HpReal::from_integer(3), 5).unwrap();
    assert_eq!(three.quotient_strings(), vec!["3"]);
    assert!(matches!(
        cf_expand(&HpReal::sqrt(&rat(2, 1), 20).unwrap(), 500),
        Err(Error::PrecisionExhausted { .. })
    ));
}

#[test]
fn irrationality_estimates() {
    let phi = cf_expand(&HpReal::golden(150), 100).unwrap();
    let e = irrationality_exponent_estimate(&phi).unwrap();
    assert!((e.value - 2.0).abs() < 1e-12 && !e.divergent);
    let r = cf_expand(&HpReal::from_ratio(355, 113).unwrap(), 10).unwrap();
    assert!(irrationality_exponent_estimate(&r).unwrap().divergent);
    let j = jarnik_construct(&Profile::power(3.0), 12).unwrap();
    let e = irrationality_exponent_estimate(&j.cf).unwrap();
    assert!((e.value - 3.0).abs() < 0.05, "{}", e.value);
}

/// Exact |q·a − m| for a rational a.
fn exact_residual(a: &BigRational, q: i64, m: &str) -> BigRational {
    (a * BigRational::from_integer(int(q)) - BigRational::from_integer(m.parse().unwrap())).abs()
}

#[test]
fn golden_ratio_is_badly_approximable_up_to_q() {
    let phi = HpReal::golden(150);
    let r = bv_search(&[phi], 1.0, 0.2, 100_000);
    assert_eq!(r.verdict, Verdict::NoViolationUpToQ);
    assert!(r.witnesses.is_empty());
    assert!(r.exhaustive);
    assert_eq!(r.scanned, 100_000);
    // Oracle: q‖qφ‖ stays above 1/3 for the Fibonacci denominators.
    let cf = cf_expand(&HpReal::golden(150), 25).unwrap();
    for (p, q) in cf.numerators().iter().zip(cf.denominators()).skip(1) {
        let qf: f64 = q.to_string().parse().unwrap();
        let pf: f64 = p.to_string().parse().unwrap();
        assert!(qf * (qf * 1.618_033_988_749_895 - pf).abs() > 1.0 / 3.0);
    }
}

#[test]
fn rationals_are_hit_exactly() {
    let a = rat(5, 13);
    let r = bv_search(&[HpReal::exact(a.clone())], 1.0, 1e-6, 100);
    assert_eq!(r.verdict, Verdict::ViolationsFound);
    assert_eq!(r.witnesses[0].q, vec![13]);
    for w in &r.witnesses {
        assert!(exact_residual(&a, w.q[0], &w.m).is_zero());
    }
    let two = bv_search(
        &[HpReal::exact(rat(1, 2)), HpReal::exact(rat(1, 3))],
        1.0,
        1e-6,
        20,
    );
    assert_eq!(two.witnesses[0].q, vec![2, 0]);
}

#[test]
fn liouville_number_violates_at_factorial_powers() {
    let l = HpReal::liouville(10, 140).unwrap();
    let r = bv_search(std::slice::from_ref(&l), 2.0, 1.0, 10_000_000);
    assert_eq!(r.verdict, Verdict::ViolationsFound);
    let qs: Vec<i64> = r.witnesses.iter().map(|w| w.q[0]).collect();
    assert!(qs.contains(&1_000_000));
    // Every witness satisfies the bound in exact arithmetic.
    for w in &r.witnesses {
        let q = w.q[0];
        let bound = BigRational::new(BigInt::one(), int(q) * int(q));
        assert!(exact_residual(l.lo(), q, &w.m) < bound, "q={q}");
    }
    let r2 = bv_search(&[l], 2.0, 2.0, 1000);
    assert!(r2.witnesses.iter().any(|w| w.q == vec![100] && w.m == "11"));
}

#[test]
fn scan_is_monotone_in_qmax() {
    let l = HpReal::liouville(10, 140).unwrap();
    let mut last = 0;
    for q in [10u64, 100, 1000, 100_000] {
        let r = bv_search(std::slice::from_ref(&l), 2.0, 2.0, q);
        assert!(r.violation_count >= last);
        last = r.violation_count;
    }
    for q in [10u64, 1000, 50_000] {
        assert_eq!(
            bv_search(&[HpReal::golden(150)], 1.0, 0.2, q).verdict,
            Verdict::NoViolationUpToQ
        );
    }
}

#[test]
fn matrix_classification() {
    let golden = DeformationMatrix::golden(2);
    let rep = classify_matrix(&golden, 1.0, 0.2, 20_000);
    assert_eq!(rep.verdict, Verdict::NoViolationUpToQ);
    assert_eq!(rep.witness_u, Some(vec![1, 0]));
    assert_eq!(rep.kept_axes, vec![1]);

    let zero = classify_matrix(&DeformationMatrix::zero(2), 1.0, 0.2, 1000);
    assert_eq!(zero.verdict, Verdict::ViolationsFound);
    assert!(zero.rejected.iter().all(|(_, count)| *count == 0));

    let l = HpReal::liouville(10, 140).unwrap();
    let z = HpReal::from_integer(0);
    let rows = vec![vec![z.clone(), l.clone()], vec![l.neg(), z]];
    let opts = BvOptions::default();
    let rep = classify_normalized(&rows, 1.0, 0.2, 300, 3, opts);
    assert_eq!(rep.verdict, Verdict::ViolationsFound);
    assert_eq!(rep.rejected.len(), 24);
}

/// Rational upper bound on e from its Taylor series with a tail bound.
fn e_upper() -> BigRational {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for i in 1..60 {
        sum += &term;
        term /= BigRational::from_integer(int(i));
    }
    sum + term * BigRational::from_integer(int(2))
}

#[test]
fn jarnik_power_profile_certificates_hold_exactly() {
    for alpha in [3.0, 4.0] {
        let j = jarnik_construct(&Profile::power(alpha), 9).unwrap();
        assert!(!j.truncated);
        assert_eq!(j.cf.depth(), 9);
        assert!(j.all_certified());
        let theta = j.theta();
        for k in 0..j.cf.depth() - 1 {
            let q = BigRational::from_integer(j.cf.denominators()[k].clone());
            let x = (&theta - j.cf.convergent(k)).abs();
            assert!(
                x * q.pow(alpha as i32) < BigRational::one(),
                "α={alpha} k={k}"
            );
        }
    }
}

#[test]
fn jarnik_dirichlet_regime_has_bounded_quotients() {
    let f: Profile = "power:2:3".parse().unwrap();
    let j = jarnik_construct(&f, 30).unwrap();
    assert!(j.cf.quotients()[1..].iter().all(|a| a.is_one()));
    let theta = j.theta();
    for k in 0..29 {
        let q = BigRational::from_integer(j.cf.denominators()[k].clone());
        assert!((&theta - j.cf.convergent(k)).abs() * &q * &q < BigRational::from_integer(int(3)));
    }
}

#[test]
fn jarnik_exponential_profile_grows_super_exponentially() {
    let f: Profile = "exp".parse().unwrap();
    let j = jarnik_construct(&f, 8).unwrap();
    assert!(j.truncated);
    assert!(j.stop_reason.is_some());
    assert_eq!(j.cf.depth(), 5);
    assert_eq!(j.cf.quotient_strings()[..4], ["0", "3", "3", "221"]);
    // ln a_{k+1} tracks q_k
    let a4 = &j.cf.quotients()[4];
    assert!((a4.bits() as f64 * std::f64::consts::LN_2 - 2211.0).abs() < 20.0);
    assert!(j.all_certified());
    let e = e_upper();
    let theta = j.theta();
    for k in 0..4 {
        let q = &j.cf.denominators()[k];
        let x = (&theta - j.cf.convergent(k)).abs();
        let eq = e.pow(q.to_string().parse::<i32>().unwrap());
        assert!(x * eq < BigRational::one(), "k={k}");
    }
}

#[test]
fn jarnik_rejects_non_monotone_profiles() {
    assert!(matches!(
        jarnik_construct(&Profile::power(1.5), 5),
        Err(Error::ProfileNotMonotone(_))
    ));
    let j = jarnik_construct(&"power-log:2:1".parse().unwrap(), 12).unwrap();
    assert!(j.all_certified());
    assert!(j.certificates.iter().any(|c| !c.exact));
}
