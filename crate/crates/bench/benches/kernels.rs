use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncspectral::action::{nc_integral_power, twisted_heat_trace, NcOptions};
use ncspectral::lattice::cube;
use ncspectral::operator::{
    assemble_window, ModeWindow, OneForm, SpectralTriple, DEFAULT_BASIS_LIMIT,
};
use ncspectral::zeta::{evaluate, theta_sum, HomogeneousPolynomial, TwistedSeries};
use ncspectral::{Complex64, DeformationMatrix, FourierElement, LatticePoint};

/// Element with coefficients on every point of the radius-r cube.
fn dense_element(n: usize, r: i64) -> FourierElement {
    cube(n, r)
        .into_iter()
        .enumerate()
        .fold(FourierElement::zero(n), |acc, (i, k)| {
            let c = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
            acc.add(&FourierElement::monomial(k, c)).unwrap()
        })
}

fn one_mode_form(n: usize) -> OneForm {
    let m = FourierElement::monomial(LatticePoint::unit(n, 0), Complex64::new(0.2, 0.1));
    let mut comps = vec![FourierElement::zero(n); n];
    comps[1] = m.sub(&m.adjoint()).unwrap();
    OneForm::new(comps, n).unwrap()
}

fn weyl_multiply(c: &mut Criterion) {
    let mut g = c.benchmark_group("weyl_multiply");
    for (n, r) in [(2, 4), (2, 8), (4, 2)] {
        let theta = DeformationMatrix::golden(n);
        let a = dense_element(n, r);
        let b = a.adjoint();
        g.bench_with_input(BenchmarkId::new(format!("n{n}"), r), &r, |bch, _| {
            bch.iter(|| black_box(a.multiply(&b, &theta).unwrap()))
        });
    }
    g.finish();
}

fn zeta_evaluate(c: &mut Criterion) {
    let mut g = c.benchmark_group("zeta");
    let quartic = TwistedSeries::new(
        HomogeneousPolynomial::parse(4, "k1^2*k2^2").unwrap(),
        vec![0.0; 4],
    )
    .unwrap();
    let twisted = TwistedSeries::new(
        HomogeneousPolynomial::parse(2, "k1^2-k2^2").unwrap(),
        vec![0.3, 0.1],
    )
    .unwrap();
    g.bench_function("evaluate_n4_quartic", |b| {
        b.iter(|| evaluate(&quartic, Complex64::new(9.5, 0.0)).unwrap())
    });
    g.bench_function("evaluate_n2_twisted_complex", |b| {
        b.iter(|| evaluate(&twisted, Complex64::new(3.0, 2.0)).unwrap())
    });
    g.bench_function("theta_sum_n4", |b| {
        b.iter(|| theta_sum(&quartic, black_box(0.05)).unwrap())
    });
    g.finish();
}

fn window_eigenvalues(c: &mut Criterion) {
    let mut g = c.benchmark_group("window_eigenvalues");
    g.sample_size(10);
    let t = SpectralTriple::new(DeformationMatrix::golden(2)).unwrap();
    let d = t.covariant_dirac_direct(&one_mode_form(2)).unwrap();
    for r in [8u64, 16, 32] {
        let op = assemble_window(&d, &ModeWindow::max_norm(r), DEFAULT_BASIS_LIMIT).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, _| {
            b.iter(|| op.eigenvalues(usize::MAX).unwrap())
        });
    }
    g.finish();
}

fn nc_integral(c: &mut Criterion) {
    let mut g = c.benchmark_group("nc_integral");
    g.sample_size(10);
    for n in [2usize, 4] {
        let t = SpectralTriple::new(DeformationMatrix::golden(n)).unwrap();
        let a = one_mode_form(n);
        let opts = NcOptions {
            certified: Some(true),
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::new("q_eq_n", n), &n, |b, &n| {
            b.iter(|| nc_integral_power(&t, &a, n, &opts).unwrap())
        });
    }
    g.finish();
}

fn twisted_trace(c: &mut Criterion) {
    let theta = DeformationMatrix::golden(2);
    let a = dense_element(2, 6);
    let b = a.adjoint();
    c.bench_function("twisted_heat_trace_r6", |bch| {
        bch.iter(|| twisted_heat_trace(&a, &b, &theta, black_box(0.01)).unwrap())
    });
}

criterion_group!(
    benches,
    weyl_multiply,
    zeta_evaluate,
    window_eigenvalues,
    nc_integral,
    twisted_trace
);
criterion_main!(benches);
