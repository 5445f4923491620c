//! Mode-level identities for the Dirac operator, its fluctuations and gauge
//! transformations, plus dense-window oracles.

use ncspectral::lattice::cube;
use ncspectral::operator::{
    assemble_dense, kernel_projector, phase_unitary, spectrum, ModeMap, ModeWindow, OneForm,
    SparseVector, SpectralTriple, DEFAULT_KERNEL_TOL,
};
use ncspectral::{Complex64, DeformationMatrix, FourierElement, LatticePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triple(n: usize) -> SpectralTriple {
    SpectralTriple::new(DeformationMatrix::golden(n)).unwrap()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> FourierElement {
    let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    phase_unitary(
        LatticePoint::new(&p),
        rng.gen_range(0.0..std::f64::consts::TAU),
    )
}

#[test]
fn pure_gauge_identity_examples() {
    let t2 = triple(2);
    assert_eq!(t2.pure_gauge_check(&LatticePoint::zero(2)).unwrap(), 0.0);
    assert!(t2.pure_gauge_check(&LatticePoint::new(&[1, 0])).unwrap() < 1e-14);
    let t4 = triple(4);
    assert!(
        t4.pure_gauge_check(&LatticePoint::new(&[1, -2, 0, 3]))
            .unwrap()
            < 1e-14
    );
}

#[test]
fn pure_gauge_identity_on_small_cube() {
    let t = triple(2);
    for k in cube(2, 3) {
        assert!(t.pure_gauge_check(&k).unwrap() < 1e-14, "{k}");
    }
}

#[test]
fn pure_gauge_forms_cancel_against_their_j_image() {
    for n in [2usize, 4] {
        let t = triple(n);
        let r = if n == 2 { 5 } else { 1 };
        for k in cube(n, r) {
            if k.norm2() > 25 {
                continue;
            }
            assert!(t.pure_gauge_vanishing(&k).unwrap() < 1e-13, "n={n} k={k}");
        }
    }
}

#[test]
fn dirac_is_invariant_under_inner_unitaries() {
    let t = triple(2);
    for k in cube(2, 2) {
        assert!(t.covariance_check(&k).unwrap() < 1e-14);
    }
    let id = ModeMap::identity(2, 2);
    let u = phase_unitary(LatticePoint::new(&[1, 1]), 0.3);
    let conj = t.conjugate_by_vu(&id, &u).unwrap();
    assert!(conj.max_deviation(&id, &t.probe_window()).unwrap() < 1e-15);
}

#[test]
fn gauge_transform_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = triple(2);
    let a = OneForm::random_anti_selfadjoint(2, 3, 2, 0.4, &mut rng);
    let same = t
        .gauge_transform(&FourierElement::scalar(2, Complex64::new(1.0, 0.0)), &a)
        .unwrap();
    assert!(same.max_diff(&a) < 1e-15);
    let k = LatticePoint::new(&[2, -1]);
    let g = t
        .gauge_transform(&FourierElement::unitary(k.clone()), &OneForm::zero(2))
        .unwrap();
    assert!(g.max_diff(&OneForm::pure_gauge(&k)) < 1e-15);
    assert_eq!(
        g.component(0).get(&LatticePoint::zero(2)),
        Complex64::new(0.0, -2.0)
    );
}

#[test]
fn gauge_transforms_compose() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 4] {
        let t = triple(n);
        for _ in 0..5 {
            let a = OneForm::random_anti_selfadjoint(n, 2, 2, 0.5, &mut rng);
            let u = random_unitary(n, &mut rng);
            let v = random_unitary(n, &mut rng);
            let uv = u.multiply(&v, t.theta()).unwrap();
            let lhs = t
                .gauge_transform(&u, &t.gauge_transform(&v, &a).unwrap())
                .unwrap();
            let rhs = t.gauge_transform(&uv, &a).unwrap();
            assert!(lhs.max_diff(&rhs) < 1e-13);
            assert!(lhs.anti_selfadjoint_defect() < 1e-13);
        }
    }
}

#[test]
fn covariant_dirac_is_gauge_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [2usize, 4] {
        let t = triple(n);
        let w = ModeWindow::max_norm(if n == 2 { 3 } else { 1 });
        for _ in 0..10 {
            let a = OneForm::random_anti_selfadjoint(n, 2, 1, 0.5, &mut rng);
            let u = random_unitary(n, &mut rng);
            assert!(t.gauge_covariance_check(&u, &a, &w).unwrap() < 1e-13);
        }
    }
}

#[test]
fn experimental_odd_dimension_gauge_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = triple(3);
    let a = OneForm::random_anti_selfadjoint(3, 2, 1, 0.5, &mut rng);
    let u = random_unitary(3, &mut rng);
    assert!(
        t.gauge_covariance_check(&u, &a, &ModeWindow::max_norm(1))
            .unwrap()
            < 1e-13
    );
}

#[test]
fn square_of_covariant_dirac_matches_curvature_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let t2 = triple(2);
    assert_eq!(t2.square_expansion_check(&OneForm::zero(2)).unwrap(), 0.0);
    for n in [2usize, 4] {
        let t = triple(n);
        for terms in [1usize, 3] {
            let a = OneForm::random_anti_selfadjoint(n, terms, 2, 0.5, &mut rng);
            let w = ModeWindow::max_norm(if n == 2 { 3 } else { 1 });
            assert!(
                t.square_expansion_check_on(&a, &w).unwrap() < 1e-13,
                "n={n} terms={terms}"
            );
        }
    }
}

#[test]
fn free_square_is_laplacian() {
    let t = triple(4);
    let d = t.dirac();
    let d2 = d.compose(&d).unwrap();
    let k = LatticePoint::new(&[1, -2, 0, 3]);
    for i in 0..4 {
        let out = d2.apply_basis(&k, i);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, k);
        assert_eq!(out[0].1, i);
        assert!((out[0].2 - Complex64::new(14.0, 0.0)).norm() < 1e-13);
    }
}

#[test]
fn left_and_right_representations_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t = triple(2);
    for _ in 0..5 {
        let a = OneForm::random_anti_selfadjoint(2, 3, 2, 1.0, &mut rng);
        let l = t.left_rep(a.component(0)).unwrap();
        let r = t.right_rep(a.component(1)).unwrap();
        let comm = l.commutator(&r).unwrap();
        assert!(comm.max_abs_on(&ModeWindow::max_norm(3)) < 1e-14);
    }
}

#[test]
fn dirac_spectrum_is_plus_minus_norm() {
    let t = triple(2);
    for cut in [1u64, 3] {
        let w = ModeWindow::max_norm(cut);
        let got = spectrum(&t.dirac(), &w).unwrap();
        let mut want: Vec<f64> = Vec::new();
        for k in w.points(2) {
            let r = (k.norm2() as f64).sqrt();
            want.push(r);
            want.push(-r);
        }
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13);
        }
    }
    assert!(spectrum(&t.dirac(), &ModeWindow::empty())
        .unwrap()
        .is_empty());
}

#[test]
fn covariant_dirac_is_hermitian_with_chiral_symmetric_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [2usize, 4] {
        let t = triple(n);
        let a = OneForm::random_anti_selfadjoint(n, 2, 1, 0.6, &mut rng);
        let w = ModeWindow::max_norm(if n == 2 { 4 } else { 1 });
        let dense = assemble_dense(&t.covariant_dirac(&a).unwrap(), &w).unwrap();
        assert!(dense.hermitian_defect() < 1e-13);
        assert!(!dense.is_exact());
        let ev = spectrum(&t.covariant_dirac_direct(&a).unwrap(), &w).unwrap();
        for (x, y) in ev.iter().zip(ev.iter().rev()) {
            assert!((x + y).abs() < 1e-11, "n={n}: {x} {y}");
        }
    }
}

#[test]
fn kernel_of_dirac_is_spanned_by_constant_modes() {
    for (n, dim) in [(2usize, 2usize), (4, 4)] {
        let t = triple(n);
        let kp =
            kernel_projector(&t.dirac(), &ModeWindow::max_norm(1), DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(kp.dim, dim);
        assert!(!kp.touches_boundary);
        let z = LatticePoint::zero(n);
        for i in 0..dim {
            let v = kp.projector.apply(&SparseVector::basis(z.clone(), i));
            assert!(v.max_diff(&SparseVector::basis(z.clone(), i)) < 1e-14);
        }
    }
    let t = triple(2);
    assert!(kernel_projector(&t.dirac(), &ModeWindow::empty(), DEFAULT_KERNEL_TOL).is_err());
}

#[test]
fn one_form_alone_moves_the_kernel_but_its_symmetrisation_does_not() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = triple(2);
    let a = OneForm::random_anti_selfadjoint(2, 2, 1, 0.5, &mut rng);
    let z = LatticePoint::zero(2);
    for i in 0..2 {
        let e = SparseVector::basis(z.clone(), i);
        let moved = t.one_form_operator(&a).unwrap().apply(&e);
        assert!(moved.max_abs() > 1e-3);
        let plain = t
            .dirac()
            .add(&t.one_form_operator(&a).unwrap())
            .unwrap()
            .apply(&e);
        assert!(plain.max_abs() > 1e-3);
        let full = t.covariant_dirac(&a).unwrap().apply(&e);
        assert!(full.max_abs() < 1e-15);
    }
    let kp = kernel_projector(
        &t.covariant_dirac(&a).unwrap(),
        &ModeWindow::max_norm(3),
        DEFAULT_KERNEL_TOL,
    )
    .unwrap();
    assert!(kp.dim >= 2);
    for i in 0..2 {
        let e = SparseVector::basis(z.clone(), i);
        assert!(kp.projector.apply(&e).max_diff(&e) < 1e-10);
    }
}
