//! Property tests for the algebraic invariants that must hold for all
//! inputs, not just the shipped models.

use num_complex::Complex64;
use proptest::prelude::*;

use hk::forms::{
    complement_projectors, interior, max_abs, max_abs_vec, nullspace, solve_interior,
    wedge_pairing, CVec, TwoForm,
};
use hk::pointwise::{
    extract_family, family_reality_residual, real_section, HoloSympFamily, SymplecticTriple,
};
use hk::twistor::{mobius_rotate, stereographic, TwistorParam};
use hk::zoo;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coeff() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| c64(re, im))
}

/// Arbitrary 4x4 complex 2-form from its six upper entries.
fn two_form_4() -> impl Strategy<Value = TwoForm> {
    proptest::collection::vec(coeff(), 6).prop_map(|cs| {
        TwoForm::from_entries(
            4,
            &[
                (0, 1, cs[0]),
                (0, 2, cs[1]),
                (0, 3, cs[2]),
                (1, 2, cs[3]),
                (1, 3, cs[4]),
                (2, 3, cs[5]),
            ],
        )
        .unwrap()
    })
}

fn cvec_4() -> impl Strategy<Value = CVec> {
    proptest::collection::vec(coeff(), 4).prop_map(CVec::from_vec)
}

fn flat_family() -> HoloSympFamily {
    let model = zoo::flat_hk(1).unwrap();
    let (w1, w2, w3) = model.symplectic_at(&[0.0; 4]).unwrap();
    let (triple, _) = model.truth_at(&[0.0; 4]).unwrap();
    let sympl = SymplecticTriple::new(w1, w2, w3, 1e-12).unwrap();
    extract_family(&triple, &sympl).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry_exact(form in two_form_4(), v in cvec_4(), w in cvec_4()) {
        let a = form.apply(&v, &w);
        let b = form.apply(&w, &v);
        // construction-enforced, so exact up to the rounding of the two sums
        prop_assert!((a + b).norm() <= 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn wedge_pairing_multilinear(
        a in two_form_4(),
        b in two_form_4(),
        d in two_form_4(),
        lambda in coeff(),
    ) {
        // linear in the first slot
        let lhs = wedge_pairing(&a.scaled(lambda).add(&d), 1, &b, 1).unwrap();
        let rhs = wedge_pairing(&a, 1, &b, 1).unwrap() * lambda
            + wedge_pairing(&d, 1, &b, 1).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        // symmetric under swapping the 2-form slots
        let ab = wedge_pairing(&a, 1, &b, 1).unwrap();
        let ba = wedge_pairing(&b, 1, &a, 1).unwrap();
        prop_assert!((ab - ba).norm() <= 1e-13 * (1.0 + ab.norm()));
    }

    #[test]
    fn solve_interior_inverts_interior(v in cvec_4(), eps in -0.05f64..0.05) {
        // a nondegenerate real form: the flat omega_3 mildly sheared
        let model = zoo::flat_hk(1).unwrap();
        let (_, _, w3) = model.symplectic_at(&[0.0; 4]).unwrap();
        let sheared = w3.add(
            &TwoForm::from_entries(4, &[(0, 1, c64(eps, 0.0)), (1, 3, c64(-eps, eps))]).unwrap(),
        );
        let sigma = interior(&sheared, &v).unwrap();
        let back = solve_interior(&sheared, &sigma, 1e-8).unwrap();
        prop_assert!(max_abs_vec(&(back - &v)) <= 1e-9 * (1.0 + max_abs_vec(&v)));
        // and the kernel is trivial at this shear size
        prop_assert_eq!(nullspace(&sheared, 1e-8).unwrap().dim(), 0);
    }

    #[test]
    fn kernel_projectors_annihilate_each_other(scale in coeff()) {
        prop_assume!(scale.norm() > 0.1);
        let family = flat_family();
        let scaled = family.omega_plus().scaled(scale);
        let ker = nullspace(&scaled, 1e-8).unwrap();
        let ker_bar = nullspace(&scaled.conjugate(), 1e-8).unwrap();
        let (pa, pb) = complement_projectors(&ker, &ker_bar).unwrap();
        prop_assert!(max_abs(&(pa.matrix() * pb.matrix())) <= 1e-10);
    }

    #[test]
    fn stereographic_is_antipode_equivariant(re in -50.0f64..50.0, im in -50.0f64..50.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let z = TwistorParam::new(re, im);
        let c = stereographic(&z);
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        let anti = stereographic(&z.antipode());
        for k in 0..3 {
            prop_assert!((c[k] + anti[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn mobius_preserves_antipodal_pairs(
        ur in -1.0f64..1.0, ui in -1.0f64..1.0,
        vr in -1.0f64..1.0, vi in -1.0f64..1.0,
        re in -5.0f64..5.0, im in -5.0f64..5.0,
    ) {
        let u = c64(ur, ui);
        let v = c64(vr, vi);
        let norm = (u.norm_sqr() + v.norm_sqr()).sqrt();
        prop_assume!(norm > 1e-2);
        let (u, v) = (u / norm, v / norm);
        let z = TwistorParam::new(re, im);
        prop_assume!(re.abs() + im.abs() > 1e-6);
        // rotations commute with the antipodal map
        let a = mobius_rotate(u, v, &z.antipode()).unwrap();
        let b = mobius_rotate(u, v, &z).unwrap().antipode();
        match (a, b) {
            (TwistorParam::Finite(x), TwistorParam::Finite(y)) => {
                prop_assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm() * x.norm()));
            }
            (x, y) => prop_assert!(x.is_infinity() == y.is_infinity()),
        }
    }

    #[test]
    fn family_reality_holds_at_random_zeta(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let family = flat_family();
        let res = family_reality_residual(&family, &TwistorParam::new(re, im));
        prop_assert!(res <= 1e-10 * (1.0 + re.abs() + im.abs()));
    }

    #[test]
    fn sections_stay_holomorphic(
        seeds in proptest::collection::vec(coeff(), 4),
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let model = zoo::flat_hk(1).unwrap();
        let (triple, _) = model.truth_at(&[0.0; 4]).unwrap();
        // project an arbitrary vector onto the holomorphic side of J_3
        let raw = CVec::from_vec(seeds);
        let j3 = triple.j3().matrix();
        let a = (&raw - j3 * &raw * c64(0.0, 1.0)) * c64(0.5, 0.0);
        // the verified postconditions inside real_section are the property
        let section = real_section(&triple, &a, &TwistorParam::new(re, im));
        prop_assert!(section.is_ok());
    }
}
