//! Real holomorphic sections through a point: reality checks, the quadratic
//! behavior of the section pairing over the sphere, and agreement of the
//! section-space metric with the reconstructed one.
//!
//! ```bash
//! cargo run --example twistor_sections
//! ```

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hk::forms::{conj_vec, max_abs_vec};
use hk::pointwise::extract_family;
use hk::pointwise::{
    hklr_metric_with, metric_from_family, o2_polynomial_check, random_holomorphic, real_section,
    triple_from_family, SymplecticTriple,
};
use hk::twistor::TwistorParam;
use hk::zoo;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() {
    let model = zoo::get_model("taub-nut", &Default::default()).expect("taub-nut");
    let x = model.chart().midpoint();
    let (w1, w2, w3) = model.symplectic_at(&x).expect("forms");
    let (truth, _) = model.truth_at(&x).expect("truth");
    let sympl = SymplecticTriple::new(w1, w2, w3, 1e-12).expect("real");
    let family = extract_family(&truth, &sympl).expect("family");
    let triple = triple_from_family(&family, 1e-9).expect("triple");

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_holomorphic(&mut rng, triple.j3());
    let b = random_holomorphic(&mut rng, triple.j3());

    // a section is pinned by its value at 0 and stays holomorphic and real
    println!(" zeta          |s|        reality residual");
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -3.0), c(0.1, 0.0)] {
        let here = real_section(&triple, &a, &TwistorParam::Finite(z)).expect("section");
        let there =
            real_section(&triple, &a, &TwistorParam::Finite(z).antipode()).expect("antipode");
        let reality = max_abs_vec(&(conj_vec(&there.s) - &here.s));
        println!(
            "{:>5} + {:>4}i   {:.4}     {reality:.3e}",
            z.re,
            z.im,
            max_abs_vec(&here.s)
        );
    }

    // the pairing 2 i zeta W(zeta)(s_a, s_b) is a quadratic polynomial:
    // fit through three nodes and extrapolate to five held-out ones
    let nodes = [
        c(1.0, 0.0),
        c(2.0, 0.0),
        c(0.0, 1.0),
        c(1.0, 1.0),
        c(3.0, 0.0),
        c(0.5, 0.0),
        c(0.0, 2.0),
        c(1.0, -1.0),
    ];
    let fit = o2_polynomial_check(&family, &a, &b, &nodes).expect("fit");
    println!("\nsection pairing over the sphere:");
    println!(
        "    extrapolation residual at held-out nodes: {:.3e}",
        fit.fit_residual
    );
    println!(
        "    pointwise identity residual:              {:.3e}",
        fit.identity_residual
    );
    println!(
        "    constant coefficient vs omega_+(a, b):    {:.3e}",
        (fit.constant_coefficient - fit.omega_plus_ab).norm()
    );

    // the section-space metric agrees with the reconstructed one under
    // a <-> a + conj(a)
    let ps = metric_from_family(&family, 1e-8).expect("metric");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_holomorphic(&mut rng, ps.triple.j3());
        let b = random_holomorphic(&mut rng, ps.triple.j3());
        let lhs = hklr_metric_with(family.omega_plus(), ps.triple.j1(), ps.triple.j3(), &a, &b)
            .expect("section metric");
        let xa = &a + conj_vec(&a);
        let xb = &b + conj_vec(&b);
        let rhs = (ps.metric.matrix() * &xb).dot(&xa);
        worst = worst.max((lhs - rhs.re).abs());
    }
    println!("\nsection metric vs g(a + conj a, b + conj b) over 100 pairs: {worst:.3e}");
}
