//! The sphere of complex structures attached to one point: landmarks,
//! antipodal conjugation, kernel dimensions of the family, and rotation
//! frames with their angle.
//!
//! ```bash
//! cargo run --example sphere_of_structures
//! ```

use num_complex::Complex64;

use hk::forms::max_abs;
use hk::pointwise::{
    antipodal_structure_residual, extract_family, family_reality_residual,
    kernel_dimension_of_family, rotation_frame, sample_zetas, SymplecticTriple,
};
use hk::twistor::{stereographic, TwistorParam};
use hk::zoo;

fn main() {
    let model = zoo::flat_hk(1).expect("flat model");
    let (triple, _) = model.truth_at(&[0.0; 4]).expect("truth");
    let (w1, w2, w3) = model.symplectic_at(&[0.0; 4]).expect("forms");
    let sympl = SymplecticTriple::new(w1, w2, w3, 1e-12).expect("real");
    let family = extract_family(&triple, &sympl).expect("family");

    // landmarks: J at 0, i, -1 and infinity
    for (label, zeta, want) in [
        ("0   ", TwistorParam::zero(), triple.j3().clone()),
        ("i   ", TwistorParam::new(0.0, 1.0), triple.j1().clone()),
        ("-1  ", TwistorParam::new(-1.0, 0.0), triple.j2().clone()),
        ("inf ", TwistorParam::Infinity, triple.j3().neg()),
    ] {
        let j = triple.complex_structure_at(&zeta);
        println!(
            "J({label}) matches the expected structure to {:.1e}   c = {:?}",
            max_abs(&(j.matrix() - want.matrix())),
            stereographic(&zeta)
        );
    }

    // the antipodal map conjugates structures and the family is real
    let mut worst_j: f64 = 0.0;
    let mut worst_w: f64 = 0.0;
    let mut kernel_ok = true;
    for z in sample_zetas(1, 20) {
        let zp = TwistorParam::Finite(z);
        worst_j = worst_j.max(antipodal_structure_residual(&triple, &zp));
        worst_w = worst_w.max(family_reality_residual(&family, &zp));
        kernel_ok &= kernel_dimension_of_family(&family, &zp, 1e-8).unwrap() == 2;
    }
    println!("antipodal conjugation residual over 20 sphere samples: {worst_j:.3e}");
    println!("family reality residual over the same samples:        {worst_w:.3e}");
    println!("kernel dimension equal to 2r at every sample:         {kernel_ok}");

    // rotation frames along a ray: theta depends only on the phase
    println!("\n zeta            theta        K I = J(zeta)");
    for z in [
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(-0.3, 0.4),
    ] {
        let frame = rotation_frame(&triple, &sympl, z, 1e-9).expect("frame");
        let j_zeta = triple.complex_structure_at(&TwistorParam::Finite(z));
        let closure = max_abs(&(frame.k.compose(&frame.i).matrix() - j_zeta.matrix()));
        println!(
            "{:>6} + {:>4}i   {:.6}     {closure:.2e}",
            z.re, z.im, frame.theta
        );
    }
}
