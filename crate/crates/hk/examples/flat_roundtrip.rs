//! Extract the family of forms from a known structure and reconstruct it:
//! on the flat model the metric comes back as the exact identity.
//!
//! ```bash
//! cargo run --example flat_roundtrip
//! ```

use hk::chart::roundtrip_check;
use hk::forms::max_abs;
use hk::pointwise::{extract_family, metric_from_family, SymplecticTriple};
use hk::zoo;

fn main() {
    let model = zoo::flat_hk(1).expect("flat model");
    let x = [0.0; 4];

    // forward: read (omega_+, omega_3) off the stored structure
    let (w1, w2, w3) = model.symplectic_at(&x).expect("forms");
    let (triple, g_true) = model.truth_at(&x).expect("ground truth");
    let sympl = SymplecticTriple::new(w1, w2, w3, 1e-12).expect("real forms");
    let family = extract_family(&triple, &sympl).expect("compatible structure");
    println!("family dimension {} (r = 1)", family.dim());

    // backward: rebuild the triple and metric from the family alone
    let ps = metric_from_family(&family, 1e-9).expect("reconstruction");
    println!("reconstructed signature {}", ps.signature);
    println!(
        "metric deviation from the identity: {:.3e}",
        max_abs(&(ps.metric.matrix() - g_true.matrix()))
    );
    println!(
        "quaternion residual of the rebuilt triple: {:.3e}",
        ps.triple.quaternion_residual()
    );
    println!(
        "compatibility residual: {:.3e}",
        ps.compatibility_residual().expect("nondegenerate metric")
    );

    // the same round trip swept over the whole chart grid
    let outcome = roundtrip_check(&model, 1e-12).expect("sweep");
    println!(
        "grid sweep: max metric error {:.3e}, max operator error {:.3e}, pass = {}",
        outcome.max_metric_rel_error, outcome.max_operator_error, outcome.pass
    );
}
