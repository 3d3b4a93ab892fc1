//! A metric that is not positive-definite: the split model on R^8 carries
//! signature (4, 4) while satisfying every quaternionic identity.
//!
//! ```bash
//! cargo run --example split_signature
//! ```

use hk::chart::{verify_chart, VerifyConfig};
use hk::forms::signature_of;
use hk::pointwise::{extract_family, metric_from_family, SymplecticTriple};
use hk::zoo;

fn main() {
    let model = zoo::flat_split(1, 1).expect("split model");
    let x = [0.0; 8];
    let (w1, w2, w3) = model.symplectic_at(&x).expect("forms");
    let (triple, g) = model.truth_at(&x).expect("truth");

    let sig = signature_of(&g, 1e-10).expect("signature");
    println!("stored metric signature: {sig}");
    println!(
        "quaternion residual:     {:.3e}",
        triple.quaternion_residual()
    );

    let sympl = SymplecticTriple::new(w1, w2, w3, 1e-12).expect("real");
    let family = extract_family(&triple, &sympl).expect("family");
    let ps = metric_from_family(&family, 1e-9).expect("reconstruction");
    println!("reconstructed signature: {}", ps.signature);

    // both counts stay multiples of four and constant over the chart
    // 3^8 grid points; fewer sphere samples keep the demo quick
    let config = VerifyConfig {
        zeta_samples: 5,
        ..VerifyConfig::default()
    };
    let report = verify_chart(model.family_field(), model.chart(), &config).expect("verify");
    let record = report.check("signature_constant").expect("record");
    println!(
        "chart sweep: {} ({})",
        if record.pass {
            "signature constant"
        } else {
            "signature varies"
        },
        record.detail.as_deref().unwrap_or("")
    );
    println!("aggregate = {}", report.aggregate_pass);
}
