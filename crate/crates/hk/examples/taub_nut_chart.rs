//! The Taub-NUT model from the multi-center ansatz: potential, connection,
//! chart verification and metric reconstruction against the closed form.
//!
//! ```bash
//! cargo run --example taub_nut_chart
//! ```

use hk::chart::{reconstruct_metric_field, verify_chart, VerifyConfig};
use hk::forms::max_abs;
use hk::pointwise::metric_from_family;
use hk::zoo::{self, gh_connection, gh_metric, gh_potential, GhCenter, GhParams};

fn main() {
    let model = zoo::get_model("taub-nut", &Default::default()).expect("taub-nut");
    let chart = model.chart();
    println!(
        "chart: t in [{}, {}], spatial box [{}, {}]^3, grid {:?}",
        chart.bounds[0][0], chart.bounds[0][1], chart.bounds[1][0], chart.bounds[1][1], chart.grid
    );

    // the ansatz data at the chart midpoint
    let params = GhParams::new(
        1.0,
        vec![GhCenter {
            position: [0.0, 0.0, 0.0],
            mass: 0.5,
        }],
    )
    .expect("params");
    let x = chart.midpoint();
    let xyz = [x[1], x[2], x[3]];
    println!("V{xyz:?} = {:.6}", gh_potential(&params, xyz).unwrap());
    println!("A{xyz:?} = {:?}", gh_connection(&params, xyz).unwrap());

    // full verification: closedness, quaternion relations, compatibility,
    // reality, kernel graphs, rotation frames, integrability
    let report = verify_chart(model.family_field(), chart, &VerifyConfig::default())
        .expect("verification runs");
    println!("chart verification aggregate = {}", report.aggregate_pass);
    for name in ["closedness", "nijenhuis", "quaternion_relations"] {
        if let Some(c) = report.check(name) {
            println!(
                "    {name}: residual {:.3e} <= {:.1e}",
                c.residual, c.tolerance
            );
        }
    }

    // pointwise reconstruction against the closed-form metric
    let family = model.family_field().family_at(chart, &x).expect("family");
    let ps = metric_from_family(&family, 1e-8).expect("reconstruction");
    let g_closed = gh_metric(&params, xyz).unwrap();
    let dev =
        max_abs(&(ps.metric.matrix() - &g_closed.map(|v| num_complex::Complex64::new(v, 0.0))));
    println!("reconstructed metric vs closed form at the midpoint: {dev:.3e}");

    // and over the whole grid
    let grid = reconstruct_metric_field(model.family_field(), chart, 1e-8).expect("grid");
    let worst = grid
        .iter()
        .map(|(p, g, _)| {
            let truth = gh_metric(&params, [p[1], p[2], p[3]]).unwrap();
            (g - truth).iter().map(|v| v.abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    println!(
        "worst metric deviation over {} grid points: {worst:.3e}",
        grid.len()
    );
}
