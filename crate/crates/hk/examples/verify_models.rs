//! Run the whole chart verification suite on every built-in model.
//!
//! ```bash
//! cargo run --example verify_models
//! ```

use hk::chart::{verify_chart, VerifyConfig};
use hk::zoo;

fn main() {
    let mut config = VerifyConfig::default();
    for name in zoo::list_models() {
        let model = zoo::get_model(name, &Default::default()).expect("built-in model");
        // the 8-dimensional split chart has 3^8 grid points; fewer sphere
        // samples per point keep this demo quick
        config.zeta_samples = if model.quaternionic_rank() > 1 { 5 } else { 20 };
        let start = std::time::Instant::now();
        let report =
            verify_chart(model.family_field(), model.chart(), &config).expect("verification runs");
        println!(
            "{name:16} r={} aggregate={} ({:#.1?})",
            model.quaternionic_rank(),
            report.aggregate_pass,
            start.elapsed()
        );
        for check in &report.checks {
            println!(
                "    {} {:26} residual {:9.2e} (tol {:7.1e}) {}",
                if check.pass { "ok " } else { "FAIL" },
                check.name,
                check.residual,
                check.tolerance,
                check.detail.as_deref().unwrap_or("")
            );
        }
    }
}
