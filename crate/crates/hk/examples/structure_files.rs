//! Structure files: serialize a built-in model, parse it back, evaluate the
//! fields, and build one by hand with polynomial entries.
//!
//! ```bash
//! cargo run --example structure_files
//! ```

use hk::chart::{verify_chart, VerifyConfig};
use hk::files::StructureFile;
use hk::zoo;

fn main() {
    // built-in models serialize as "builtin" blocks with their parameters
    let model = zoo::get_model("eguchi-hanson", &Default::default()).expect("model");
    let file = StructureFile::from_model(&model);
    let text = file.to_canonical_json().expect("serialize");
    println!("--- eguchi-hanson structure file (first lines) ---");
    for line in text.lines().take(14) {
        println!("{line}");
    }
    println!("    ... {} bytes total\n", text.len());

    // parse -> serialize is the identity on the canonical form
    let parsed = StructureFile::parse(&text).expect("parse");
    assert_eq!(parsed.to_canonical_json().unwrap(), text);
    println!("canonical roundtrip: identical bytes");

    // explicit polynomial files spell out every matrix entry; this one is
    // the flat structure with constant coefficients
    let explicit = r#"{
  "format_version": 1,
  "r": 1,
  "chart": {"coords": ["x0","x1","x2","x3"],
            "box": [[-1.0,1.0],[-1.0,1.0],[-1.0,1.0],[-1.0,1.0]],
            "grid": [3,3,3,3]},
  "forms": {
    "omega_1": [{"i": 0, "j": 1, "re": [{"c": 1.0, "e": [0,0,0,0]}]},
                 {"i": 2, "j": 3, "re": [{"c": 1.0, "e": [0,0,0,0]}]}],
    "omega_2": [{"i": 0, "j": 2, "re": [{"c": 1.0, "e": [0,0,0,0]}]},
                 {"i": 1, "j": 3, "re": [{"c": -1.0, "e": [0,0,0,0]}]}],
    "omega_3": [{"i": 0, "j": 3, "re": [{"c": 1.0, "e": [0,0,0,0]}]},
                 {"i": 1, "j": 2, "re": [{"c": 1.0, "e": [0,0,0,0]}]}]
  }
}"#;
    let parsed = StructureFile::parse(explicit).expect("parse explicit");
    let (family, chart) = parsed.to_family().expect("fields");
    let report = verify_chart(&family, &chart, &VerifyConfig::default()).expect("verify");
    println!(
        "explicit polynomial file verifies: aggregate = {} ({} checks)",
        report.aggregate_pass,
        report.checks.len()
    );
}
