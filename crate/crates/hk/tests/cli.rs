//! Integration tests for the `hk` binary: output shapes, exit codes and the
//! fixtures the acceptance suite does not already cover.

use std::path::PathBuf;
use std::process::Command;

fn hk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hk"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = hk().args(args).output().expect("spawn hk");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("hk-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn zoo_file(dir: &TempDir, model: &str, params: &[&str]) -> PathBuf {
    let file = dir.path(&format!("{model}.json"));
    let mut args = vec!["zoo", model, "--out", file.to_str().unwrap()];
    for p in params {
        args.push("--param");
        args.push(p);
    }
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "zoo {model} failed: {err}");
    file
}

#[test]
fn sweep_row_counts_and_values() {
    let dir = TempDir::new("sweep");
    let file = zoo_file(&dir, "flat", &[]);
    let out = dir.path("sweep.csv");
    let (code, _, _) = run(&[
        "sweep",
        file.to_str().unwrap(),
        "--zeta-grid",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "zeta_re,zeta_im,check,value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64 * 4);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        let value: f64 = fields[3].parse().unwrap();
        match fields[2] {
            "kernel_dimension" => assert_eq!(value, 2.0),
            "reality_residual" | "rotation_frame_residual" => {
                assert!(value < 1e-9, "{row}")
            }
            "theta" => assert!((0.0..std::f64::consts::PI).contains(&value)),
            other => panic!("unexpected check column {other}"),
        }
    }
}

#[test]
fn sweep_minimal_grid() {
    let dir = TempDir::new("sweep1");
    let file = zoo_file(&dir, "flat", &[]);
    let out = dir.path("one.csv");
    let (code, _, _) = run(&[
        "sweep",
        file.to_str().unwrap(),
        "--zeta-grid",
        "1",
        "--point",
        "0,0,0,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn sweep_rejects_point_outside_box() {
    let dir = TempDir::new("sweepbox");
    let file = zoo_file(&dir, "flat", &[]);
    let (code, _, err) = run(&[
        "sweep",
        file.to_str().unwrap(),
        "--zeta-grid",
        "2",
        "--point",
        "9,0,0,0",
        "--out",
        dir.path("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {err}");
}

#[test]
fn reconstruct_flat_gives_identity_grid() {
    let dir = TempDir::new("rec");
    let file = zoo_file(&dir, "flat", &[]);
    let out = dir.path("rec.json");
    let (code, _, _) = run(&[
        "reconstruct",
        file.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 81);
    for p in points {
        let g = p["g"].as_array().unwrap();
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.as_array().unwrap().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v.as_f64().unwrap() - want).abs() < 1e-12);
            }
        }
        assert_eq!(p["signature"]["positive"], 4);
        assert_eq!(p["signature"]["negative"], 0);
    }
}

#[test]
fn reconstruct_taub_nut_matches_closed_form() {
    let dir = TempDir::new("rectn");
    let file = zoo_file(&dir, "taub-nut", &[]);
    let out = dir.path("rec.json");
    let (code, _, _) = run(&[
        "reconstruct",
        file.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let model = hk::zoo::get_model("taub-nut", &Default::default()).unwrap();
    for p in doc["points"].as_array().unwrap() {
        let x: Vec<f64> = p["x"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let (_, g_true) = model.truth_at(&x).unwrap();
        let gt = g_true.real_matrix();
        let mut worst: f64 = 0.0;
        for (i, row) in p["g"].as_array().unwrap().iter().enumerate() {
            for (j, v) in row.as_array().unwrap().iter().enumerate() {
                worst = worst.max((v.as_f64().unwrap() - gt[(i, j)]).abs());
            }
        }
        assert!(worst < 1e-8, "metric deviates by {worst} at {x:?}");
    }
}

#[test]
fn reconstruct_pole_adjacent_chart_exits_2() {
    let dir = TempDir::new("pole");
    // rational entry with denominator x0 on a box through x0 = 0
    let file = dir.path("pole.json");
    std::fs::write(
        &file,
        r#"{
  "format_version": 1,
  "r": 1,
  "chart": {"coords": ["x0","x1","x2","x3"], "box": [[-1.0,1.0],[-1.0,1.0],[-1.0,1.0],[-1.0,1.0]], "grid": [3,3,3,3]},
  "forms": {
    "omega_1": [{"i": 0, "j": 1, "re": [{"c": 1.0, "e": [0,0,0,0]}], "den": [{"c": 1.0, "e": [1,0,0,0]}]}, {"i": 2, "j": 3, "re": [{"c": 1.0, "e": [0,0,0,0]}]}],
    "omega_2": [{"i": 0, "j": 2, "re": [{"c": 1.0, "e": [0,0,0,0]}]}, {"i": 1, "j": 3, "re": [{"c": -1.0, "e": [0,0,0,0]}]}],
    "omega_3": [{"i": 0, "j": 3, "re": [{"c": 1.0, "e": [0,0,0,0]}]}, {"i": 1, "j": 2, "re": [{"c": 1.0, "e": [0,0,0,0]}]}]
  }
}"#,
    )
    .unwrap();
    let (code, _, err) = run(&[
        "reconstruct",
        file.to_str().unwrap(),
        "--out",
        dir.path("out.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {err}");
    assert!(err.contains("denominator"), "stderr: {err}");
}

#[test]
fn zoo_flat_r2_roundtrips_through_verify() {
    let dir = TempDir::new("zoor2");
    let file = zoo_file(&dir, "flat", &["r=2"]);
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("\"r\": 2"));
    // full verify on the 8-dimensional chart is slow; the structure file
    // itself must parse and evaluate
    let parsed = hk::files::StructureFile::parse(&text).unwrap();
    let (family, chart) = parsed.to_family().unwrap();
    let fam = family.family_at(&chart, &chart.midpoint()).unwrap();
    assert_eq!(fam.dim(), 8);
}

#[test]
fn sections_counts_and_corruption() {
    let dir = TempDir::new("sections");
    let file = zoo_file(&dir, "flat", &[]);
    // count = 100 passes
    let (code, _, _) = run(&[
        "sections",
        file.to_str().unwrap(),
        "--count",
        "100",
        "--seed",
        "3",
        "--out",
        dir.path("s100.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    // count = 0 trivially passes with zero residuals
    let out0 = dir.path("s0.json");
    let (code, _, _) = run(&[
        "sections",
        file.to_str().unwrap(),
        "--count",
        "0",
        "--out",
        out0.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out0).unwrap()).unwrap();
    assert_eq!(doc["aggregate_pass"], true);
    for c in doc["checks"].as_array().unwrap() {
        assert_eq!(c["residual"], 0.0);
    }

    // omega_3 corrupted by a (2,0)+(0,2) part: the construction rejects the
    // family, reported as a failed check with exit 1
    let bad = dir.path("bad3.json");
    std::fs::write(
        &bad,
        r#"{
  "format_version": 1,
  "r": 1,
  "chart": {"coords": ["x0","x1","x2","x3"], "box": [[-1.0,1.0],[-1.0,1.0],[-1.0,1.0],[-1.0,1.0]], "grid": [3,3,3,3]},
  "forms": {
    "omega_1": [{"i": 0, "j": 1, "re": [{"c": 1.0, "e": [0,0,0,0]}]}, {"i": 2, "j": 3, "re": [{"c": 1.0, "e": [0,0,0,0]}]}],
    "omega_2": [{"i": 0, "j": 2, "re": [{"c": 1.0, "e": [0,0,0,0]}]}, {"i": 1, "j": 3, "re": [{"c": -1.0, "e": [0,0,0,0]}]}],
    "omega_3": [{"i": 0, "j": 3, "re": [{"c": 1.0, "e": [0,0,0,0]}]}, {"i": 1, "j": 2, "re": [{"c": 1.0, "e": [0,0,0,0]}]}, {"i": 0, "j": 1, "re": [{"c": 0.3, "e": [0,0,0,0]}]}]
  }
}"#,
    )
    .unwrap();
    let outbad = dir.path("sbad.json");
    let (code, _, _) = run(&[
        "sections",
        bad.to_str().unwrap(),
        "--count",
        "5",
        "--out",
        outbad.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&outbad).unwrap()).unwrap();
    assert_eq!(doc["aggregate_pass"], false);
}

#[test]
fn verify_writes_report_to_stdout_by_default() {
    let dir = TempDir::new("stdout");
    let file = zoo_file(&dir, "flat", &[]);
    let (code, stdout, _) = run(&["verify", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["aggregate_pass"], true);
    assert!(doc["checks"].as_array().unwrap().len() > 10);
    // every record carries its identity anchor
    for c in doc["checks"].as_array().unwrap() {
        assert!(c["anchor"].as_str().unwrap().len() > 3);
    }
}

#[test]
fn hk_threads_validation() {
    let dir = TempDir::new("threads");
    let file = zoo_file(&dir, "flat", &[]);
    let out = hk()
        .args(["verify", file.to_str().unwrap()])
        .env("HK_THREADS", "bogus")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = hk()
        .args(["verify", file.to_str().unwrap()])
        .env("HK_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn structure_file_roundtrip_is_identity() {
    let dir = TempDir::new("roundtrip");
    for (model, params) in [("taub-nut", vec![]), ("eguchi-hanson", vec![])] {
        let file = zoo_file(&dir, model, &params);
        let text = std::fs::read_to_string(&file).unwrap();
        let parsed = hk::files::StructureFile::parse(&text).unwrap();
        assert_eq!(parsed.to_canonical_json().unwrap(), text);
    }
}

#[test]
fn help_and_bad_usage() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["verify", "reconstruct", "sweep", "zoo", "sections"] {
        assert!(stdout.contains(sub), "help must mention {sub}");
    }
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}
