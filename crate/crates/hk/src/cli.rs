//! The `hk` command line: verify, reconstruct, sweep, zoo, sections.
//!
//! Exit codes: 0 when all checks pass, 1 when a mathematical check fails,
//! 2 on malformed input or configuration. `HK_THREADS` optionally caps
//! worker parallelism (sweeps currently evaluate on one thread, so any
//! positive cap is honored).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::chart::{reconstruct_metric_field, verify_chart, CheckRecord, VerifyConfig};
use crate::error::{Error, Result};
use crate::files::{canonical_json, format_float, input_digest, RunReport, StructureFile};
use crate::forms::{conj_vec, max_abs_vec};
use crate::pointwise::{
    hklr_metric_with, metric_from_family, o2_polynomial_check, random_holomorphic, real_section,
    rotation_frame_report, sample_zetas,
};
use crate::tolerances;
use crate::twistor::{inverse_stereographic, TwistorParam};
use crate::zoo;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hk",
    version,
    about = "Construct and verify pseudo-hyper-Kahler structures from families of holomorphic symplectic forms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full chart verification suite on a structure file.
    Verify {
        path: PathBuf,
        /// Pointwise algebraic tolerance (quaternion, compatibility,
        /// reality, frames). Default 1e-8.
        #[arg(long)]
        tol: Option<f64>,
        /// Number of seeded sphere samples. Default 20.
        #[arg(long)]
        samples: Option<usize>,
        /// RNG seed for the sphere samples. Default 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Report destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the metric field over the chart grid.
    Reconstruct {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep sphere parameters at one chart point and emit CSV diagnostics.
    Sweep {
        path: PathBuf,
        /// Samples per sphere axis; N^2 points total.
        #[arg(long = "zeta-grid")]
        zeta_grid: usize,
        /// Chart point "x0,x1,..." (box midpoint when omitted).
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serialize a built-in model to a structure file.
    Zoo {
        name: String,
        /// Model parameter as key=value; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random twistor-line section checks at a chart point.
    Sections {
        path: PathBuf,
        /// Number of random section pairs.
        #[arg(long)]
        count: usize,
        /// RNG seed. Default 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Report destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs a parsed command, mapping errors onto the exit-code contract.
pub fn run(cli: Cli) -> i32 {
    if let Err(e) = check_thread_cap() {
        eprintln!("hk: {e}");
        return EXIT_INPUT_ERROR;
    }
    let outcome = match cli.command {
        Command::Verify {
            path,
            tol,
            samples,
            seed,
            out,
        } => cmd_verify(&path, tol, samples, seed, out.as_deref()),
        Command::Reconstruct { path, out } => cmd_reconstruct(&path, &out),
        Command::Sweep {
            path,
            zeta_grid,
            point,
            out,
        } => cmd_sweep(&path, zeta_grid, point.as_deref(), &out),
        Command::Zoo { name, params, out } => cmd_zoo(&name, &params, &out),
        Command::Sections {
            path,
            count,
            seed,
            out,
        } => cmd_sections(&path, count, seed, out.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hk: {e}");
            classify_error(&e)
        }
    }
}

/// Exit code for a hard error: mathematical failures map to 1, anything
/// about the input or configuration to 2.
fn classify_error(e: &Error) -> i32 {
    match e {
        Error::InconsistentFamily { .. }
        | Error::InconsistentStructure { .. }
        | Error::Degenerate { .. }
        | Error::NotADirectSum { .. } => EXIT_CHECK_FAILED,
        Error::AtPoint { source, .. } => classify_error(source),
        _ => EXIT_INPUT_ERROR,
    }
}

fn check_thread_cap() -> Result<()> {
    if let Ok(raw) = std::env::var("HK_THREADS") {
        let parsed: usize = raw.parse().map_err(|_| {
            Error::Input(format!(
                "HK_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
        if parsed == 0 {
            return Err(Error::Input("HK_THREADS must be at least 1".into()));
        }
    }
    Ok(())
}

fn read_structure(path: &Path) -> Result<(StructureFile, String, String)> {
    let text = std::fs::read_to_string(path)?;
    let digest = input_digest(text.as_bytes());
    let file = StructureFile::parse(&text)?;
    Ok((file, digest, text))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_verify(
    path: &Path,
    tol: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<i32> {
    let (file, digest, _) = read_structure(path)?;
    let (family, chart) = file.to_family()?;
    let mut config = VerifyConfig::default();
    if let Some(t) = tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Input("--tol must be positive".into()));
        }
        config.algebra_tol = t;
    }
    if let Some(s) = samples {
        config.zeta_samples = s;
    }
    config.seed = seed.unwrap_or(0);

    let start = Instant::now();
    let report = verify_chart(&family, &chart, &config)?;
    let run = RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_digest: digest,
        seed: config.seed,
        config: serde_json::to_value(&config).map_err(|e| Error::Malformed(e.to_string()))?,
        checks: report.checks.clone(),
        aggregate_pass: report.aggregate_pass,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_output(out, &run.to_canonical_json()?)?;
    Ok(if report.aggregate_pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    })
}

fn cmd_reconstruct(path: &Path, out: &Path) -> Result<i32> {
    let (file, digest, _) = read_structure(path)?;
    let (family, chart) = file.to_family()?;
    let grid = reconstruct_metric_field(&family, &chart, tolerances::CHART_ALGEBRA)?;
    let points: Vec<serde_json::Value> = grid
        .iter()
        .map(|(x, g, sig)| {
            let rows: Vec<Vec<f64>> = (0..g.nrows())
                .map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect())
                .collect();
            json!({
                "x": x,
                "g": rows,
                "signature": {
                    "positive": sig.positive,
                    "negative": sig.negative,
                    "zero": sig.zero,
                },
            })
        })
        .collect();
    let doc = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "input_digest": digest,
        "r": file.r,
        "chart": serde_json::to_value(&chart).map_err(|e| Error::Malformed(e.to_string()))?,
        "points": points,
    });
    write_output(Some(out), &canonical_json(&doc))?;
    Ok(EXIT_PASS)
}

/// N x N sphere grid through colatitude/longitude midpoints, avoiding both
/// poles.
fn sphere_grid(n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
        for k in 0..n {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let c = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            if let TwistorParam::Finite(z) = inverse_stereographic(&c) {
                out.push(z);
            }
        }
    }
    out
}

fn parse_point(raw: Option<&str>, chart: &crate::chart::ChartSpec) -> Result<Vec<f64>> {
    let point = match raw {
        None => chart.midpoint(),
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("--point component '{s}' is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    if !chart.contains(&point) {
        return Err(Error::OutOfBox(point));
    }
    Ok(point)
}

fn cmd_sweep(path: &Path, zeta_grid: usize, point: Option<&str>, out: &Path) -> Result<i32> {
    if zeta_grid == 0 {
        return Err(Error::Input("--zeta-grid must be at least 1".into()));
    }
    let (file, _, _) = read_structure(path)?;
    let (family, chart) = file.to_family()?;
    let x = parse_point(point, &chart)?;
    let fam = family.family_at(&chart, &x)?;
    let ps = metric_from_family(&fam, tolerances::CHART_ALGEBRA)?;

    let mut csv = String::from("zeta_re,zeta_im,check,value\n");
    for z in sphere_grid(zeta_grid) {
        let zp = TwistorParam::Finite(z);
        let dim = crate::pointwise::kernel_dimension_of_family(&fam, &zp, tolerances::RANK_REL)?;
        let reality = crate::pointwise::family_reality_residual(&fam, &zp);
        let frame = rotation_frame_report(&ps.triple, &ps.sympl, z)?;
        for (check, value) in [
            ("kernel_dimension", dim as f64),
            ("reality_residual", reality),
            ("rotation_frame_residual", frame.rescale_residual),
            ("theta", frame.frame.theta),
        ] {
            csv.push_str(&format!(
                "{},{},{check},{}\n",
                format_float(z.re),
                format_float(z.im),
                format_float(value)
            ));
        }
    }
    write_output(Some(out), &csv)?;
    Ok(EXIT_PASS)
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut params = BTreeMap::new();
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("--param '{item}' must be key=value")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Input(format!("--param '{item}' has a non-numeric value")))?;
        params.insert(key.to_string(), value);
    }
    Ok(params)
}

fn cmd_zoo(name: &str, params: &[String], out: &Path) -> Result<i32> {
    let params = parse_params(params)?;
    let model = zoo::get_model(name, &params)?;
    let file = StructureFile::from_model(&model);
    write_output(Some(out), &file.to_canonical_json()?)?;
    Ok(EXIT_PASS)
}

fn cmd_sections(path: &Path, count: usize, seed: Option<u64>, out: Option<&Path>) -> Result<i32> {
    let (file, digest, _) = read_structure(path)?;
    let (family, chart) = file.to_family()?;
    let x = chart.midpoint();
    let fam = family.family_at(&chart, &x)?;
    let seed = seed.unwrap_or(0);

    let start = Instant::now();
    let ps = match metric_from_family(&fam, tolerances::CHART_ALGEBRA) {
        Ok(ps) => ps,
        Err(e) => {
            // a family the construction rejects is a failed mathematical
            // check, reported as such
            let run = RunReport {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                input_digest: digest,
                seed,
                config: json!({"count": count, "point": x}),
                checks: vec![CheckRecord::failed(
                    "pointwise_reconstruction",
                    "family -> (J_1, J_2, J_3, g)",
                    e.to_string(),
                )],
                aggregate_pass: false,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            write_output(out, &run.to_canonical_json()?)?;
            return Ok(EXIT_CHECK_FAILED);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zetas = sample_zetas(seed.wrapping_add(1), 6);
    let fit_nodes = [
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(1.0, -1.0),
    ];

    let mut reality_worst: f64 = 0.0;
    let mut fit_worst: f64 = 0.0;
    let mut identity_worst: f64 = 0.0;
    let mut hklr_worst: f64 = 0.0;
    for _ in 0..count {
        let a = random_holomorphic(&mut rng, ps.triple.j3());
        let b = random_holomorphic(&mut rng, ps.triple.j3());
        for z in &zetas {
            let zp = TwistorParam::Finite(*z);
            let here = real_section(&ps.triple, &a, &zp)?;
            let there = real_section(&ps.triple, &a, &zp.antipode())?;
            reality_worst = reality_worst.max(max_abs_vec(&(conj_vec(&there.s) - &here.s)));
        }
        let o2 = o2_polynomial_check(&fam, &a, &b, &fit_nodes)?;
        fit_worst = fit_worst.max(o2.fit_residual);
        identity_worst = identity_worst.max(o2.identity_residual);
        let lhs = hklr_metric_with(fam.omega_plus(), ps.triple.j1(), ps.triple.j3(), &a, &b)?;
        let xa = &a + conj_vec(&a);
        let xb = &b + conj_vec(&b);
        let rhs = (ps.metric.matrix() * &xb).dot(&xa);
        hklr_worst = hklr_worst.max((lhs - rhs.re).abs().max(rhs.im.abs()));
    }

    let checks = vec![
        CheckRecord::new(
            "section_reality",
            "conj(s(-1/conj zeta)) = s(zeta)",
            reality_worst,
            1e-9,
        ),
        CheckRecord::new(
            "o2_polynomiality",
            "2 i zeta W(zeta)(s_a, s_b) is quadratic in zeta",
            fit_worst,
            1e-7,
        ),
        CheckRecord::new(
            "o2_identity",
            "2 i zeta W(zeta)(s_a, s_b) = omega_+(v_a, v_b)",
            identity_worst,
            1e-9,
        ),
        CheckRecord::new(
            "hklr_agreement",
            "section metric = g(a + conj a, b + conj b)",
            hklr_worst,
            1e-10,
        ),
    ];
    let aggregate_pass = checks.iter().all(|c| c.pass);
    let run = RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_digest: digest,
        seed,
        config: json!({"count": count, "point": x, "zeta_samples": zetas.len()}),
        checks,
        aggregate_pass,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_output(out, &run.to_canonical_json()?)?;
    Ok(if aggregate_pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    })
}
