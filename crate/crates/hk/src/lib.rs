//! Pseudo-hyper-Kahler structures from families of holomorphic symplectic
//! forms.
//!
//! Given a sphere's worth of holomorphic symplectic forms
//!
//! ```text
//! W(zeta) = -(i / 2 zeta) omega_+  +  omega_3  -  (i / 2) zeta omega_-
//! ```
//!
//! on a real `4r`-dimensional chart, with `omega_- = conj(omega_+)` and
//! `omega_3` real, this crate constructs the associated triple of complex
//! structures `(J_1, J_2, J_3)`, the pseudo-Riemannian metric `g`, and
//! certifies every identity the construction relies on, pointwise and across
//! the chart: quaternion relations, Kahler compatibility, reality under the
//! antipodal map, kernel graphs over the sphere, rotation frames, twistor-line
//! sections, closedness and integrability.
//!
//! # Layout
//!
//! - [`forms`]: complex 2-forms, operators, wedge pairings, kernels,
//!   projectors, signatures on a single tangent space;
//! - [`twistor`]: the sphere parameter, stereographic coordinates and the
//!   Mobius action;
//! - [`pointwise`]: everything at one point, from [`pointwise::HoloSympFamily`]
//!   to [`pointwise::metric_from_family`];
//! - [`chart`]: form fields over a box, exterior derivatives, closedness and
//!   Nijenhuis sweeps, [`chart::verify_chart`];
//! - [`zoo`]: exactly known models (flat, split-signature, Taub-NUT and
//!   friends) used as oracles;
//! - [`files`]: the structure-file and report formats;
//! - [`cli`]: the `hk` command-line front end.
//!
//! # Quick start
//!
//! ```
//! use hk::chart::{verify_chart, VerifyConfig};
//! use hk::zoo;
//!
//! let model = zoo::flat_hk(1).unwrap();
//! let report = verify_chart(
//!     model.family_field(),
//!     model.chart(),
//!     &VerifyConfig::default(),
//! )
//! .unwrap();
//! assert!(report.aggregate_pass);
//! ```
//!
//! The runnable examples under `examples/` walk through each capability;
//! `cargo run --bin hk -- --help` shows the command-line surface.

pub mod chart;
pub mod cli;
pub mod error;
pub mod files;
pub mod forms;
pub mod pointwise;
pub mod tolerances;
pub mod twistor;
pub mod zoo;

pub use error::{Error, Result};
