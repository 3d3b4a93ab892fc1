//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong dimensions, violated preconditions, bad parameters.
    #[error("invalid input: {0}")]
    Input(String),

    /// A form or operator that must be invertible is numerically singular.
    #[error("degenerate {what}: smallest singular value {smin:.3e}")]
    Degenerate { what: String, smin: f64 },

    /// Two subspaces fed to a direct-sum decomposition do not span complementarily.
    #[error("not a direct sum: concatenated basis has condition number {cond:.3e}")]
    NotADirectSum { cond: f64 },

    /// The supplied family violates an identity it is required to satisfy.
    #[error("inconsistent family: {check} residual {residual:.3e} exceeds {tol:.3e}")]
    InconsistentFamily {
        check: String,
        residual: f64,
        tol: f64,
    },

    /// A derived structure fails its defining relations.
    #[error("inconsistent structure: {check} residual {residual:.3e} exceeds {tol:.3e}")]
    InconsistentStructure {
        check: String,
        residual: f64,
        tol: f64,
    },

    /// Evaluation requested outside the chart box.
    #[error("point {0:?} lies outside the chart box")]
    OutOfBox(Vec<f64>),

    /// A rational field's denominator comes too close to zero on the chart.
    #[error("denominator of entry ({i},{j}) reaches |q| = {min_abs:.3e} on the chart (limit {limit:.1e})")]
    PoleProximity {
        i: usize,
        j: usize,
        min_abs: f64,
        limit: f64,
    },

    /// A chart-level sweep failed at a specific grid point.
    #[error("{context} failed at {location:?}: {source}")]
    AtPoint {
        location: Vec<f64>,
        context: String,
        #[source]
        source: Box<Error>,
    },

    /// Structure file parsing / validation failure. The message names the offending field.
    #[error("malformed structure file: {0}")]
    Malformed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_point(self, location: &[f64], context: &str) -> Error {
        Error::AtPoint {
            location: location.to_vec(),
            context: context.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
