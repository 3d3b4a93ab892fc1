//! Default numerical thresholds used throughout the crate.
//!
//! Every routine that makes a rank decision or accepts/rejects an identity
//! takes its threshold as an argument; the constants here are the defaults
//! wired into the high-level drivers. Structures are O(1) in all shipped
//! models, so most tolerances are absolute.

/// Relative singular-value cutoff for rank decisions (kernels, degeneracy).
pub const RANK_REL: f64 = 1e-8;

/// Orthonormality of subspace bases under the Hermitian pairing.
pub const ORTHONORMAL: f64 = 1e-12;

/// Default tolerance for algebraic identities between exact structures.
pub const ALGEBRA: f64 = 1e-9;

/// Quaternion relations J_a J_b = eps_abc J_c - delta_ab.
pub const QUATERNION: f64 = 1e-9;

/// Reality checks: distance of a matrix from its entrywise conjugate.
pub const REALITY: f64 = 1e-10;

/// Imaginary contamination allowed in an operator that must be real.
pub const OPERATOR_REAL: f64 = 1e-10;

/// Relative residual accepted from a linear solve against a 2-form.
pub const SOLVE_RESIDUAL_REL: f64 = 1e-10;

/// Idempotency and complementarity of projector pairs.
pub const PROJECTOR: f64 = 1e-10;

/// Condition-number ceiling beyond which two subspaces are rejected as a
/// direct sum.
pub const DIRECT_SUM_COND: f64 = 1e12;

/// Metric/complex-structure/symplectic-form compatibility relations.
pub const COMPAT: f64 = 1e-9;

/// Central-difference step for closedness sweeps.
pub const FD_STEP_CLOSEDNESS: f64 = 1e-3;

/// Pass threshold for max ||dF|| on closed 2-form fields evaluated by
/// finite differences (O(h^2) truncation at h = 1e-3).
pub const CLOSEDNESS: f64 = 1e-5;

/// Central-difference step for the integrability (Nijenhuis) sweep.
pub const FD_STEP_NIJENHUIS: f64 = 1e-4;

/// Pass threshold for the max Nijenhuis component on integrable structures.
pub const NIJENHUIS: f64 = 1e-4;

/// Relative metric error allowed in extract-then-reconstruct round trips.
pub const ROUNDTRIP: f64 = 1e-8;

/// Pointwise algebraic tolerance used by the chart verifier for quaternion
/// and compatibility relations on reconstructed structures.
pub const CHART_ALGEBRA: f64 = 1e-8;

/// Denominator floor for rational form fields, probed on a refined grid.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::assertions_on_constants)]
    fn ordering() {
        assert!(ORTHONORMAL < REALITY);
        assert!(REALITY < ALGEBRA);
        assert!(ALGEBRA <= CHART_ALGEBRA);
        assert!(CHART_ALGEBRA < CLOSEDNESS);
        assert!(FD_STEP_NIJENHUIS < FD_STEP_CLOSEDNESS);
    }
}
