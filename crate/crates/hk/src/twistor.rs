//! The twistor parameter: points of the Riemann sphere, stereographic
//! coordinates, the antipodal map, and the Mobius action of SU(2).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of the Riemann sphere labelling one member of the family of
/// complex structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwistorParam {
    Finite(Complex64),
    Infinity,
}

impl TwistorParam {
    pub fn zero() -> Self {
        TwistorParam::Finite(Complex64::new(0.0, 0.0))
    }

    pub fn new(re: f64, im: f64) -> Self {
        TwistorParam::Finite(Complex64::new(re, im))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TwistorParam::Finite(z) if z.norm() == 0.0)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, TwistorParam::Infinity)
    }

    /// Finite value, if any.
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            TwistorParam::Finite(z) => Some(*z),
            TwistorParam::Infinity => None,
        }
    }

    /// The antipodal map `zeta -> -1/conj(zeta)`, exchanging 0 and infinity.
    pub fn antipode(&self) -> TwistorParam {
        match self {
            TwistorParam::Infinity => TwistorParam::zero(),
            TwistorParam::Finite(z) if z.norm() == 0.0 => TwistorParam::Infinity,
            TwistorParam::Finite(z) => TwistorParam::Finite(-1.0 / z.conj()),
        }
    }
}

impl From<Complex64> for TwistorParam {
    fn from(z: Complex64) -> Self {
        TwistorParam::Finite(z)
    }
}

impl std::fmt::Display for TwistorParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TwistorParam::Finite(z) => write!(f, "{} + {}i", z.re, z.im),
            TwistorParam::Infinity => write!(f, "inf"),
        }
    }
}

/// Unit vector on S^2 for a sphere point:
/// `c = (2 Im z, -2 Re z, 1 - |z|^2) / (1 + |z|^2)`, with the south pole
/// `(0, 0, -1)` at infinity.
pub fn stereographic(zeta: &TwistorParam) -> [f64; 3] {
    match zeta {
        TwistorParam::Infinity => [0.0, 0.0, -1.0],
        TwistorParam::Finite(z) => {
            let n2 = z.norm_sqr();
            let d = 1.0 + n2;
            [2.0 * z.im / d, -2.0 * z.re / d, (1.0 - n2) / d]
        }
    }
}

/// Inverse of [`stereographic`]: `zeta = (i c1 - c2) / (1 + c3)`, the south
/// pole mapping to infinity.
pub fn inverse_stereographic(c: &[f64; 3]) -> TwistorParam {
    let denom = 1.0 + c[2];
    if denom.abs() < 1e-300 {
        return TwistorParam::Infinity;
    }
    TwistorParam::Finite(Complex64::new(-c[1] / denom, c[0] / denom))
}

/// Fractional linear action `zeta -> (u zeta + v) / (-conj(v) zeta + conj(u))`
/// of a unit pair `(u, v)`, the sphere rotation induced by SU(2).
///
/// Negating both `u` and `v` gives the same map; infinity is handled by
/// limits.
pub fn mobius_rotate(u: Complex64, v: Complex64, zeta: &TwistorParam) -> Result<TwistorParam> {
    let norm = u.norm_sqr() + v.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Input(format!(
            "(u, v) must satisfy |u|^2 + |v|^2 = 1, got {norm}"
        )));
    }
    let (num, den) = match zeta {
        TwistorParam::Infinity => (u, -v.conj()),
        TwistorParam::Finite(z) => (u * z + v, -v.conj() * z + u.conj()),
    };
    if den.norm() == 0.0 {
        return Ok(TwistorParam::Infinity);
    }
    Ok(TwistorParam::Finite(num / den))
}
