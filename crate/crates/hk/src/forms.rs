//! Linear algebra of complex 2-forms and operators on one tangent space.
//!
//! Conventions, fixed once for the whole crate:
//!
//! - A 2-form is a complex antisymmetric `n x n` matrix `W` acting on column
//!   vectors as `W(v, w) = v^T W w` (no conjugation).
//! - Covectors are stored by their component vectors; `sigma` pairs with `w`
//!   as the unconjugated dot product `sigma . w`.
//! - Operators act on the left. The transpose action on covectors,
//!   `(J' sigma)(v) = sigma(J v)`, is right-multiplication of the covector's
//!   row representation by `J`, i.e. component vector `J^T sigma`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

/// Max-modulus of the entries of a complex matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Max-modulus of the entries of a complex vector.
pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Entrywise conjugate.
pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|c| c.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|c| c.conj())
}

/// Distance from realness, `max |A - conj(A)|`.
pub fn imag_deviation(m: &CMat) -> f64 {
    m.iter().map(|c| 2.0 * c.im.abs()).fold(0.0, f64::max)
}

pub fn complex_from_real(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// A complex 2-form on a `4r`-dimensional tangent space.
///
/// Antisymmetry is exact: the stored matrix satisfies `W^T = -W` entry for
/// entry, not merely up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    mat: CMat,
}

impl TwoForm {
    /// Builds a 2-form from a matrix that is antisymmetric up to rounding.
    ///
    /// The matrix is exactly antisymmetrized; inputs further than
    /// `1e-12 * scale` from antisymmetric are rejected.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Input(format!(
                "2-form matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let scale = max_abs(&mat).max(1.0);
        let dev = (&mat + mat.transpose())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if dev > 1e-12 * scale {
            return Err(Error::Input(format!(
                "matrix is not antisymmetric: |W + W^T| = {dev:.3e}"
            )));
        }
        Ok(Self::antisymmetrize(mat))
    }

    /// Exact antisymmetrization `(W - W^T)/2`, no validation.
    pub fn antisymmetrize(mat: CMat) -> Self {
        let n = mat.nrows();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (mat[(i, j)] - mat[(j, i)]) * Complex64::new(0.5, 0.0);
                out[(i, j)] = v;
                out[(j, i)] = -v;
            }
        }
        TwoForm { mat: out }
    }

    /// Builds a 2-form from upper-triangle entries `(i, j, W_ij)` with `i < j`.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut mat = CMat::zeros(dim, dim);
        for &(i, j, c) in entries {
            if i >= j {
                return Err(Error::Input(format!(
                    "entry indices must satisfy i < j, got ({i}, {j})"
                )));
            }
            if j >= dim {
                return Err(Error::Input(format!(
                    "entry index {j} out of range for dimension {dim}"
                )));
            }
            mat[(i, j)] += c;
            mat[(j, i)] -= c;
        }
        Ok(TwoForm { mat })
    }

    pub fn zero(dim: usize) -> Self {
        TwoForm {
            mat: CMat::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Evaluates `W(v, w) = v^T W w`.
    pub fn apply(&self, v: &CVec, w: &CVec) -> Complex64 {
        (self.mat.transpose() * v).dot(w)
    }

    pub fn conjugate(&self) -> TwoForm {
        TwoForm {
            mat: conj_mat(&self.mat),
        }
    }

    pub fn real_part(&self) -> TwoForm {
        TwoForm {
            mat: self.mat.map(|c| Complex64::new(c.re, 0.0)),
        }
    }

    pub fn imag_part(&self) -> TwoForm {
        TwoForm {
            mat: self.mat.map(|c| Complex64::new(c.im, 0.0)),
        }
    }

    /// A 2-form is real when `|W - conj(W)| <= tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        imag_deviation(&self.mat) <= tol
    }

    pub fn scaled(&self, c: Complex64) -> TwoForm {
        TwoForm { mat: &self.mat * c }
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        TwoForm {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &TwoForm) -> TwoForm {
        TwoForm {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.mat)
    }
}

/// A linear operator on the (complexified) tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    mat: CMat,
    real: bool,
}

impl LinOp {
    pub fn from_complex(mat: CMat) -> Self {
        LinOp { mat, real: false }
    }

    pub fn from_real_matrix(mat: &RMat) -> Self {
        LinOp {
            mat: complex_from_real(mat),
            real: true,
        }
    }

    /// Accepts a matrix expected to be real, discarding imaginary dust below
    /// `tol` and rejecting anything larger.
    pub fn try_real(mat: CMat, tol: f64) -> Result<Self> {
        let dev = imag_deviation(&mat);
        if dev > tol {
            return Err(Error::InconsistentStructure {
                check: "operator realness".into(),
                residual: dev,
                tol,
            });
        }
        Ok(LinOp {
            mat: mat.map(|c| Complex64::new(c.re, 0.0)),
            real: true,
        })
    }

    pub fn identity(dim: usize) -> Self {
        LinOp {
            mat: CMat::identity(dim, dim),
            real: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// A real view of the operator; only valid on operators flagged real.
    pub fn real_matrix(&self) -> RMat {
        self.mat.map(|c| c.re)
    }

    pub fn is_real_flag(&self) -> bool {
        self.real
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.mat * v
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &LinOp) -> LinOp {
        LinOp {
            mat: &self.mat * &other.mat,
            real: self.real && other.real,
        }
    }

    pub fn scaled(&self, c: Complex64) -> LinOp {
        LinOp {
            mat: &self.mat * c,
            real: self.real && c.im == 0.0,
        }
    }

    pub fn add(&self, other: &LinOp) -> LinOp {
        LinOp {
            mat: &self.mat + &other.mat,
            real: self.real && other.real,
        }
    }

    pub fn sub(&self, other: &LinOp) -> LinOp {
        LinOp {
            mat: &self.mat - &other.mat,
            real: self.real && other.real,
        }
    }

    pub fn neg(&self) -> LinOp {
        LinOp {
            mat: -&self.mat,
            real: self.real,
        }
    }

    /// Residual of `J^2 = -1`.
    pub fn square_residual(&self) -> f64 {
        let n = self.dim();
        max_abs(&(&self.mat * &self.mat + CMat::identity(n, n)))
    }
}

/// A subspace of C^n carried by an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<CVec>,
}

impl Subspace {
    /// Wraps a basis verified orthonormal under the Hermitian pairing.
    pub fn from_orthonormal(ambient: usize, basis: Vec<CVec>) -> Result<Self> {
        for (a, va) in basis.iter().enumerate() {
            if va.len() != ambient {
                return Err(Error::Input("basis vector has wrong length".into()));
            }
            for (b, vb) in basis.iter().enumerate() {
                let p = va.dotc(vb); // conjugates va
                let target = if a == b { 1.0 } else { 0.0 };
                if (p - Complex64::new(target, 0.0)).norm() > tolerances::ORTHONORMAL {
                    return Err(Error::Input(format!(
                        "basis is not orthonormal: <{a},{b}> = {p}"
                    )));
                }
            }
        }
        Ok(Subspace { ambient, basis })
    }

    /// Orthonormalizes a spanning set by modified Gram-Schmidt, rejecting
    /// rank-deficient input.
    pub fn span(ambient: usize, vectors: &[CVec]) -> Result<Self> {
        let mut basis: Vec<CVec> = Vec::new();
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::Input("spanning vector has wrong length".into()));
            }
            let mut w = v.clone();
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
            let norm = w.norm();
            if norm < 1e-10 {
                return Err(Error::Input(
                    "spanning set is numerically rank-deficient".into(),
                ));
            }
            basis.push(w / Complex64::new(norm, 0.0));
        }
        Ok(Subspace { ambient, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[CVec] {
        &self.basis
    }

    /// Basis vectors as matrix columns.
    pub fn basis_matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.ambient, self.basis.len());
        for (k, v) in self.basis.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    }

    /// The entrywise-conjugate subspace.
    pub fn conjugate(&self) -> Subspace {
        Subspace {
            ambient: self.ambient,
            basis: self.basis.iter().map(conj_vec).collect(),
        }
    }
}

/// Eigenvalue signature of a real symmetric operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.positive, self.negative, self.zero)
    }
}

/// Coefficient of `A^k ^ B^l` against the volume element `e^0 ^ ... ^ e^(n-1)`,
/// evaluated as a signed sum over perfect matchings of the index set.
///
/// Requires `2(k + l) = n` and `n <= 12`; the matching count `(n-1)!!` keeps
/// the exact combinatorial evaluation cheap in that range.
pub fn wedge_pairing(a: &TwoForm, k: usize, b: &TwoForm, l: usize) -> Result<Complex64> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::Input(format!(
            "wedge pairing dimension mismatch: {} vs {}",
            n,
            b.dim()
        )));
    }
    if !n.is_multiple_of(2) || 2 * (k + l) != n {
        return Err(Error::Input(format!(
            "wedge degree mismatch: 2(k+l) = {} but dimension is {n}",
            2 * (k + l)
        )));
    }
    if n > 12 {
        return Err(Error::Input(format!(
            "combinatorial wedge evaluation limited to dimension <= 12, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }

    let mut acc = Complex64::new(0.0, 0.0);
    let free: Vec<usize> = (0..n).collect();
    // Polynomial in t accumulated along the matching: product of (A_ij t + B_ij).
    let init_poly = vec![Complex64::new(1.0, 0.0)];
    fn rec(
        a: &CMat,
        b: &CMat,
        free: &[usize],
        sign: f64,
        poly: &[Complex64],
        k: usize,
        acc: &mut Complex64,
    ) {
        if free.is_empty() {
            *acc += poly[k] * Complex64::new(sign, 0.0);
            return;
        }
        let i = free[0];
        for pos in 1..free.len() {
            let j = free[pos];
            let pair_sign = if (pos - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            // multiply running polynomial by (A_ij t + B_ij)
            let aij = a[(i, j)];
            let bij = b[(i, j)];
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d] += c * bij;
                next[d + 1] += c * aij;
            }
            let rest: Vec<usize> = free.iter().copied().filter(|&x| x != i && x != j).collect();
            rec(a, b, &rest, sign * pair_sign, &next, k, acc);
        }
    }
    rec(a.matrix(), b.matrix(), &free, 1.0, &init_poly, k, &mut acc);

    let mut factorials = 1.0f64;
    for q in 2..=k {
        factorials *= q as f64;
    }
    for q in 2..=l {
        factorials *= q as f64;
    }
    Ok(acc * Complex64::new(factorials, 0.0))
}

/// Interior product `iota_v W`: the covector `w -> W(v, w)`, with component
/// vector `W^T v`.
pub fn interior(omega: &TwoForm, v: &CVec) -> Result<CVec> {
    if v.len() != omega.dim() {
        return Err(Error::Input(format!(
            "interior product dimension mismatch: form {} vs vector {}",
            omega.dim(),
            v.len()
        )));
    }
    Ok(omega.matrix().transpose() * v)
}

/// Descending singular values of a complex matrix.
fn singular_values(m: &CMat) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Smallest and largest singular value.
pub fn extreme_singular_values(m: &CMat) -> (f64, f64) {
    let s = singular_values(m);
    (*s.last().unwrap(), s[0])
}

/// Lexicographic comparison of complex vectors by (re, im) pairs.
fn lex_cmp(a: &CVec, b: &CVec) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Rotates a vector's global phase so its first significant component is
/// real positive; fixes the SVD phase ambiguity for reproducible reports.
fn normalize_phase(v: &mut CVec) {
    let scale = max_abs_vec(v);
    if scale == 0.0 {
        return;
    }
    for k in 0..v.len() {
        if v[k].norm() > 1e-12 * scale {
            let phase = v[k] / Complex64::new(v[k].norm(), 0.0);
            let corr = phase.conj();
            for c in v.iter_mut() {
                *c *= corr;
            }
            v[k] = Complex64::new(v[k].re.abs(), 0.0);
            return;
        }
    }
}

/// Kernel of a 2-form at a relative singular-value threshold.
///
/// Returns the span of right-singular vectors whose singular values fall at
/// or below `rel_tol * sigma_max`, ordered by ascending singular value with a
/// lexicographic tie-break, each phase-normalized.
pub fn nullspace(omega: &TwoForm, rel_tol: f64) -> Result<Subspace> {
    if rel_tol <= 0.0 {
        return Err(Error::Input("nullspace tolerance must be positive".into()));
    }
    let n = omega.dim();
    if n == 0 {
        return Subspace::from_orthonormal(0, vec![]);
    }
    let svd = omega.matrix().clone().svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let mut pairs: Vec<(f64, CVec)> = Vec::new();
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    for idx in 0..svd.singular_values.len() {
        let s = svd.singular_values[idx];
        if smax == 0.0 || s <= rel_tol * smax {
            // rows of V^H conjugated are the right-singular vectors
            let mut v = CVec::from_iterator(n, vt.row(idx).iter().map(|c| c.conj()));
            normalize_phase(&mut v);
            pairs.push((s, v));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| lex_cmp(&a.1, &b.1))
    });
    Subspace::from_orthonormal(n, pairs.into_iter().map(|(_, v)| v).collect())
}

/// Solves `interior(W, v) = sigma` for nondegenerate `W`.
pub fn solve_interior(omega: &TwoForm, sigma: &CVec, rank_rel_tol: f64) -> Result<CVec> {
    let n = omega.dim();
    if sigma.len() != n {
        return Err(Error::Input("covector has wrong length".into()));
    }
    let (smin, smax) = extreme_singular_values(omega.matrix());
    if smax == 0.0 || smin <= rank_rel_tol * smax {
        return Err(Error::Degenerate {
            what: "2-form in interior-product solve".into(),
            smin,
        });
    }
    let lhs = omega.matrix().transpose();
    let v = lhs.lu().solve(sigma).ok_or(Error::Degenerate {
        what: "2-form in interior-product solve".into(),
        smin,
    })?;
    let residual = max_abs_vec(&(interior(omega, &v)? - sigma));
    let scale = max_abs_vec(sigma).max(1e-300);
    if residual > tolerances::SOLVE_RESIDUAL_REL * scale && residual > 1e-14 {
        return Err(Error::Degenerate {
            what: format!("interior-product solve residual {residual:.3e}"),
            smin,
        });
    }
    Ok(v)
}

/// Oblique projector pair onto `A` along `B` and onto `B` along `A`.
///
/// Fails when the concatenated basis is too ill-conditioned to define a
/// direct sum.
pub fn complement_projectors(a: &Subspace, b: &Subspace) -> Result<(LinOp, LinOp)> {
    let n = a.ambient_dim();
    if b.ambient_dim() != n {
        return Err(Error::Input("subspaces live in different spaces".into()));
    }
    if a.dim() + b.dim() != n {
        return Err(Error::Input(format!(
            "subspace dimensions {} + {} do not fill ambient dimension {n}",
            a.dim(),
            b.dim()
        )));
    }
    let mut c = CMat::zeros(n, n);
    for (k, v) in a.basis().iter().enumerate() {
        c.set_column(k, v);
    }
    for (k, v) in b.basis().iter().enumerate() {
        c.set_column(a.dim() + k, v);
    }
    let (smin, smax) = extreme_singular_values(&c);
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if cond > tolerances::DIRECT_SUM_COND {
        return Err(Error::NotADirectSum { cond });
    }
    let c_inv = c
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::NotADirectSum { cond })?;
    let mut ea = CMat::zeros(n, n);
    for k in 0..a.dim() {
        ea[(k, k)] = Complex64::new(1.0, 0.0);
    }
    let pa = &c * &ea * &c_inv;
    let pb = CMat::identity(n, n) - &pa;

    let idem = max_abs(&(&pa * &pa - &pa));
    if idem > tolerances::PROJECTOR {
        return Err(Error::NotADirectSum { cond });
    }
    Ok((LinOp::from_complex(pa), LinOp::from_complex(pb)))
}

/// Signature of a real symmetric operator: counts of eigenvalues above
/// `+tol * |g|`, below `-tol * |g|`, and between.
pub fn signature_of(g: &LinOp, tol: f64) -> Result<Signature> {
    let n = g.dim();
    let dev = imag_deviation(g.matrix());
    let scale = max_abs(g.matrix()).max(1e-300);
    if dev > tol * scale {
        return Err(Error::Input(format!(
            "signature requires a real operator; imaginary deviation {dev:.3e}"
        )));
    }
    let gr = g.real_matrix();
    let sym_dev = (&gr - gr.transpose())
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if sym_dev > tol * scale {
        return Err(Error::Input(format!(
            "signature requires a symmetric operator; |g - g^T| = {sym_dev:.3e}"
        )));
    }
    let sym = (&gr + gr.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let gnorm = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let thresh = tol * gnorm;
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for &lam in eig.eigenvalues.iter() {
        if lam > thresh {
            sig.positive += 1;
        } else if lam < -thresh {
            sig.negative += 1;
        } else {
            sig.zero += 1;
        }
    }
    debug_assert_eq!(sig.positive + sig.negative + sig.zero, n);
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Hand-expanded coefficient of A ^ B against e^0^e^1^e^2^e^3.
    fn wedge4_oracle(a: &TwoForm, b: &TwoForm) -> Complex64 {
        let a = a.matrix();
        let b = b.matrix();
        a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)]
            + a[(0, 3)] * b[(1, 2)]
            + b[(0, 1)] * a[(2, 3)]
            - b[(0, 2)] * a[(1, 3)]
            + b[(0, 3)] * a[(1, 2)]
    }

    #[test]
    fn antisymmetry_is_exact() {
        let m = CMat::from_fn(4, 4, |i, j| {
            c((i * 7 + j) as f64 * 0.3, (j + 1) as f64 * 0.1)
        });
        let f = TwoForm::antisymmetrize(m);
        let dev = max_abs(&(f.matrix() + f.matrix().transpose()));
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn non_antisymmetric_rejected() {
        let m = CMat::identity(4, 4);
        assert!(TwoForm::new(m).is_err());
    }

    #[test]
    fn wedge_pairing_matches_hand_expansion_n4() {
        let flat = zoo::flat_hk(1).unwrap();
        let (w1, w2, w3) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let wp = w1.add(&w2.scaled(c(0.0, 1.0)));
        for (a, ka, b, kb) in [
            (&wp, 1usize, &w3, 1usize),
            (&wp, 1, &wp.conjugate(), 1),
            (&w3, 1, &w3, 1),
        ] {
            let got = wedge_pairing(a, ka, b, kb).unwrap();
            let want = wedge4_oracle(a, b);
            assert!((got - want).norm() < 1e-14, "got {got}, want {want}");
        }
    }

    #[test]
    fn wedge_pairing_flat_identities() {
        let flat = zoo::flat_hk(1).unwrap();
        let (w1, w2, w3) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let wp = w1.add(&w2.scaled(c(0.0, 1.0)));
        // omega_+ ^ omega_3 vanishes
        let z = wedge_pairing(&wp, 1, &w3, 1).unwrap();
        assert!(z.norm() < 1e-15);
        // omega_+ ^ conj(omega_+) does not (value 4 on the standard block)
        let v = wedge_pairing(&wp, 1, &wp.conjugate(), 1).unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn wedge_pairing_square_matches_pfaffian_expansion() {
        // A^2 against the volume form: 2 (A01 A23 - A02 A13 + A03 A12)
        let a = TwoForm::from_entries(
            4,
            &[
                (0, 1, c(1.0, 0.5)),
                (0, 2, c(-0.3, 0.0)),
                (0, 3, c(0.2, -1.0)),
                (1, 2, c(0.7, 0.1)),
                (1, 3, c(0.0, 0.9)),
                (2, 3, c(-0.4, 0.3)),
            ],
        )
        .unwrap();
        let m = a.matrix();
        let want = (m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)]) * 2.0;
        let got = wedge_pairing(&a, 2, &TwoForm::zero(4), 0).unwrap();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn wedge_degree_overflow_rejected() {
        let a = TwoForm::zero(4);
        assert!(wedge_pairing(&a, 2, &a, 1).is_err());
        assert!(wedge_pairing(&a, 3, &a, 0).is_err());
    }

    #[test]
    fn wedge_symmetry_and_linearity() {
        let a = TwoForm::from_entries(4, &[(0, 1, c(1.0, 0.2)), (2, 3, c(0.5, -0.1))]).unwrap();
        let b = TwoForm::from_entries(4, &[(0, 2, c(-0.7, 0.4)), (1, 3, c(0.3, 0.8))]).unwrap();
        let ab = wedge_pairing(&a, 1, &b, 1).unwrap();
        let ba = wedge_pairing(&b, 1, &a, 1).unwrap();
        // reordering two 2-forms is an even permutation
        assert!((ab - ba).norm() < 1e-14);
        // linearity in the first slot
        let a2 = a.scaled(c(2.0, 1.0));
        let lhs = wedge_pairing(&a2, 1, &b, 1).unwrap();
        assert!((lhs - ab * c(2.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn interior_basics() {
        let flat = zoo::flat_hk(1).unwrap();
        let (_, _, w3) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let zero = CVec::zeros(4);
        assert_eq!(max_abs_vec(&interior(&w3, &zero).unwrap()), 0.0);
        // iota_{e0} w3 = row 0 of w3
        let mut e0 = CVec::zeros(4);
        e0[0] = c(1.0, 0.0);
        let sigma = interior(&w3, &e0).unwrap();
        for j in 0..4 {
            assert!((sigma[j] - w3.matrix()[(0, j)]).norm() < 1e-15);
        }
    }

    #[test]
    fn nullspace_dimensions() {
        let flat = zoo::flat_hk(1).unwrap();
        let (w1, w2, w3) = flat.symplectic_at(&[0.0; 4]).unwrap();
        assert_eq!(nullspace(&w3, 1e-8).unwrap().dim(), 0);
        let wp = w1.add(&w2.scaled(c(0.0, 1.0)));
        let ker = nullspace(&wp, 1e-8).unwrap();
        assert_eq!(ker.dim(), 2);
        // kernel is the -i eigenspace of J3: explicit span {(-i,0,0,1), (0,-i,1,0)}
        for v in ker.basis() {
            let img = wp.matrix().transpose() * v;
            assert!(max_abs_vec(&img) < 1e-12);
        }
        assert_eq!(nullspace(&TwoForm::zero(4), 1e-8).unwrap().dim(), 4);
    }

    #[test]
    fn nullspace_deterministic() {
        let flat = zoo::flat_hk(1).unwrap();
        let (w1, w2, _) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let wp = w1.add(&w2.scaled(c(0.0, 1.0)));
        let k1 = nullspace(&wp, 1e-8).unwrap();
        let k2 = nullspace(&wp, 1e-8).unwrap();
        for (a, b) in k1.basis().iter().zip(k2.basis()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn solve_interior_roundtrip() {
        let flat = zoo::flat_hk(1).unwrap();
        let (_, _, w3) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let w = CVec::from_iterator(4, (0..4).map(|k| c(0.3 * k as f64 - 0.2, 0.1 * k as f64)));
        let sigma = interior(&w3, &w).unwrap();
        let v = solve_interior(&w3, &sigma, 1e-8).unwrap();
        assert!(max_abs_vec(&(v - w)) < 1e-12);
        // sigma = 0 -> v = 0
        let v0 = solve_interior(&w3, &CVec::zeros(4), 1e-8).unwrap();
        assert_eq!(max_abs_vec(&v0), 0.0);
    }

    #[test]
    fn solve_interior_rejects_degenerate() {
        let flat = zoo::flat_hk(1).unwrap();
        let (w1, w2, _) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let wp = w1.add(&w2.scaled(c(0.0, 1.0)));
        let sigma = CVec::from_element(4, c(1.0, 0.0));
        match solve_interior(&wp, &sigma, 1e-8) {
            Err(Error::Degenerate { smin, .. }) => assert!(smin < 1e-10),
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn projectors_coordinate_case() {
        let e: Vec<CVec> = (0..4)
            .map(|k| {
                let mut v = CVec::zeros(4);
                v[k] = c(1.0, 0.0);
                v
            })
            .collect();
        let a = Subspace::from_orthonormal(4, vec![e[0].clone(), e[1].clone()]).unwrap();
        let b = Subspace::from_orthonormal(4, vec![e[2].clone(), e[3].clone()]).unwrap();
        let (pa, pb) = complement_projectors(&a, &b).unwrap();
        let mut expect = CMat::zeros(4, 4);
        expect[(0, 0)] = c(1.0, 0.0);
        expect[(1, 1)] = c(1.0, 0.0);
        assert!(max_abs(&(pa.matrix() - &expect)) < 1e-14);
        assert!(max_abs(&(pa.matrix() * pb.matrix())) < 1e-14);
    }

    #[test]
    fn projectors_kernel_split() {
        let flat = zoo::flat_hk(1).unwrap();
        let (w1, w2, _) = flat.symplectic_at(&[0.0; 4]).unwrap();
        let wp = w1.add(&w2.scaled(c(0.0, 1.0)));
        let ka = nullspace(&wp, 1e-8).unwrap();
        let kb = nullspace(&wp.conjugate(), 1e-8).unwrap();
        let (pa, pb) = complement_projectors(&ka, &kb).unwrap();
        assert!(max_abs(&(pa.matrix() * pa.matrix() - pa.matrix())) < 1e-10);
        assert!(max_abs(&(pb.matrix() * pb.matrix() - pb.matrix())) < 1e-10);
        // ranges: P_A fixes ker, kills conj-ker
        for v in ka.basis() {
            assert!(max_abs_vec(&(pa.apply(v) - v)) < 1e-10);
        }
        for v in kb.basis() {
            assert!(max_abs_vec(&pa.apply(v)) < 1e-10);
        }
    }

    #[test]
    fn projectors_reject_overlap() {
        let e0 = {
            let mut v = CVec::zeros(4);
            v[0] = c(1.0, 0.0);
            v
        };
        let e1 = {
            let mut v = CVec::zeros(4);
            v[1] = c(1.0, 0.0);
            v
        };
        let a = Subspace::from_orthonormal(4, vec![e0.clone(), e1.clone()]).unwrap();
        let b = Subspace::from_orthonormal(4, vec![e0, e1]).unwrap();
        assert!(matches!(
            complement_projectors(&a, &b),
            Err(Error::NotADirectSum { .. })
        ));
    }

    #[test]
    fn signature_cases() {
        let id = LinOp::identity(4);
        assert_eq!(
            signature_of(&id, 1e-10).unwrap(),
            Signature {
                positive: 4,
                negative: 0,
                zero: 0
            }
        );
        let mut d = RMat::identity(8, 8);
        for k in 4..8 {
            d[(k, k)] = -1.0;
        }
        let sig = signature_of(&LinOp::from_real_matrix(&d), 1e-10).unwrap();
        assert_eq!(
            sig,
            Signature {
                positive: 4,
                negative: 4,
                zero: 0
            }
        );
    }

    #[test]
    fn signature_rejects_nonsymmetric() {
        let mut m = RMat::identity(4, 4);
        m[(0, 1)] = 0.5;
        assert!(signature_of(&LinOp::from_real_matrix(&m), 1e-10).is_err());
    }
}
