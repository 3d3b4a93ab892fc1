//! Per-point constructions: the sphere of complex structures, families of
//! holomorphic symplectic forms, the graph map, the reconstructed metric,
//! rotation frames, and twistor-line sections.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::{
    complement_projectors, conj_vec, extreme_singular_values, interior, max_abs, max_abs_vec,
    nullspace, signature_of, wedge_pairing, CMat, CVec, LinOp, Signature, Subspace, TwoForm,
};
use crate::tolerances;
use crate::twistor::{stereographic, TwistorParam};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Three anticommuting complex structures satisfying
/// `J_a J_b = eps_abc J_c - delta_ab`.
#[derive(Debug, Clone)]
pub struct QuaternionicTriple {
    j1: LinOp,
    j2: LinOp,
    j3: LinOp,
}

impl QuaternionicTriple {
    /// Wraps three real operators after verifying the quaternion relations.
    pub fn new(j1: LinOp, j2: LinOp, j3: LinOp, tol: f64) -> Result<Self> {
        let t = QuaternionicTriple { j1, j2, j3 };
        let res = t.quaternion_residual();
        if res > tol {
            return Err(Error::InconsistentStructure {
                check: "quaternion relations".into(),
                residual: res,
                tol,
            });
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.j1.dim()
    }

    pub fn j(&self, alpha: usize) -> &LinOp {
        match alpha {
            1 => &self.j1,
            2 => &self.j2,
            3 => &self.j3,
            _ => panic!("structure index must be 1, 2 or 3"),
        }
    }

    pub fn j1(&self) -> &LinOp {
        &self.j1
    }

    pub fn j2(&self) -> &LinOp {
        &self.j2
    }

    pub fn j3(&self) -> &LinOp {
        &self.j3
    }

    /// Max residual over all nine products `J_a J_b - eps_abc J_c + delta_ab`.
    pub fn quaternion_residual(&self) -> f64 {
        let n = self.dim();
        let id = CMat::identity(n, n);
        let js = [&self.j1, &self.j2, &self.j3];
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let prod = js[a].matrix() * js[b].matrix();
                let expect = if a == b {
                    -&id
                } else {
                    // eps: (0,1)->+J3, (1,2)->+J1, (2,0)->+J2, antisymmetric
                    let (g, sign) = match (a, b) {
                        (0, 1) => (2, 1.0),
                        (1, 0) => (2, -1.0),
                        (1, 2) => (0, 1.0),
                        (2, 1) => (0, -1.0),
                        (2, 0) => (1, 1.0),
                        (0, 2) => (1, -1.0),
                        _ => unreachable!(),
                    };
                    js[g].matrix() * c64(sign, 0.0)
                };
                worst = worst.max(max_abs(&(prod - expect)));
            }
        }
        worst
    }

    /// The complex structure over a sphere point,
    /// `J = c_1 J_1 + c_2 J_2 + c_3 J_3` with `c` the stereographic unit
    /// vector of `zeta`.
    pub fn complex_structure_at(&self, zeta: &TwistorParam) -> LinOp {
        let c = stereographic(zeta);
        let m = self.j1.matrix() * c64(c[0], 0.0)
            + self.j2.matrix() * c64(c[1], 0.0)
            + self.j3.matrix() * c64(c[2], 0.0);
        LinOp::try_real(m, 1e-14).expect("real combination of real operators")
    }
}

/// Three real symplectic forms attached to a quaternionic triple.
#[derive(Debug, Clone)]
pub struct SymplecticTriple {
    w1: TwoForm,
    w2: TwoForm,
    w3: TwoForm,
}

impl SymplecticTriple {
    pub fn new(w1: TwoForm, w2: TwoForm, w3: TwoForm, reality_tol: f64) -> Result<Self> {
        for (name, w) in [("w1", &w1), ("w2", &w2), ("w3", &w3)] {
            if !w.is_real(reality_tol) {
                return Err(Error::Input(format!("symplectic form {name} is not real")));
            }
        }
        if w1.dim() != w2.dim() || w2.dim() != w3.dim() {
            return Err(Error::Input("symplectic triple dimension mismatch".into()));
        }
        Ok(SymplecticTriple { w1, w2, w3 })
    }

    pub fn w(&self, alpha: usize) -> &TwoForm {
        match alpha {
            1 => &self.w1,
            2 => &self.w2,
            3 => &self.w3,
            _ => panic!("form index must be 1, 2 or 3"),
        }
    }

    pub fn w1(&self) -> &TwoForm {
        &self.w1
    }

    pub fn w2(&self) -> &TwoForm {
        &self.w2
    }

    pub fn w3(&self) -> &TwoForm {
        &self.w3
    }
}

/// The pair `(omega_plus, omega_3)` generating the whole sphere of forms at
/// one point.
#[derive(Debug, Clone)]
pub struct HoloSympFamily {
    omega_plus: TwoForm,
    omega_3: TwoForm,
}

impl HoloSympFamily {
    /// Builds a family, requiring `omega_3` real to `reality_tol` and
    /// matching dimensions divisible by four. Whether `omega_plus` really is
    /// a holomorphic symplectic form is checked by [`holosymp_check`] and by
    /// the constructions that need it.
    pub fn new(omega_plus: TwoForm, omega_3: TwoForm, reality_tol: f64) -> Result<Self> {
        if omega_plus.dim() != omega_3.dim() {
            return Err(Error::Input("family forms dimension mismatch".into()));
        }
        if !omega_plus.dim().is_multiple_of(4) || omega_plus.dim() == 0 {
            return Err(Error::Input(format!(
                "family dimension must be a positive multiple of 4, got {}",
                omega_plus.dim()
            )));
        }
        if !omega_3.is_real(reality_tol) {
            return Err(Error::Input("omega_3 must be a real form".into()));
        }
        Ok(HoloSympFamily {
            omega_plus,
            omega_3: omega_3.real_part(),
        })
    }

    pub fn dim(&self) -> usize {
        self.omega_plus.dim()
    }

    pub fn quaternionic_rank(&self) -> usize {
        self.dim() / 4
    }

    pub fn omega_plus(&self) -> &TwoForm {
        &self.omega_plus
    }

    pub fn omega_3(&self) -> &TwoForm {
        &self.omega_3
    }

    pub fn omega_minus(&self) -> TwoForm {
        self.omega_plus.conjugate()
    }

    /// The family member at `zeta`:
    /// `-(i/2 zeta) omega_+ + omega_3 - (i/2) zeta omega_-` for finite
    /// nonzero `zeta`; at the poles it returns the line-bundle fiber
    /// representative (`omega_+` at 0, `omega_-` at infinity) rather than
    /// attempting the divergent sum.
    pub fn form_at(&self, zeta: &TwistorParam) -> TwoForm {
        match zeta {
            TwistorParam::Infinity => self.omega_minus(),
            TwistorParam::Finite(z) if z.norm() == 0.0 => self.omega_plus.clone(),
            TwistorParam::Finite(z) => {
                let a = -I / (2.0 * z);
                let b = -I * z / 2.0;
                self.omega_plus
                    .scaled(a)
                    .add(&self.omega_3)
                    .add(&self.omega_minus().scaled(b))
            }
        }
    }
}

/// Report of the two-part holomorphic symplectic criterion.
#[derive(Debug, Clone)]
pub struct HolosympReport {
    /// `|W^r ^ conj(W)^r|` against the volume element.
    pub wedge_volume: f64,
    pub kernel_dim: usize,
    pub required_kernel_dim: usize,
    pub passes: bool,
}

/// Checks that a 2-form on a `4r`-space is holomorphic symplectic:
/// `W^r ^ conj(W)^r` does not vanish and `dim ker W >= 2r`.
pub fn holosymp_check(omega: &TwoForm, r: usize, tol: f64) -> Result<HolosympReport> {
    let n = omega.dim();
    if n != 4 * r {
        return Err(Error::Input(format!(
            "holomorphic symplectic check needs dim = 4r, got dim {n} with r = {r}"
        )));
    }
    let vol = wedge_pairing(omega, r, &omega.conjugate(), r)?.norm();
    let kernel_dim = nullspace(omega, tolerances::RANK_REL)?.dim();
    Ok(HolosympReport {
        wedge_volume: vol,
        kernel_dim,
        required_kernel_dim: 2 * r,
        passes: vol > tol && kernel_dim >= 2 * r,
    })
}

/// Spectral projectors of a real complex structure onto its `+i` and `-i`
/// eigenspaces.
pub fn eigenspace_projectors(j: &LinOp) -> (LinOp, LinOp) {
    let n = j.dim();
    let id = CMat::identity(n, n);
    let plus = (&id - j.matrix() * I) * c64(0.5, 0.0);
    let minus = (&id + j.matrix() * I) * c64(0.5, 0.0);
    (LinOp::from_complex(plus), LinOp::from_complex(minus))
}

/// The unique complex structure for which a holomorphic symplectic form has
/// kernel equal to the antiholomorphic tangent space:
/// `J = i P_{ker conj(W)} - i P_{ker W}`.
pub fn complex_structure_from_form(omega: &TwoForm, rank_rel_tol: f64) -> Result<LinOp> {
    let ker = nullspace(omega, rank_rel_tol)?;
    let ker_bar = nullspace(&omega.conjugate(), rank_rel_tol)?;
    let (p_ker, p_ker_bar) = complement_projectors(&ker, &ker_bar)?;
    let j = (p_ker_bar.matrix() - p_ker.matrix()) * I;
    let scale = max_abs(&j).max(1.0);
    let j = LinOp::try_real(j, tolerances::OPERATOR_REAL * scale)?;
    let sq = j.square_residual();
    if sq > 1e-10 {
        return Err(Error::InconsistentStructure {
            check: "complex structure squares to -1".into(),
            residual: sq,
            tol: 1e-10,
        });
    }
    Ok(j)
}

/// Residual of the frame factorization of the family form,
/// `W(zeta) = -(i/2 zeta) omega_+((1 - zeta J_1) ., (1 - zeta J_1) .)`,
/// for finite nonzero `zeta`.
pub fn frame_factorization_residual(
    family: &HoloSympFamily,
    j1: &LinOp,
    zeta: Complex64,
) -> Result<f64> {
    if zeta.norm() == 0.0 {
        return Err(Error::Input(
            "frame factorization residual needs finite nonzero zeta".into(),
        ));
    }
    let n = family.dim();
    let frame = CMat::identity(n, n) - j1.matrix() * zeta;
    let pulled = frame.transpose() * family.omega_plus().matrix() * &frame * (-I / (2.0 * zeta));
    let direct = family.form_at(&TwistorParam::Finite(zeta));
    Ok(max_abs(&(direct.matrix() - pulled)))
}

/// The isomorphism `1 + zeta J_1` between antiholomorphic tangent spaces at
/// 0 and at `zeta`, together with its inverse.
///
/// Away from `zeta = +-i` the inverse is the global operator
/// `(1 - zeta J_1)/(1 + zeta^2)`; near those points it switches to
/// `(1 + i zeta J_2)/(1 - zeta^2)`, which inverts the frame map on the
/// antiholomorphic subspace only.
pub fn frame_map(triple: &QuaternionicTriple, zeta: Complex64) -> (LinOp, LinOp) {
    let n = triple.dim();
    let id = CMat::identity(n, n);
    let fwd = &id + triple.j1().matrix() * zeta;
    let d1 = 1.0 + zeta * zeta;
    let inv = if d1.norm() > 1e-6 * (1.0 + zeta.norm_sqr()) {
        (&id - triple.j1().matrix() * zeta) / d1
    } else {
        let d2 = 1.0 - zeta * zeta;
        (&id + triple.j2().matrix() * (I * zeta)) / d2
    };
    (LinOp::from_complex(fwd), LinOp::from_complex(inv))
}

/// Internal: least-squares machinery for solving
/// `iota_u omega_+ = rhs` with `u` constrained to the holomorphic subspace.
struct GraphSolver {
    /// columns: `iota_{u_j} omega_+` for the holomorphic basis `u_j`
    svd: nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    smax: f64,
    plus_basis: CMat,
}

impl GraphSolver {
    fn new(family: &HoloSympFamily, plus: &Subspace) -> Result<Self> {
        let n = family.dim();
        let mut s = CMat::zeros(n, plus.dim());
        for (j, u) in plus.basis().iter().enumerate() {
            s.set_column(j, &interior(family.omega_plus(), u)?);
        }
        let (smin, smax) = extreme_singular_values(&s);
        if smax == 0.0 || smin <= tolerances::RANK_REL * smax {
            return Err(Error::Degenerate {
                what: "omega_plus on the holomorphic tangent space".into(),
                smin,
            });
        }
        let svd = s.clone().svd(true, true);
        Ok(GraphSolver {
            svd,
            smax,
            plus_basis: plus.basis_matrix(),
        })
    }

    /// Solves for the holomorphic vector with the given interior product,
    /// rejecting right sides outside the admissible range.
    fn solve(&self, rhs: &CVec) -> Result<CVec> {
        let coeff = self
            .svd
            .solve(rhs, self.smax * 1e-13)
            .map_err(|e| Error::Input(format!("graph-map least squares failed: {e}")))?;
        let coeff = CVec::from_column_slice(coeff.as_slice());
        let u = &self.plus_basis * &coeff;
        Ok(u)
    }
}

/// Builds the real operator whose `zeta`-scaled graph over the
/// antiholomorphic tangent space is the kernel of the family form at `zeta`.
///
/// On the antiholomorphic side it is defined by
/// `iota_{K v} omega_+ = -2i iota_v omega_3` and extended to a real operator
/// by conjugation; the companion identity
/// `iota_{K v} omega_3 = (i/2) iota_v omega_-` is verified and failures are
/// rejected as inconsistent families.
pub fn graph_map_from_family(family: &HoloSympFamily) -> Result<LinOp> {
    let n = family.dim();
    let r = family.quaternionic_rank();
    let minus = nullspace(family.omega_plus(), tolerances::RANK_REL)?;
    let plus = nullspace(&family.omega_minus(), tolerances::RANK_REL)?;
    if minus.dim() != 2 * r || plus.dim() != 2 * r {
        return Err(Error::InconsistentFamily {
            check: format!(
                "kernel dimensions ({}, {}) of omega_plus and its conjugate",
                minus.dim(),
                plus.dim()
            ),
            residual: minus.dim().abs_diff(2 * r) as f64,
            tol: 0.0,
        });
    }

    // omega_3 as a map from the antiholomorphic side to holomorphic covectors
    let mut pairing = CMat::zeros(2 * r, 2 * r);
    for (a, v) in minus.basis().iter().enumerate() {
        for (b, u) in plus.basis().iter().enumerate() {
            pairing[(a, b)] = family.omega_3().apply(v, u);
        }
    }
    let (smin, smax) = extreme_singular_values(&pairing);
    if smax == 0.0 || smin <= tolerances::RANK_REL * smax {
        return Err(Error::Degenerate {
            what: "omega_3 between the kernel splitting".into(),
            smin,
        });
    }

    let solver = GraphSolver::new(family, &plus)?;
    let omega_minus = family.omega_minus();
    let mut images: Vec<CVec> = Vec::with_capacity(2 * r);
    for v in minus.basis() {
        let rhs = interior(family.omega_3(), v)? * c64(0.0, -2.0);
        let u = solver.solve(&rhs)?;
        let solve_res = max_abs_vec(&(interior(family.omega_plus(), &u)? - &rhs));
        let scale = max_abs_vec(&rhs).max(1.0);
        if solve_res > tolerances::SOLVE_RESIDUAL_REL * scale {
            return Err(Error::InconsistentFamily {
                check: "defining relation of the graph map".into(),
                residual: solve_res,
                tol: tolerances::SOLVE_RESIDUAL_REL * scale,
            });
        }
        let companion = max_abs_vec(
            &(interior(family.omega_3(), &u)? - interior(&omega_minus, v)? * (I / 2.0)),
        );
        if companion > tolerances::ALGEBRA * scale {
            return Err(Error::InconsistentFamily {
                check: "companion identity of the graph map".into(),
                residual: companion,
                tol: tolerances::ALGEBRA * scale,
            });
        }
        images.push(u);
    }

    // Extend to a real operator: K maps conj(v) to conj(K v).
    let mut basis = CMat::zeros(n, n);
    let mut image = CMat::zeros(n, n);
    for (k, (v, u)) in minus.basis().iter().zip(&images).enumerate() {
        basis.set_column(k, v);
        basis.set_column(2 * r + k, &conj_vec(v));
        image.set_column(k, u);
        image.set_column(2 * r + k, &conj_vec(u));
    }
    let inv = basis.lu().try_inverse().ok_or(Error::Degenerate {
        what: "kernel splitting basis".into(),
        smin: 0.0,
    })?;
    let kappa = image * inv;
    let scale = max_abs(&kappa).max(1.0);
    LinOp::try_real(kappa, tolerances::OPERATOR_REAL * scale)
}

/// Residual of the companion identity of the graph map,
/// `iota_{K v} omega_3 = (i/2) iota_v omega_-`, over the kernel basis.
pub fn graph_map_companion_residual(family: &HoloSympFamily, kappa: &LinOp) -> Result<f64> {
    let minus = nullspace(family.omega_plus(), tolerances::RANK_REL)?;
    let omega_minus = family.omega_minus();
    let mut worst: f64 = 0.0;
    for v in minus.basis() {
        let u = kappa.matrix() * v;
        let res = max_abs_vec(
            &(interior(family.omega_3(), &u)? - interior(&omega_minus, v)? * (I / 2.0)),
        );
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Max residual of the scaling law for the graph map: solving the defining
/// relation with right side scaled by `zeta` must scale the solution by
/// `zeta`.
pub fn graph_map_linearity_residual(family: &HoloSympFamily, zetas: &[Complex64]) -> Result<f64> {
    for z in zetas {
        if z.norm() == 0.0 {
            return Err(Error::Input(
                "graph-map linearity samples must be nonzero".into(),
            ));
        }
    }
    let r = family.quaternionic_rank();
    let minus = nullspace(family.omega_plus(), tolerances::RANK_REL)?;
    let plus = nullspace(&family.omega_minus(), tolerances::RANK_REL)?;
    if minus.dim() != 2 * r || plus.dim() != 2 * r {
        return Err(Error::InconsistentFamily {
            check: "kernel dimensions".into(),
            residual: minus.dim() as f64,
            tol: (2 * r) as f64,
        });
    }
    let solver = GraphSolver::new(family, &plus)?;
    let mut base: Vec<CVec> = Vec::new();
    for v in minus.basis() {
        let rhs = interior(family.omega_3(), v)? * c64(0.0, -2.0);
        base.push(solver.solve(&rhs)?);
    }
    let mut worst: f64 = 0.0;
    for z in zetas {
        for (v, u1) in minus.basis().iter().zip(&base) {
            let rhs = interior(family.omega_3(), v)? * (c64(0.0, -2.0) * z);
            let uz = solver.solve(&rhs)?;
            worst = worst.max(max_abs_vec(&(uz - u1 * *z)));
        }
    }
    Ok(worst)
}

/// Builds the full quaternionic triple of a family: the distinguished
/// structure from the kernel splitting of `omega_plus`, the graph map, and
/// their product.
pub fn triple_from_family(family: &HoloSympFamily, tol: f64) -> Result<QuaternionicTriple> {
    let j3 = complex_structure_from_form(family.omega_plus(), tolerances::RANK_REL)?;
    let j1 = graph_map_from_family(family)?;
    let j2 = j3.compose(&j1);
    let t = QuaternionicTriple { j1, j2, j3 };
    let res = t.quaternion_residual();
    if res > tol {
        return Err(Error::InconsistentFamily {
            check: "quaternion relations of the reconstructed triple".into(),
            residual: res,
            tol,
        });
    }
    Ok(t)
}

/// Type and nondegeneracy diagnostics for the real member of a family.
#[derive(Debug, Clone)]
pub struct Omega3TypeReport {
    /// `|omega_3(J_3 ., J_3 .) - omega_3|`: distance from type (1,1).
    pub type_residual: f64,
    /// `|omega_+^r ^ omega_3|` on 4-dimensional charts, where the wedge is
    /// top degree; `None` otherwise.
    pub wedge_plus: Option<f64>,
    /// Same with `omega_-`.
    pub wedge_minus: Option<f64>,
    /// Smallest singular value of `omega_3`.
    pub smallest_singular_value: f64,
}

/// Reports how far `omega_3` is from a nondegenerate (1,1)-form for the
/// given structure.
pub fn omega3_type_check(family: &HoloSympFamily, j3: &LinOp) -> Result<Omega3TypeReport> {
    let w3 = family.omega_3().matrix();
    let rotated = j3.matrix().transpose() * w3 * j3.matrix();
    let type_residual = max_abs(&(rotated - w3));
    let (wedge_plus, wedge_minus) = if family.dim() == 4 {
        let wp = wedge_pairing(family.omega_plus(), 1, family.omega_3(), 1)?.norm();
        let wm = wedge_pairing(&family.omega_minus(), 1, family.omega_3(), 1)?.norm();
        (Some(wp), Some(wm))
    } else {
        (None, None)
    };
    let (smin, _) = extreme_singular_values(w3);
    Ok(Omega3TypeReport {
        type_residual,
        wedge_plus,
        wedge_minus,
        smallest_singular_value: smin,
    })
}

/// A complete pointwise structure: triple, metric, signature and the three
/// real symplectic forms.
#[derive(Debug, Clone)]
pub struct PointStructure {
    pub triple: QuaternionicTriple,
    pub metric: LinOp,
    pub signature: Signature,
    pub sympl: SymplecticTriple,
}

impl PointStructure {
    /// Max residual of the three compatibility statements over all three
    /// structures: `w_a = J_a' g`, `g = w_a J_a`, and `J_a = -g^{-1} w_a`.
    pub fn compatibility_residual(&self) -> Result<f64> {
        let g = self.metric.matrix();
        let g_inv = g.clone().lu().try_inverse().ok_or(Error::Degenerate {
            what: "metric".into(),
            smin: 0.0,
        })?;
        let mut worst: f64 = 0.0;
        for alpha in 1..=3 {
            let w = self.sympl.w(alpha).matrix();
            let j = self.triple.j(alpha).matrix();
            worst = worst.max(max_abs(&(w - j.transpose() * g)));
            worst = worst.max(max_abs(&(g - w * j)));
            worst = worst.max(max_abs(&(j + &g_inv * w)));
        }
        Ok(worst)
    }
}

/// Reconstructs the full pointwise structure from a family: triple, metric
/// `g = (omega_+(., J_1 .) - omega_+(J_1 ., .)) / 2`, and the symplectic
/// forms `(Re omega_+, Im omega_+, omega_3)`.
///
/// Cross-checks the alternative metric expressions through the family at
/// `-1` and `-i`, the compatibility relations, and the recovery formulas
/// `J_3 = -w_1^{-1} w_2`, `g = -w_3 w_1^{-1} w_2`.
pub fn metric_from_family(family: &HoloSympFamily, tol: f64) -> Result<PointStructure> {
    let triple = triple_from_family(family, tol)?;
    let wp = family.omega_plus().matrix();
    let j1 = triple.j1().matrix();

    let g_raw = (wp * j1 - j1.transpose() * wp) * c64(0.5, 0.0);
    let scale = max_abs(&g_raw).max(1.0);
    let metric = LinOp::try_real(g_raw, tolerances::OPERATOR_REAL * scale)?;
    let gr = metric.real_matrix();
    let sym_dev = (&gr - gr.transpose())
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if sym_dev > 1e-10 * scale {
        return Err(Error::InconsistentFamily {
            check: "symmetry of the reconstructed metric".into(),
            residual: sym_dev,
            tol: 1e-10 * scale,
        });
    }

    // The same bilinear form reached through the family at -1 and -i, and
    // through the real and imaginary parts of omega_plus directly.
    let g = metric.matrix();
    let at_m1 = family.form_at(&TwistorParam::new(-1.0, 0.0));
    let at_mi = family.form_at(&TwistorParam::new(0.0, -1.0));
    let chain = [
        at_m1.imag_part().matrix() * triple.j1().matrix(),
        at_mi.imag_part().matrix() * triple.j2().matrix(),
        at_m1.real_part().matrix() * triple.j3().matrix(),
        family.omega_plus().real_part().matrix() * triple.j1().matrix(),
        family.omega_plus().imag_part().matrix() * triple.j2().matrix(),
    ];
    let mut chain_res: f64 = 0.0;
    for expr in &chain {
        chain_res = chain_res.max(max_abs(&(expr - g)));
    }
    if chain_res > tol * scale {
        return Err(Error::InconsistentFamily {
            check: "metric identity chain".into(),
            residual: chain_res,
            tol: tol * scale,
        });
    }

    let sympl = SymplecticTriple::new(
        family.omega_plus().real_part(),
        family.omega_plus().imag_part(),
        family.omega_3().clone(),
        tolerances::REALITY * scale,
    )?;

    let signature = signature_of(&metric, tolerances::RANK_REL)?;
    if signature.zero != 0 {
        return Err(Error::InconsistentStructure {
            check: "metric nondegeneracy".into(),
            residual: signature.zero as f64,
            tol: 0.0,
        });
    }
    if signature.positive % 4 != 0 || signature.negative % 4 != 0 {
        return Err(Error::InconsistentStructure {
            check: format!("signature {signature} must have both counts divisible by 4"),
            residual: (signature.positive % 4 + signature.negative % 4) as f64,
            tol: 0.0,
        });
    }

    let structure = PointStructure {
        triple,
        metric,
        signature,
        sympl,
    };
    let compat = structure.compatibility_residual()?;
    if compat > tol * scale {
        return Err(Error::InconsistentFamily {
            check: "metric compatibility".into(),
            residual: compat,
            tol: tol * scale,
        });
    }

    // Recovery through the forms alone.
    let w1_inv = structure
        .sympl
        .w1()
        .matrix()
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Degenerate {
            what: "omega_1".into(),
            smin: 0.0,
        })?;
    let j3_rec = -(&w1_inv * structure.sympl.w2().matrix());
    let g_rec = -(structure.sympl.w3().matrix() * &w1_inv * structure.sympl.w2().matrix());
    let rec_res = max_abs(&(&j3_rec - structure.triple.j3().matrix()))
        .max(max_abs(&(&g_rec - structure.metric.matrix())));
    if rec_res > tol * scale {
        return Err(Error::InconsistentFamily {
            check: "recovery formulas".into(),
            residual: rec_res,
            tol: tol * scale,
        });
    }

    Ok(structure)
}

/// Forward direction of the round trip: reads `(omega_1 + i omega_2, omega_3)`
/// off a compatible pair of triples.
pub fn extract_family(
    triple: &QuaternionicTriple,
    sympl: &SymplecticTriple,
) -> Result<HoloSympFamily> {
    // mutual compatibility: all three w_a J_a must express the same metric
    let g1 = sympl.w1().matrix() * triple.j1().matrix();
    let g2 = sympl.w2().matrix() * triple.j2().matrix();
    let g3 = sympl.w3().matrix() * triple.j3().matrix();
    let scale = max_abs(&g1).max(1.0);
    let dev = max_abs(&(&g1 - &g2)).max(max_abs(&(&g1 - &g3)));
    if dev > tolerances::COMPAT * scale {
        return Err(Error::Input(format!(
            "triple and symplectic forms are not compatible: metric expressions differ by {dev:.3e}"
        )));
    }
    let omega_plus = sympl.w1().add(&sympl.w2().scaled(I));
    HoloSympFamily::new(omega_plus, sympl.w3().clone(), tolerances::REALITY * scale)
}

/// A rotated orthogonal frame `(K, I)` completing the structure at `zeta`.
#[derive(Debug, Clone)]
pub struct RotationFrame {
    pub k: LinOp,
    pub i: LinOp,
    /// Frame angle in `[0, pi)`.
    pub theta: f64,
}

/// The SO(3) matrix of the sphere rotation induced by a unit pair `(u, v)`,
/// acting on stereographic unit vectors.
#[allow(clippy::needless_range_loop)]
fn so3_from_su2(u: Complex64, v: Complex64) -> [[f64; 3]; 3] {
    let a = [[u, v], [-v.conj(), u.conj()]];
    let a_inv = [[u.conj(), -v], [v.conj(), u]];
    let mut r = [[0.0; 3]; 3];
    for beta in 0..3 {
        // X(e_beta)
        let x = match beta {
            0 => [
                [c64(0.0, 0.0), c64(1.0, 0.0)],
                [c64(-1.0, 0.0), c64(0.0, 0.0)],
            ],
            1 => [
                [c64(0.0, 0.0), c64(0.0, 1.0)],
                [c64(0.0, 1.0), c64(0.0, 0.0)],
            ],
            _ => [
                [c64(0.0, 1.0), c64(0.0, 0.0)],
                [c64(0.0, 0.0), c64(0.0, -1.0)],
            ],
        };
        // m = a * x * a_inv
        let mut ax = [[c64(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                ax[i][j] = a[i][0] * x[0][j] + a[i][1] * x[1][j];
            }
        }
        let mut m = [[c64(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = ax[i][0] * a_inv[0][j] + ax[i][1] * a_inv[1][j];
            }
        }
        let c1 = (m[0][1] - m[1][0]) / 2.0;
        let c2 = (m[0][1] + m[1][0]) / (2.0 * I);
        let c3 = m[0][0] / I;
        r[0][beta] = c1.re;
        r[1][beta] = c2.re;
        r[2][beta] = c3.re;
    }
    r
}

/// A rotation frame together with the residuals of the identities it must
/// satisfy.
#[derive(Debug, Clone)]
pub struct RotationFrameReport {
    pub frame: RotationFrame,
    /// Quaternion-relation residual of `(K, I, J at zeta)`.
    pub quaternion_residual: f64,
    /// Residual of `(|z| + |z|^{-1})^{-1} W(zeta) = (w_K + i w_I)/2`.
    pub rescale_residual: f64,
    /// Residual of the metric pairing
    /// `(|z| + |z|^{-1})^{-1} W(zeta)(v, K x) = g(v, x)` over seeded samples.
    pub pairing_residual: f64,
}

/// Computes the rotation frame at finite nonzero `zeta` and the residuals of
/// its defining identities, without enforcing thresholds.
///
/// The angle comes in closed form from the phase condition
/// `e^{2 i theta} = |zeta| / (i zeta)`, folded into `[0, pi)`; the whole
/// decomposition is then verified globally.
pub fn rotation_frame_report(
    triple: &QuaternionicTriple,
    sympl: &SymplecticTriple,
    zeta: Complex64,
) -> Result<RotationFrameReport> {
    if zeta.norm() == 0.0 {
        return Err(Error::Input(
            "rotation frame needs finite nonzero zeta".into(),
        ));
    }
    let mut theta = (-std::f64::consts::FRAC_PI_2 - zeta.arg()) / 2.0;
    theta = theta.rem_euclid(std::f64::consts::PI);
    if theta >= std::f64::consts::PI {
        theta -= std::f64::consts::PI;
    }

    let root = (1.0 + zeta.norm_sqr()).sqrt();
    let phase = Complex64::from_polar(1.0, theta);
    let u = phase / root;
    let v = -zeta * phase / root;
    let r = so3_from_su2(u, v);

    let combine_op = |row: &[f64; 3]| {
        let m = triple.j1().matrix() * c64(row[0], 0.0)
            + triple.j2().matrix() * c64(row[1], 0.0)
            + triple.j3().matrix() * c64(row[2], 0.0);
        LinOp::try_real(m, 1e-12).expect("real combination")
    };
    let combine_form = |row: &[f64; 3]| {
        sympl
            .w1()
            .scaled(c64(row[0], 0.0))
            .add(&sympl.w2().scaled(c64(row[1], 0.0)))
            .add(&sympl.w3().scaled(c64(row[2], 0.0)))
    };
    let k_op = combine_op(&r[0]);
    let i_op = combine_op(&r[1]);
    let j_zeta = triple.complex_structure_at(&TwistorParam::Finite(zeta));

    let quaternion_residual = QuaternionicTriple {
        j1: k_op.clone(),
        j2: i_op.clone(),
        j3: j_zeta.clone(),
    }
    .quaternion_residual();

    // rescaled decomposition
    let family = extract_family(triple, sympl)?;
    let varpi = family.form_at(&TwistorParam::Finite(zeta));
    let lam = 1.0 / (zeta.norm() + 1.0 / zeta.norm());
    let w_k = combine_form(&r[0]);
    let w_i = combine_form(&r[1]);
    let decomposed = w_k.add(&w_i.scaled(I)).scaled(c64(0.5, 0.0));
    let rescale_residual = max_abs(&(varpi.matrix() * c64(lam, 0.0) - decomposed.matrix()));

    // metric pairing on sampled holomorphic/antiholomorphic pairs
    let g = sympl.w1().matrix() * triple.j1().matrix();
    let (p_plus, p_minus) = eigenspace_projectors(&j_zeta);
    let mut rng = ChaCha8Rng::seed_from_u64(0x686f6c6f47);
    let n = triple.dim();
    let mut pairing_residual: f64 = 0.0;
    for _ in 0..8 {
        let raw_v = random_cvec(&mut rng, n);
        let raw_x = random_cvec(&mut rng, n);
        let hv = p_plus.apply(&raw_v);
        let ax = p_minus.apply(&raw_x);
        let lhs = varpi.apply(&hv, &(k_op.matrix() * &ax)) * lam;
        let rhs = (&g * &ax).dot(&hv); // g(hv, ax) = hv^T g ax
        pairing_residual = pairing_residual.max((lhs - rhs).norm());
    }

    Ok(RotationFrameReport {
        frame: RotationFrame {
            k: k_op,
            i: i_op,
            theta,
        },
        quaternion_residual,
        rescale_residual,
        pairing_residual,
    })
}

/// Rotation frame at finite nonzero `zeta`, with every identity enforced at
/// the given tolerance.
pub fn rotation_frame(
    triple: &QuaternionicTriple,
    sympl: &SymplecticTriple,
    zeta: Complex64,
    tol: f64,
) -> Result<RotationFrame> {
    let report = rotation_frame_report(triple, sympl, zeta)?;
    for (check, residual, bound) in [
        (
            "rotated frame quaternion relations",
            report.quaternion_residual,
            tol,
        ),
        (
            "rescaled family-form decomposition",
            report.rescale_residual,
            tol,
        ),
        (
            "metric pairing through the rotated frame",
            report.pairing_residual,
            tol * 10.0,
        ),
    ] {
        if residual > bound {
            return Err(Error::InconsistentStructure {
                check: check.into(),
                residual,
                tol: bound,
            });
        }
    }
    Ok(report.frame)
}

/// A real holomorphic twistor-line section through a point, in both the
/// polynomial trivialization (`v`) and as a tangent vector (`s`).
#[derive(Debug, Clone)]
pub struct RealSection {
    /// `v(zeta) = a - zeta J_1 conj(a)`, degree-1 in `zeta`; at infinity the
    /// leading coefficient `-J_1 conj(a)`.
    pub v: CVec,
    /// `s(zeta) = (1 + conj(zeta) J_1) v(zeta) / (1 + |zeta|^2)`; at infinity
    /// `conj(a)`.
    pub s: CVec,
}

fn section_pair(triple: &QuaternionicTriple, a: &CVec, zeta: &TwistorParam) -> (CVec, CVec) {
    let j1 = triple.j1().matrix();
    let ja_bar = j1 * conj_vec(a);
    match zeta {
        TwistorParam::Infinity => {
            let v = -&ja_bar;
            let s = conj_vec(a);
            (v, s)
        }
        TwistorParam::Finite(z) => {
            let v = a - &ja_bar * *z;
            let s = (&v + j1 * &v * z.conj()) / c64(1.0 + z.norm_sqr(), 0.0);
            (v, s)
        }
    }
}

/// Evaluates the real holomorphic section determined by a holomorphic
/// tangent vector `a` (an `+i` eigenvector of `J_3`).
///
/// Verifies that `s(zeta)` is holomorphic for the structure at `zeta` and
/// satisfies the reality condition `conj(s(-1/conj zeta)) = s(zeta)`.
pub fn real_section(
    triple: &QuaternionicTriple,
    a: &CVec,
    zeta: &TwistorParam,
) -> Result<RealSection> {
    let scale = max_abs_vec(a);
    let type_res = max_abs_vec(&(triple.j3().matrix() * a - a * I));
    if type_res > 1e-10 * scale.max(1.0) {
        return Err(Error::Input(format!(
            "section seed must be a holomorphic tangent vector; J_3 eigen-residual {type_res:.3e}"
        )));
    }
    let (v, s) = section_pair(triple, a, zeta);
    if scale > 0.0 {
        let j_zeta = triple.complex_structure_at(zeta);
        let holo_res = max_abs_vec(&(j_zeta.matrix() * &s - &s * I));
        if holo_res > 1e-9 * scale.max(1.0) {
            return Err(Error::InconsistentStructure {
                check: "section membership in the holomorphic tangent space".into(),
                residual: holo_res,
                tol: 1e-9 * scale.max(1.0),
            });
        }
        let (_, s_anti) = section_pair(triple, a, &zeta.antipode());
        let reality = max_abs_vec(&(conj_vec(&s_anti) - &s));
        if reality > 1e-9 * scale.max(1.0) {
            return Err(Error::InconsistentStructure {
                check: "section reality".into(),
                residual: reality,
                tol: 1e-9 * scale.max(1.0),
            });
        }
    }
    Ok(RealSection { v, s })
}

/// The section-space bilinear form of the Hitchin-Karlhede-Lindstrom-Rocek
/// construction evaluated on two holomorphic tangent vectors:
/// `(omega_+(a, J_1 conj b) - omega_+(J_1 conj a, b)) / 2`.
pub fn hklr_metric_with(
    omega_plus: &TwoForm,
    j1: &LinOp,
    j3: &LinOp,
    a: &CVec,
    b: &CVec,
) -> Result<f64> {
    for (name, x) in [("a", a), ("b", b)] {
        let res = max_abs_vec(&(j3.matrix() * x - x * I));
        if res > 1e-10 * max_abs_vec(x).max(1.0) {
            return Err(Error::Input(format!(
                "{name} must be a holomorphic tangent vector; eigen-residual {res:.3e}"
            )));
        }
    }
    let ja = j1.matrix() * conj_vec(a);
    let jb = j1.matrix() * conj_vec(b);
    let value = (omega_plus.apply(a, &jb) - omega_plus.apply(&ja, b)) * c64(0.5, 0.0);
    let scale = max_abs_vec(a).max(max_abs_vec(b)).max(1.0);
    if value.im.abs() > 1e-10 * scale * scale {
        return Err(Error::InconsistentStructure {
            check: "realness of the section-space metric".into(),
            residual: value.im.abs(),
            tol: 1e-10 * scale * scale,
        });
    }
    Ok(value.re)
}

/// Same as [`hklr_metric_with`], deriving the triple from the family.
pub fn hklr_metric(family: &HoloSympFamily, a: &CVec, b: &CVec) -> Result<f64> {
    let triple = triple_from_family(family, tolerances::QUATERNION)?;
    hklr_metric_with(family.omega_plus(), triple.j1(), triple.j3(), a, b)
}

/// Fit diagnostics for the section pairing along the sphere.
#[derive(Debug, Clone)]
pub struct SectionPairingReport {
    /// Max deviation of held-out nodes from the quadratic through the first
    /// three nodes.
    pub fit_residual: f64,
    /// Max deviation of the pairing from `omega_+(v_a(zeta), v_b(zeta))`.
    pub identity_residual: f64,
    /// Constant coefficient of the fitted quadratic (the limit at 0).
    pub constant_coefficient: Complex64,
    /// `omega_+(a, b)` for comparison against the constant coefficient.
    pub omega_plus_ab: Complex64,
}

/// Checks that `P(zeta) = 2 i zeta W(zeta)(s_a(zeta), s_b(zeta))` is a
/// degree-2 polynomial: fits through the first three nodes and reports the
/// extrapolation residual at the held-out nodes, together with the identity
/// `P(zeta) = omega_+(v_a(zeta), v_b(zeta))`.
pub fn o2_polynomial_check(
    family: &HoloSympFamily,
    a: &CVec,
    b: &CVec,
    nodes: &[Complex64],
) -> Result<SectionPairingReport> {
    if nodes.len() < 4 {
        return Err(Error::Input("need at least 4 sampling nodes".into()));
    }
    for (k, z) in nodes.iter().enumerate() {
        if z.norm() == 0.0 {
            return Err(Error::Input("sampling nodes must be finite nonzero".into()));
        }
        for w in &nodes[..k] {
            if (z - w).norm() == 0.0 {
                return Err(Error::Input("sampling nodes must be distinct".into()));
            }
        }
    }
    let triple = triple_from_family(family, tolerances::QUATERNION)?;
    let mut values: Vec<Complex64> = Vec::with_capacity(nodes.len());
    let mut identity_residual: f64 = 0.0;
    for z in nodes {
        let zp = TwistorParam::Finite(*z);
        let sa = real_section(&triple, a, &zp)?;
        let sb = real_section(&triple, b, &zp)?;
        let w = family.form_at(&zp);
        let p = w.apply(&sa.s, &sb.s) * (2.0 * I * z);
        let direct = family.omega_plus().apply(&sa.v, &sb.v);
        identity_residual = identity_residual.max((p - direct).norm());
        values.push(p);
    }
    // Lagrange quadratic through the first three nodes.
    let (z0, z1, z2) = (nodes[0], nodes[1], nodes[2]);
    let (p0, p1, p2) = (values[0], values[1], values[2]);
    let mut c0 = Complex64::new(0.0, 0.0);
    let mut c1 = Complex64::new(0.0, 0.0);
    let mut c2 = Complex64::new(0.0, 0.0);
    for (zk, pk, za, zb) in [(z0, p0, z1, z2), (z1, p1, z0, z2), (z2, p2, z0, z1)] {
        let d = (zk - za) * (zk - zb);
        let w = pk / d;
        c2 += w;
        c1 -= w * (za + zb);
        c0 += w * za * zb;
    }
    let mut fit_residual: f64 = 0.0;
    for (z, p) in nodes.iter().zip(&values).skip(3) {
        let fitted = c0 + c1 * z + c2 * z * z;
        fit_residual = fit_residual.max((p - fitted).norm());
    }
    Ok(SectionPairingReport {
        fit_residual,
        identity_residual,
        constant_coefficient: c0,
        omega_plus_ab: family.omega_plus().apply(a, b),
    })
}

/// `|J at the antipode + J at zeta|`: the antipodal map conjugates the
/// complex structure.
pub fn antipodal_structure_residual(triple: &QuaternionicTriple, zeta: &TwistorParam) -> f64 {
    let a = triple.complex_structure_at(zeta);
    let b = triple.complex_structure_at(&zeta.antipode());
    max_abs(&(a.matrix() + b.matrix()))
}

/// `|conj(W(antipode)) - W(zeta)|`: reality of the family.
pub fn family_reality_residual(family: &HoloSympFamily, zeta: &TwistorParam) -> f64 {
    let direct = family.form_at(zeta);
    let conj_anti = family.form_at(&zeta.antipode()).conjugate();
    max_abs(&(conj_anti.matrix() - direct.matrix()))
}

/// Kernel dimension of the family form at `zeta`.
pub fn kernel_dimension_of_family(
    family: &HoloSympFamily,
    zeta: &TwistorParam,
    rank_rel_tol: f64,
) -> Result<usize> {
    Ok(nullspace(&family.form_at(zeta), rank_rel_tol)?.dim())
}

/// Residual of the graph property: on the kernel of the family form at
/// `zeta`, the holomorphic projection equals `zeta` times the graph map of
/// the antiholomorphic projection.
pub fn graph_property_residual(
    family: &HoloSympFamily,
    kappa: &LinOp,
    j3: &LinOp,
    zeta: Complex64,
    rank_rel_tol: f64,
) -> Result<f64> {
    let ker = nullspace(&family.form_at(&TwistorParam::Finite(zeta)), rank_rel_tol)?;
    let (p_plus, p_minus) = eigenspace_projectors(j3);
    let mut worst: f64 = 0.0;
    for w in ker.basis() {
        let lhs = p_plus.apply(w);
        let rhs = kappa.matrix() * p_minus.apply(w) * zeta;
        worst = worst.max(max_abs_vec(&(lhs - rhs)));
    }
    Ok(worst)
}

/// Random complex vector with entries uniform in the unit square, for seeded
/// sampling in tests and sweeps.
pub fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Seeded sphere samples with modulus log-uniform in `[1e-2, 1e2]` and
/// uniform phase; avoids the poles where the family switches to the fiber
/// convention.
pub fn sample_zetas(seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let log_mod = rng.gen_range(-2.0f64..2.0f64);
            let phase = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
            Complex64::from_polar(10f64.powf(log_mod), phase)
        })
        .collect()
}

/// A holomorphic random tangent vector for the structure `j`, produced by
/// projecting a random vector onto the `+i` eigenspace.
pub fn random_holomorphic(rng: &mut ChaCha8Rng, j: &LinOp) -> CVec {
    let (p_plus, _) = eigenspace_projectors(j);
    p_plus.apply(&random_cvec(rng, j.dim()))
}
