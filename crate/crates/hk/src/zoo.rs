//! Built-in exactly known models used as oracles by tests and the CLI.
//!
//! Three families ship:
//!
//! - `flat`: r copies of the standard constant quaternionic block on R^{4r},
//!   normalized so the metric is exactly the identity;
//! - `flat-split`: blocks with all three forms negated, flipping the metric
//!   sign blockwise while preserving the quaternion relations;
//! - multi-center models from the Gibbons-Hawking ansatz (`taub-nut`,
//!   `eguchi-hanson`, `gibbons-hawking`): a harmonic potential
//!   `V = eps + sum m_i / |x - p_i|` on coordinates `(t, x, y, z)` and a
//!   connection one-form `A` with `dA = *dV`, giving
//!   `w_a = (dt + A) ^ dx^a + (V/2) eps_abc dx^b ^ dx^c`.
//!
//! The connection is summed in the per-center Dirac gauge whose string runs
//! down the `-z` half-line below each center; charts must avoid the centers
//! and the strings, and construction fails loudly if they do not. No gauge
//! patching is attempted.
//!
//! Every model self-validates at load (closedness numerically, quaternion
//! relations, metric signature) so downstream tests can trust it
//! unconditionally.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::chart::{closedness_sweep_real, ChartSpec, FamilyField, FdOrder, FormField};
use crate::error::{Error, Result};
use crate::forms::{LinOp, RMat, Signature, TwoForm};
use crate::pointwise::QuaternionicTriple;
use crate::tolerances;

/// One source of the multi-center potential.
#[derive(Debug, Clone, PartialEq)]
pub struct GhCenter {
    pub position: [f64; 3],
    pub mass: f64,
}

/// Parameters of a Gibbons-Hawking model: constant term and centers, stored
/// in a canonical order so permuted inputs produce identical fields.
#[derive(Debug, Clone, PartialEq)]
pub struct GhParams {
    pub epsilon: f64,
    pub centers: Vec<GhCenter>,
}

impl GhParams {
    pub fn new(epsilon: f64, mut centers: Vec<GhCenter>) -> Result<Self> {
        if epsilon < 0.0 || !epsilon.is_finite() {
            return Err(Error::Input("epsilon must be finite and >= 0".into()));
        }
        if centers.is_empty() && epsilon == 0.0 {
            return Err(Error::Input(
                "the potential needs epsilon > 0 or at least one center".into(),
            ));
        }
        for c in &centers {
            if c.mass <= 0.0 || !c.mass.is_finite() {
                return Err(Error::Input("center masses must be positive".into()));
            }
            if c.position.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("center positions must be finite".into()));
            }
        }
        centers.sort_by(|a, b| {
            let ka = (a.position[2], a.position[1], a.position[0], a.mass);
            let kb = (b.position[2], b.position[1], b.position[0], b.mass);
            ka.partial_cmp(&kb).unwrap()
        });
        Ok(GhParams { epsilon, centers })
    }
}

/// Potential `V = eps + sum m_i / |x - p_i|`.
pub fn gh_potential(p: &GhParams, xyz: [f64; 3]) -> Result<f64> {
    let mut v = p.epsilon;
    for c in &p.centers {
        let d = [
            xyz[0] - c.position[0],
            xyz[1] - c.position[1],
            xyz[2] - c.position[2],
        ];
        let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if rho < 1e-9 {
            return Err(Error::Input(format!(
                "evaluation point {xyz:?} coincides with a center"
            )));
        }
        v += c.mass / rho;
    }
    Ok(v)
}

/// Connection components `(A_x, A_y, A_z)` in the fixed per-center Dirac
/// gauge `A_i = m (1 - dz/rho) (dx dy - dy dx) / (dx^2 + dy^2)`, singular on
/// the `-z` half-line below each center.
pub fn gh_connection(p: &GhParams, xyz: [f64; 3]) -> Result<[f64; 3]> {
    let mut a = [0.0f64; 3];
    for c in &p.centers {
        let dx = xyz[0] - c.position[0];
        let dy = xyz[1] - c.position[1];
        let dz = xyz[2] - c.position[2];
        let rho = (dx * dx + dy * dy + dz * dz).sqrt();
        let rho_xy2 = dx * dx + dy * dy;
        if rho < 1e-9 || rho_xy2 < 1e-18 {
            return Err(Error::Input(format!(
                "evaluation point {xyz:?} lies on a center or Dirac string"
            )));
        }
        let factor = c.mass * (1.0 - dz / rho) / rho_xy2;
        a[0] += -factor * dy;
        a[1] += factor * dx;
    }
    Ok(a)
}

/// The three model 2-forms on coordinates `(t, x, y, z)`:
/// `w_a = (dt + A) ^ dx^a + (V/2) eps_abc dx^b ^ dx^c`, `which` in 1..=3.
pub fn gh_form(p: &GhParams, which: usize, xyz: [f64; 3]) -> Result<RMat> {
    let v = gh_potential(p, xyz)?;
    let a = gh_connection(p, xyz)?;
    let mut m = RMat::zeros(4, 4);
    let mut set = |i: usize, j: usize, val: f64| {
        m[(i, j)] += val;
        m[(j, i)] -= val;
    };
    match which {
        1 => {
            set(0, 1, 1.0);
            set(1, 2, -a[1]);
            set(1, 3, -a[2]);
            set(2, 3, v);
        }
        2 => {
            set(0, 2, 1.0);
            set(1, 2, a[0]);
            set(2, 3, -a[2]);
            set(1, 3, -v);
        }
        3 => {
            set(0, 3, 1.0);
            set(1, 3, a[0]);
            set(2, 3, a[1]);
            set(1, 2, v);
        }
        _ => return Err(Error::Input("form index must be 1, 2 or 3".into())),
    }
    Ok(m)
}

/// The model metric `g = V^{-1} (dt + A)^2 + V (dx^2 + dy^2 + dz^2)`.
pub fn gh_metric(p: &GhParams, xyz: [f64; 3]) -> Result<RMat> {
    let v = gh_potential(p, xyz)?;
    let a = gh_connection(p, xyz)?;
    let e = [1.0, a[0], a[1], a[2]];
    let mut g = RMat::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            g[(i, j)] = e[i] * e[j] / v;
        }
    }
    for i in 1..4 {
        g[(i, i)] += v;
    }
    Ok(g)
}

/// How a model stores its exact ground truth.
#[derive(Debug, Clone)]
enum Truth {
    Constant { j: [RMat; 3], g: RMat },
    GibbonsHawking(GhParams),
}

/// A built-in model: chart, family of form fields, exact ground truth, and
/// the signature it must exhibit.
#[derive(Debug, Clone)]
pub struct ZooModel {
    name: String,
    r: usize,
    chart: ChartSpec,
    family: FamilyField,
    truth: Truth,
    expected_signature: Signature,
    /// Parameters for serialization as a builtin structure file.
    builtin_params: BTreeMap<String, f64>,
}

impl ZooModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quaternionic_rank(&self) -> usize {
        self.r
    }

    pub fn chart(&self) -> &ChartSpec {
        &self.chart
    }

    pub fn family_field(&self) -> &FamilyField {
        &self.family
    }

    pub fn expected_signature(&self) -> Signature {
        self.expected_signature
    }

    pub fn builtin_params(&self) -> &BTreeMap<String, f64> {
        &self.builtin_params
    }

    /// The three real symplectic forms at a chart point.
    pub fn symplectic_at(&self, x: &[f64]) -> Result<(TwoForm, TwoForm, TwoForm)> {
        match &self.family {
            FamilyField::Triple { w1, w2, w3 } => Ok((
                w1.eval(&self.chart, x)?,
                w2.eval(&self.chart, x)?,
                w3.eval(&self.chart, x)?,
            )),
            FamilyField::PlusThree { plus, w3 } => {
                let p = plus.eval(&self.chart, x)?;
                Ok((p.real_part(), p.imag_part(), w3.eval(&self.chart, x)?))
            }
        }
    }

    /// Ground-truth triple and metric at a chart point.
    pub fn truth_at(&self, x: &[f64]) -> Result<(QuaternionicTriple, LinOp)> {
        if !self.chart.contains(x) {
            return Err(Error::OutOfBox(x.to_vec()));
        }
        match &self.truth {
            Truth::Constant { j, g } => {
                let triple = QuaternionicTriple::new(
                    LinOp::from_real_matrix(&j[0]),
                    LinOp::from_real_matrix(&j[1]),
                    LinOp::from_real_matrix(&j[2]),
                    1e-12,
                )?;
                Ok((triple, LinOp::from_real_matrix(g)))
            }
            Truth::GibbonsHawking(p) => {
                let xyz = [x[1], x[2], x[3]];
                let g = gh_metric(p, xyz)?;
                let g_inv = g.clone().try_inverse().ok_or(Error::Degenerate {
                    what: "model metric".into(),
                    smin: 0.0,
                })?;
                let j = |alpha: usize| -> Result<LinOp> {
                    let w = gh_form(p, alpha, xyz)?;
                    Ok(LinOp::from_real_matrix(&(-(&g_inv * w))))
                };
                let triple = QuaternionicTriple::new(j(1)?, j(2)?, j(3)?, tolerances::QUATERNION)?;
                Ok((triple, LinOp::from_real_matrix(&g)))
            }
        }
    }
}

/// The standard constant block forms on one `(x0, x1, x2, x3)` factor:
/// `w1 = e0^e1 + e2^e3`, `w2 = e0^e2 + e3^e1`, `w3 = e0^e3 + e1^e2`.
fn standard_block() -> [RMat; 3] {
    let mut w1 = RMat::zeros(4, 4);
    let mut w2 = RMat::zeros(4, 4);
    let mut w3 = RMat::zeros(4, 4);
    let set = |m: &mut RMat, i: usize, j: usize| {
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
    };
    set(&mut w1, 0, 1);
    set(&mut w1, 2, 3);
    set(&mut w2, 0, 2);
    set(&mut w2, 3, 1);
    set(&mut w3, 0, 3);
    set(&mut w3, 1, 2);
    [w1, w2, w3]
}

fn block_diag(blocks: &[&RMat]) -> RMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = RMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                out[(off + i, off + j)] = b[(i, j)];
            }
        }
        off += b.nrows();
    }
    out
}

fn constant_model(
    name: &str,
    signs: &[f64],
    expected_signature: Signature,
    builtin_params: BTreeMap<String, f64>,
) -> Result<ZooModel> {
    let r = signs.len();
    let block = standard_block();
    let mut w = Vec::new();
    for base in &block {
        let scaled: Vec<RMat> = signs.iter().map(|&s| base * s).collect();
        let refs: Vec<&RMat> = scaled.iter().collect();
        w.push(block_diag(&refs));
    }
    let g_blocks: Vec<RMat> = signs.iter().map(|&s| RMat::identity(4, 4) * s).collect();
    let g_refs: Vec<&RMat> = g_blocks.iter().collect();
    let g = block_diag(&g_refs);
    let g_inv = g.clone().try_inverse().expect("diagonal sign matrix");
    let j: Vec<RMat> = (0..3).map(|alpha| -(&g_inv * &w[alpha])).collect();

    // quaternion relations verified at load
    let triple = QuaternionicTriple::new(
        LinOp::from_real_matrix(&j[0]),
        LinOp::from_real_matrix(&j[1]),
        LinOp::from_real_matrix(&j[2]),
        1e-12,
    )?;
    drop(triple);

    let chart = ChartSpec::unit_box(4 * r);
    let family = FamilyField::Triple {
        w1: FormField::Constant(TwoForm::new(w[0].map(|v| Complex64::new(v, 0.0)))?),
        w2: FormField::Constant(TwoForm::new(w[1].map(|v| Complex64::new(v, 0.0)))?),
        w3: FormField::Constant(TwoForm::new(w[2].map(|v| Complex64::new(v, 0.0)))?),
    };
    Ok(ZooModel {
        name: name.into(),
        r,
        chart,
        family,
        truth: Truth::Constant {
            j: [j[0].clone(), j[1].clone(), j[2].clone()],
            g,
        },
        expected_signature,
        builtin_params,
    })
}

/// Flat model: `r` standard blocks, identity metric, signature `(4r, 0)`.
pub fn flat_hk(r: usize) -> Result<ZooModel> {
    if r < 1 {
        return Err(Error::Input("flat model needs r >= 1".into()));
    }
    let mut params = BTreeMap::new();
    params.insert("r".to_string(), r as f64);
    constant_model(
        "flat",
        &vec![1.0; r],
        Signature {
            positive: 4 * r,
            negative: 0,
            zero: 0,
        },
        params,
    )
}

/// Split model: `r_plus` standard blocks and `r_minus` blocks with all three
/// forms negated, giving signature `(4 r_plus, 4 r_minus)`.
pub fn flat_split(r_plus: usize, r_minus: usize) -> Result<ZooModel> {
    if r_plus + r_minus < 1 {
        return Err(Error::Input(
            "split model needs r_plus + r_minus >= 1".into(),
        ));
    }
    let mut signs = vec![1.0; r_plus];
    signs.extend(vec![-1.0; r_minus]);
    let mut params = BTreeMap::new();
    params.insert("r_plus".to_string(), r_plus as f64);
    params.insert("r_minus".to_string(), r_minus as f64);
    constant_model(
        "flat-split",
        &signs,
        Signature {
            positive: 4 * r_plus,
            negative: 4 * r_minus,
            zero: 0,
        },
        params,
    )
}

/// Distance from an axis-aligned 3-box to a point.
fn box_point_distance(b: &[[f64; 2]; 3], p: &[f64; 3]) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let d = (b[k][0] - p[k]).max(p[k] - b[k][1]).max(0.0);
        d2 += d * d;
    }
    d2.sqrt()
}

/// Distance from an axis-aligned 3-box to the `-z` half-line below `p`.
fn box_string_distance(b: &[[f64; 2]; 3], p: &[f64; 3]) -> f64 {
    let dx = (b[0][0] - p[0]).max(p[0] - b[0][1]).max(0.0);
    let dy = (b[1][0] - p[1]).max(p[1] - b[1][1]).max(0.0);
    // the string covers z <= p_z
    let dz = (b[2][0] - p[2]).max(0.0);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Multi-center model on a chart `(t, x, y, z)`. The chart box must stay
/// clear of every center and every Dirac string; the model self-validates
/// closedness, quaternion relations and signature over its grid before it is
/// returned.
pub fn gibbons_hawking(epsilon: f64, centers: Vec<GhCenter>, chart: ChartSpec) -> Result<ZooModel> {
    gibbons_hawking_named("gibbons-hawking", epsilon, centers, chart)
}

fn gibbons_hawking_named(
    name: &str,
    epsilon: f64,
    centers: Vec<GhCenter>,
    chart: ChartSpec,
) -> Result<ZooModel> {
    let params = GhParams::new(epsilon, centers)?;
    if chart.dim() != 4 {
        return Err(Error::Input(
            "Gibbons-Hawking charts are 4-dimensional (t, x, y, z)".into(),
        ));
    }
    let spatial: [[f64; 2]; 3] = [chart.bounds[1], chart.bounds[2], chart.bounds[3]];
    for c in &params.centers {
        if box_point_distance(&spatial, &c.position) < 1e-9 {
            return Err(Error::Input(format!(
                "chart box intersects the center at {:?}",
                c.position
            )));
        }
        if box_string_distance(&spatial, &c.position) < 1e-9 {
            return Err(Error::Input(format!(
                "chart box intersects the Dirac string below {:?}",
                c.position
            )));
        }
    }

    let family = FamilyField::Triple {
        w1: FormField::Builtin {
            params: params.clone(),
            which: 1,
        },
        w2: FormField::Builtin {
            params: params.clone(),
            which: 2,
        },
        w3: FormField::Builtin {
            params: params.clone(),
            which: 3,
        },
    };

    let mut builtin_params = BTreeMap::new();
    builtin_params.insert("epsilon".to_string(), params.epsilon);
    builtin_params.insert("n_centers".to_string(), params.centers.len() as f64);
    for (k, c) in params.centers.iter().enumerate() {
        builtin_params.insert(format!("mass_{k}"), c.mass);
        builtin_params.insert(format!("center_{k}_x"), c.position[0]);
        builtin_params.insert(format!("center_{k}_y"), c.position[1]);
        builtin_params.insert(format!("center_{k}_z"), c.position[2]);
    }

    let model = ZooModel {
        name: name.into(),
        r: 1,
        chart,
        family,
        truth: Truth::GibbonsHawking(params),
        expected_signature: Signature {
            positive: 4,
            negative: 0,
            zero: 0,
        },
        builtin_params,
    };
    model.self_validate()?;
    Ok(model)
}

impl ZooModel {
    /// Load-time validation: closedness of all three forms (numerically for
    /// closed-form fields), quaternion relations of the derived triple, and
    /// the expected metric signature at every grid point.
    fn self_validate(&self) -> Result<()> {
        for (alpha, field) in match &self.family {
            FamilyField::Triple { w1, w2, w3 } => vec![(1, w1), (2, w2), (3, w3)],
            FamilyField::PlusThree { .. } => vec![],
        } {
            let outcome = closedness_sweep_real(
                field,
                &self.chart,
                tolerances::FD_STEP_CLOSEDNESS,
                FdOrder::Second,
            )?;
            if outcome.worst > 1e-6 {
                return Err(Error::InconsistentStructure {
                    check: format!("closedness of w{alpha}"),
                    residual: outcome.worst,
                    tol: 1e-6,
                });
            }
        }
        for x in self.chart.grid_points() {
            let (triple, g) = self.truth_at(&x)?;
            let res = triple.quaternion_residual();
            if res > tolerances::QUATERNION {
                return Err(Error::InconsistentStructure {
                    check: "model quaternion relations".into(),
                    residual: res,
                    tol: tolerances::QUATERNION,
                });
            }
            let sig = crate::forms::signature_of(&g, tolerances::RANK_REL)?;
            if sig != self.expected_signature {
                return Err(Error::InconsistentStructure {
                    check: format!(
                        "model signature {sig} differs from expected {}",
                        self.expected_signature
                    ),
                    residual: 1.0,
                    tol: 0.0,
                });
            }
        }
        Ok(())
    }
}

/// Names of the shipped models.
pub fn list_models() -> Vec<&'static str> {
    vec![
        "eguchi-hanson",
        "flat",
        "flat-split",
        "gibbons-hawking",
        "taub-nut",
    ]
}

fn get_param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn get_count(params: &BTreeMap<String, f64>, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(&v) => {
            if v.fract() != 0.0 || !(0.0..=64.0).contains(&v) {
                return Err(Error::Input(format!(
                    "parameter {key} must be a small nonnegative integer, got {v}"
                )));
            }
            Ok(v as usize)
        }
    }
}

/// The default Taub-NUT chart: `t` in `[0, 1]`, spatial box `[1, 2]^3`,
/// clear of the center at the origin and its string.
fn default_gh_chart() -> ChartSpec {
    ChartSpec::new(
        vec!["t".into(), "x".into(), "y".into(), "z".into()],
        vec![[0.0, 1.0], [1.0, 2.0], [1.0, 2.0], [1.0, 2.0]],
        vec![3, 3, 3, 3],
    )
    .expect("static chart")
}

/// Retrieves a shipped model by name with deterministic parameter
/// defaulting. Unknown names and unknown parameter keys are rejected.
pub fn get_model(name: &str, params: &BTreeMap<String, f64>) -> Result<ZooModel> {
    let allowed: &[&str] = match name {
        "flat" => &["r"],
        "flat-split" => &["r_plus", "r_minus"],
        "taub-nut" => &["epsilon", "mass"],
        "eguchi-hanson" => &["mass", "separation"],
        "gibbons-hawking" => &["epsilon", "mass", "n_centers", "spacing"],
        _ => {
            return Err(Error::Input(format!(
                "unknown model '{name}'; shipped models: {}",
                list_models().join(", ")
            )))
        }
    };
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Input(format!(
                "unknown parameter '{key}' for model '{name}'"
            )));
        }
    }
    match name {
        "flat" => flat_hk(get_count(params, "r", 1)?),
        "flat-split" => flat_split(
            get_count(params, "r_plus", 1)?,
            get_count(params, "r_minus", 1)?,
        ),
        "taub-nut" => gibbons_hawking_named(
            "taub-nut",
            get_param(params, "epsilon", 1.0),
            vec![GhCenter {
                position: [0.0, 0.0, 0.0],
                mass: get_param(params, "mass", 0.5),
            }],
            default_gh_chart(),
        ),
        "eguchi-hanson" => {
            let mass = get_param(params, "mass", 0.5);
            let sep = get_param(params, "separation", 1.0);
            gibbons_hawking_named(
                "eguchi-hanson",
                0.0,
                vec![
                    GhCenter {
                        position: [0.0, 0.0, -sep / 2.0],
                        mass,
                    },
                    GhCenter {
                        position: [0.0, 0.0, sep / 2.0],
                        mass,
                    },
                ],
                default_gh_chart(),
            )
        }
        "gibbons-hawking" => {
            let n = get_count(params, "n_centers", 1)?.max(1);
            let mass = get_param(params, "mass", 0.5);
            let spacing = get_param(params, "spacing", 1.0);
            let centers = (0..n)
                .map(|k| GhCenter {
                    position: [k as f64 * spacing, 0.0, 0.0],
                    mass,
                })
                .collect();
            gibbons_hawking_named(
                "gibbons-hawking",
                get_param(params, "epsilon", 1.0),
                centers,
                ChartSpec::new(
                    vec!["t".into(), "x".into(), "y".into(), "z".into()],
                    vec![
                        [0.0, 1.0],
                        [
                            1.0 + (n as f64 - 1.0) * spacing,
                            2.0 + (n as f64 - 1.0) * spacing,
                        ],
                        [1.0, 2.0],
                        [1.0, 2.0],
                    ],
                    vec![3, 3, 3, 3],
                )?,
            )
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::max_abs;

    #[test]
    fn flat_models_load_and_normalize() {
        let m = flat_hk(1).unwrap();
        let (triple, g) = m.truth_at(&[0.0; 4]).unwrap();
        assert!(triple.quaternion_residual() < 1e-15);
        assert!(max_abs(&(g.matrix() - CMatId(4))) < 1e-15);
        let m2 = flat_hk(2).unwrap();
        assert_eq!(m2.quaternionic_rank(), 2);
        let (t2, _) = m2.truth_at(&[0.0; 8]).unwrap();
        assert!(t2.quaternion_residual() < 1e-15);
        // two identical blocks
        let j1 = t2.j1().real_matrix();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(j1[(i, j)], j1[(4 + i, 4 + j)]);
                assert_eq!(j1[(i, 4 + j)], 0.0);
            }
        }
    }

    #[allow(non_snake_case)]
    fn CMatId(n: usize) -> crate::forms::CMat {
        crate::forms::CMat::identity(n, n)
    }

    #[test]
    fn split_model_signature_and_reduction() {
        let m = flat_split(1, 1).unwrap();
        assert_eq!(
            m.expected_signature(),
            Signature {
                positive: 4,
                negative: 4,
                zero: 0
            }
        );
        let (triple, g) = m.truth_at(&[0.0; 8]).unwrap();
        assert!(triple.quaternion_residual() < 1e-15);
        let sig = crate::forms::signature_of(&g, 1e-10).unwrap();
        assert_eq!(sig, m.expected_signature());
        // r_minus = 0 reduces to the flat model
        let m0 = flat_split(1, 0).unwrap();
        let (w1a, _, _) = m0.symplectic_at(&[0.0; 4]).unwrap();
        let flat = flat_hk(1).unwrap();
        let (w1b, _, _) = flat.symplectic_at(&[0.0; 4]).unwrap();
        assert!(max_abs(&(w1a.matrix() - w1b.matrix())) < 1e-15);
    }

    #[test]
    fn gh_connection_satisfies_curl_identity() {
        // dA = *dV componentwise by central differences
        let p = GhParams::new(
            1.0,
            vec![GhCenter {
                position: [0.0, 0.0, 0.0],
                mass: 0.5,
            }],
        )
        .unwrap();
        let x = [1.3, 1.6, 1.1];
        let h = 1e-5;
        let partial_a = |axis: usize, comp: usize| -> f64 {
            let mut xp = x;
            xp[axis] += h;
            let mut xm = x;
            xm[axis] -= h;
            (gh_connection(&p, xp).unwrap()[comp] - gh_connection(&p, xm).unwrap()[comp])
                / (2.0 * h)
        };
        let partial_v = |axis: usize| -> f64 {
            let mut xp = x;
            xp[axis] += h;
            let mut xm = x;
            xm[axis] -= h;
            (gh_potential(&p, xp).unwrap() - gh_potential(&p, xm).unwrap()) / (2.0 * h)
        };
        // dA components: (dA)_{xy} = dA_y/dx - dA_x/dy etc.
        // closedness of the model forms needs dA = -*dV in right-handed
        // orientation, i.e. (dA)_{yz} = -V_x, (dA)_{zx} = -V_y, (dA)_{xy} = -V_z
        let da_yz = partial_a(1, 2) - partial_a(2, 1);
        let da_zx = partial_a(2, 0) - partial_a(0, 2);
        let da_xy = partial_a(0, 1) - partial_a(1, 0);
        assert!((da_yz + partial_v(0)).abs() < 1e-8, "yz: {da_yz}");
        assert!((da_zx + partial_v(1)).abs() < 1e-8, "zx: {da_zx}");
        assert!((da_xy + partial_v(2)).abs() < 1e-8, "xy: {da_xy}");
    }

    #[test]
    fn taub_nut_self_validates() {
        let params = BTreeMap::new();
        let m = get_model("taub-nut", &params).unwrap();
        assert_eq!(m.name(), "taub-nut");
        let x = m.chart().midpoint();
        let (triple, g) = m.truth_at(&x).unwrap();
        assert!(triple.quaternion_residual() < 1e-12);
        let sig = crate::forms::signature_of(&g, 1e-10).unwrap();
        assert_eq!(
            sig,
            Signature {
                positive: 4,
                negative: 0,
                zero: 0
            }
        );
    }

    #[test]
    fn constant_potential_reduces_to_flat() {
        // no centers, eps = 1: A = 0 and the forms are the flat ones
        let p = GhParams::new(1.0, vec![]).unwrap();
        let flat = flat_hk(1).unwrap();
        let (w1, w2, w3) = flat.symplectic_at(&[0.0; 4]).unwrap();
        for (alpha, w) in [(1, w1), (2, w2), (3, w3)] {
            let m = gh_form(&p, alpha, [1.5, 1.5, 1.5]).unwrap();
            let diff = (&m.map(|v| Complex64::new(v, 0.0)) - w.matrix())
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15, "form {alpha} differs by {diff}");
        }
    }

    #[test]
    fn center_permutation_gives_identical_fields() {
        let c1 = GhCenter {
            position: [0.0, 0.0, 0.0],
            mass: 0.5,
        };
        let c2 = GhCenter {
            position: [0.5, 0.0, 0.25],
            mass: 0.75,
        };
        let a = GhParams::new(0.5, vec![c1.clone(), c2.clone()]).unwrap();
        let b = GhParams::new(0.5, vec![c2, c1]).unwrap();
        assert_eq!(a, b);
        let x = [1.4, 1.2, 1.9];
        for alpha in 1..=3 {
            let ma = gh_form(&a, alpha, x).unwrap();
            let mb = gh_form(&b, alpha, x).unwrap();
            assert_eq!(ma, mb);
        }
    }

    #[test]
    fn chart_through_string_rejected() {
        let chart = ChartSpec::new(
            vec!["t".into(), "x".into(), "y".into(), "z".into()],
            vec![[0.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [-3.0, -2.0]],
            vec![3; 4],
        )
        .unwrap();
        // the box straddles x = y = 0 at z < 0: on the string
        let err = gibbons_hawking(
            1.0,
            vec![GhCenter {
                position: [0.0, 0.0, 0.0],
                mass: 0.5,
            }],
            chart,
        );
        assert!(err.is_err());
    }

    #[test]
    fn unknown_model_and_params_rejected() {
        let params = BTreeMap::new();
        assert!(get_model("k3", &params).is_err());
        let mut bad = BTreeMap::new();
        bad.insert("curvature".to_string(), 1.0);
        assert!(get_model("flat", &bad).is_err());
    }

    #[test]
    fn mass_scaling_keeps_signature() {
        // scaling all masses and epsilon by lambda scales V linearly; the
        // model must still verify end to end with unchanged signature
        for lambda in [1.0, 2.5] {
            let mut params = BTreeMap::new();
            params.insert("epsilon".to_string(), lambda);
            params.insert("mass".to_string(), 0.5 * lambda);
            let m = get_model("taub-nut", &params).unwrap();
            assert_eq!(
                m.expected_signature(),
                Signature {
                    positive: 4,
                    negative: 0,
                    zero: 0
                }
            );
            let report = crate::chart::verify_chart(
                m.family_field(),
                m.chart(),
                &crate::chart::VerifyConfig::default(),
            )
            .unwrap();
            assert!(report.aggregate_pass, "lambda = {lambda}");
            let sig = report.check("signature_constant").unwrap();
            assert_eq!(sig.detail.as_deref(), Some("signature (4, 0, 0)"));
        }
    }
}
