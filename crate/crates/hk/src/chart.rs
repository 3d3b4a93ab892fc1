//! Coordinate-chart machinery: form fields over a box, exterior derivatives,
//! closedness and integrability sweeps, and whole-chart verification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{max_abs, CMat, RMat, Signature, TwoForm};
use crate::pointwise::{
    antipodal_structure_residual, family_reality_residual, graph_property_residual, holosymp_check,
    kernel_dimension_of_family, metric_from_family, omega3_type_check, rotation_frame_report,
    sample_zetas, HoloSympFamily, PointStructure, QuaternionicTriple,
};
use crate::tolerances;
use crate::twistor::TwistorParam;
use crate::zoo::{self, GhParams, ZooModel};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A rectangular coordinate chart with a regular evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub coords: Vec<String>,
    /// Per-axis closed interval `[lo, hi]`.
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    /// Per-axis sample count, at least 3.
    pub grid: Vec<usize>,
}

impl ChartSpec {
    pub fn new(coords: Vec<String>, bounds: Vec<[f64; 2]>, grid: Vec<usize>) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || bounds.len() != dim || grid.len() != dim {
            return Err(Error::Input(
                "chart coords, box and grid must have equal nonzero length".into(),
            ));
        }
        for (axis, b) in bounds.iter().enumerate() {
            if !b[0].is_finite() || !b[1].is_finite() || b[0] >= b[1] {
                return Err(Error::Input(format!(
                    "chart box axis {axis} must be a nondegenerate finite interval"
                )));
            }
        }
        for (axis, &g) in grid.iter().enumerate() {
            if g < 3 {
                return Err(Error::Input(format!(
                    "chart grid axis {axis} needs at least 3 samples, got {g}"
                )));
            }
        }
        Ok(ChartSpec {
            coords,
            bounds,
            grid,
        })
    }

    /// A default chart for constant structures: `[-1, 1]^dim`, 3 samples per
    /// axis.
    pub fn unit_box(dim: usize) -> Self {
        ChartSpec {
            coords: (0..dim).map(|k| format!("x{k}")).collect(),
            bounds: vec![[-1.0, 1.0]; dim],
            grid: vec![3; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(&xi, b)| xi >= b[0] - 1e-12 && xi <= b[1] + 1e-12)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect()
    }

    /// All grid points in row-major order (last axis fastest).
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let total: usize = self.grid.iter().product();
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut x = vec![0.0; dim];
            for axis in (0..dim).rev() {
                let g = self.grid[axis];
                let idx = rem % g;
                rem /= g;
                let b = self.bounds[axis];
                x[axis] = b[0] + (b[1] - b[0]) * idx as f64 / (g - 1) as f64;
            }
            out.push(x);
        }
        out
    }

    /// Grid points at distance at least `margin` from every box face.
    pub fn interior_points(&self, margin: f64) -> Vec<Vec<f64>> {
        self.grid_points()
            .into_iter()
            .filter(|x| {
                x.iter()
                    .zip(&self.bounds)
                    .all(|(&xi, b)| xi - b[0] >= margin && b[1] - xi >= margin)
            })
            .collect()
    }

    /// Grid refined by the given factor on each axis (for pole probing).
    pub fn refined(&self, factor: usize) -> ChartSpec {
        ChartSpec {
            coords: self.coords.clone(),
            bounds: self.bounds.clone(),
            grid: self.grid.iter().map(|g| (g - 1) * factor + 1).collect(),
        }
    }
}

/// A multivariate polynomial with complex coefficients: a list of
/// `(coefficient, exponent tuple)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub terms: Vec<(Complex64, Vec<u32>)>,
}

impl Poly {
    pub fn constant(c: Complex64, dim: usize) -> Self {
        Poly {
            terms: vec![(c, vec![0; dim])],
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = c64(0.0, 0.0);
        for (c, exps) in &self.terms {
            let mut mono = 1.0;
            for (&xi, &e) in x.iter().zip(exps) {
                mono *= xi.powi(e as i32);
            }
            acc += c * mono;
        }
        acc
    }

    /// Exact partial derivative along one axis.
    pub fn derivative(&self, axis: usize) -> Poly {
        let mut terms = Vec::new();
        for (c, exps) in &self.terms {
            let e = exps[axis];
            if e > 0 {
                let mut de = exps.clone();
                de[axis] = e - 1;
                terms.push((c * e as f64, de));
            }
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.norm() == 0.0)
    }
}

/// One stored entry of an explicit form field: the `(i, j)` matrix slot with
/// a polynomial numerator and optional shared polynomial denominator.
#[derive(Debug, Clone)]
pub struct FieldEntry {
    pub i: usize,
    pub j: usize,
    pub num: Poly,
    pub den: Option<Poly>,
}

/// A map from chart points to 2-form values.
#[derive(Debug, Clone)]
pub enum FormField {
    /// The same form at every point.
    Constant(TwoForm),
    /// Entrywise polynomial (or rational, when denominators are present).
    Explicit {
        dim: usize,
        entries: Vec<FieldEntry>,
    },
    /// A closed-form multi-center model form; differentiated numerically.
    Builtin { params: GhParams, which: usize },
    /// Samples on a chart grid, evaluated by multilinear interpolation;
    /// derivatives by finite differences only.
    Grid { chart: ChartSpec, values: Vec<CMat> },
}

impl FormField {
    pub fn kind(&self) -> &'static str {
        match self {
            FormField::Constant(_) => "constant",
            FormField::Explicit { entries, .. } => {
                if entries.iter().any(|e| e.den.is_some()) {
                    "rational"
                } else {
                    "polynomial"
                }
            }
            FormField::Builtin { .. } => "builtin",
            FormField::Grid { .. } => "grid",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FormField::Constant(f) => f.dim(),
            FormField::Explicit { dim, .. } => *dim,
            FormField::Builtin { .. } => 4,
            FormField::Grid { chart, .. } => chart.dim(),
        }
    }

    fn supports_symbolic_derivative(&self) -> bool {
        matches!(self, FormField::Constant(_) | FormField::Explicit { .. })
    }

    /// Raw matrix value without the chart-membership gate.
    fn eval_raw(&self, x: &[f64]) -> Result<CMat> {
        match self {
            FormField::Constant(f) => Ok(f.matrix().clone()),
            FormField::Explicit { dim, entries } => {
                let mut m = CMat::zeros(*dim, *dim);
                for e in entries {
                    let mut v = e.num.eval(x);
                    if let Some(d) = &e.den {
                        let q = d.eval(x);
                        if q.norm() < tolerances::DENOMINATOR_FLOOR {
                            return Err(Error::PoleProximity {
                                i: e.i,
                                j: e.j,
                                min_abs: q.norm(),
                                limit: tolerances::DENOMINATOR_FLOOR,
                            });
                        }
                        v /= q;
                    }
                    m[(e.i, e.j)] += v;
                    m[(e.j, e.i)] -= v;
                }
                Ok(m)
            }
            FormField::Builtin { params, which } => {
                let xyz = [x[1], x[2], x[3]];
                let m = zoo::gh_form(params, *which, xyz)?;
                Ok(m.map(|v| c64(v, 0.0)))
            }
            FormField::Grid { chart, values } => {
                let dim = chart.dim();
                // locate the cell and interpolation weights on each axis
                let mut base = vec![0usize; dim];
                let mut frac = vec![0.0f64; dim];
                for axis in 0..dim {
                    let b = chart.bounds[axis];
                    let g = chart.grid[axis];
                    let step = (b[1] - b[0]) / (g - 1) as f64;
                    let t = ((x[axis] - b[0]) / step).clamp(0.0, (g - 1) as f64);
                    let cell = (t.floor() as usize).min(g - 2);
                    base[axis] = cell;
                    frac[axis] = t - cell as f64;
                }
                let n = values[0].nrows();
                let mut acc = CMat::zeros(n, n);
                for corner in 0..(1usize << dim) {
                    let mut weight = 1.0;
                    let mut flat = 0usize;
                    for axis in 0..dim {
                        let hi = (corner >> axis) & 1 == 1;
                        weight *= if hi { frac[axis] } else { 1.0 - frac[axis] };
                        let idx = base[axis] + usize::from(hi);
                        flat = flat * chart.grid[axis] + idx;
                    }
                    if weight != 0.0 {
                        acc += &values[flat] * c64(weight, 0.0);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Evaluates the field at a chart point, returning an antisymmetric
    /// matrix; points outside the box are rejected.
    pub fn eval(&self, chart: &ChartSpec, x: &[f64]) -> Result<TwoForm> {
        if !chart.contains(x) {
            return Err(Error::OutOfBox(x.to_vec()));
        }
        TwoForm::new(self.eval_raw(x)?)
    }

    /// Exact symbolic partial derivative matrix for polynomial and constant
    /// fields.
    fn symbolic_partial(&self, axis: usize, x: &[f64]) -> Result<CMat> {
        match self {
            FormField::Constant(f) => Ok(CMat::zeros(f.dim(), f.dim())),
            FormField::Explicit { dim, entries } => {
                let mut m = CMat::zeros(*dim, *dim);
                for e in entries {
                    let v = match &e.den {
                        None => e.num.derivative(axis).eval(x),
                        Some(d) => {
                            // (p/q)' = (p' q - p q') / q^2
                            let q = d.eval(x);
                            if q.norm() < tolerances::DENOMINATOR_FLOOR {
                                return Err(Error::PoleProximity {
                                    i: e.i,
                                    j: e.j,
                                    min_abs: q.norm(),
                                    limit: tolerances::DENOMINATOR_FLOOR,
                                });
                            }
                            let p = e.num.eval(x);
                            let dp = e.num.derivative(axis).eval(x);
                            let dq = d.derivative(axis).eval(x);
                            (dp * q - p * dq) / (q * q)
                        }
                    };
                    m[(e.i, e.j)] += v;
                    m[(e.j, e.i)] -= v;
                }
                Ok(m)
            }
            _ => Err(Error::Input(
                "symbolic derivative unavailable for this field kind".into(),
            )),
        }
    }

    /// Partial derivative along one axis: symbolic where exact, central
    /// differences otherwise.
    pub fn partial(&self, axis: usize, x: &[f64], h: f64, order: FdOrder) -> Result<CMat> {
        if self.supports_symbolic_derivative() {
            return self.symbolic_partial(axis, x);
        }
        let shift = |step: f64| -> Result<CMat> {
            let mut y = x.to_vec();
            y[axis] += step;
            self.eval_raw(&y)
        };
        match order {
            FdOrder::Second => Ok((shift(h)? - shift(-h)?) / c64(2.0 * h, 0.0)),
            FdOrder::Fourth => {
                let num =
                    (shift(-2.0 * h)? - shift(2.0 * h)?) + (shift(h)? - shift(-h)?) * c64(8.0, 0.0);
                Ok(num / c64(12.0 * h, 0.0))
            }
        }
    }

    /// Load-time validation on a chart: rational denominators must stay away
    /// from zero on a refined probe grid.
    pub fn validate_on_chart(&self, chart: &ChartSpec) -> Result<()> {
        if chart.dim() != self.dim() {
            return Err(Error::Input(format!(
                "field dimension {} does not match chart dimension {}",
                self.dim(),
                chart.dim()
            )));
        }
        if let FormField::Explicit { entries, .. } = self {
            let probes = chart.refined(4).grid_points();
            for e in entries {
                if let Some(d) = &e.den {
                    let mut min_abs = f64::INFINITY;
                    for p in &probes {
                        min_abs = min_abs.min(d.eval(p).norm());
                    }
                    if min_abs <= tolerances::DENOMINATOR_FLOOR {
                        return Err(Error::PoleProximity {
                            i: e.i,
                            j: e.j,
                            min_abs,
                            limit: tolerances::DENOMINATOR_FLOOR,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Finite-difference order for numeric derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FdOrder {
    Second,
    Fourth,
}

/// Components of a 3-form indexed by `i < j < k`.
#[derive(Debug, Clone)]
pub struct ThreeForm {
    pub dim: usize,
    pub components: Vec<((usize, usize, usize), Complex64)>,
}

impl ThreeForm {
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn component(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.components
            .iter()
            .find(|((a, b, c), _)| (*a, *b, *c) == (i, j, k))
            .map(|(_, v)| *v)
            .unwrap_or_default()
    }
}

/// Exterior derivative of a 2-form field at a point:
/// `(dF)_ijk = d_i F_jk + d_j F_ki + d_k F_ij` over `i < j < k`.
pub fn exterior_derivative(
    field: &FormField,
    chart: &ChartSpec,
    x: &[f64],
    h: f64,
    order: FdOrder,
) -> Result<ThreeForm> {
    let dim = field.dim();
    if !chart.contains(x) {
        return Err(Error::OutOfBox(x.to_vec()));
    }
    if !field.supports_symbolic_derivative() {
        // numeric stencils must stay inside the box
        let margin = match order {
            FdOrder::Second => h,
            FdOrder::Fourth => 2.0 * h,
        };
        for (axis, b) in chart.bounds.iter().enumerate() {
            if x[axis] - b[0] < margin || b[1] - x[axis] < margin {
                return Err(Error::Input(format!(
                    "point too close to the chart boundary on axis {axis} for step {h}"
                )));
            }
        }
    }
    let partials: Vec<CMat> = (0..dim)
        .map(|axis| field.partial(axis, x, h, order))
        .collect::<Result<_>>()?;
    let mut components = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            for k in (j + 1)..dim {
                let v = partials[i][(j, k)] + partials[j][(k, i)] + partials[k][(i, j)];
                components.push(((i, j, k), v));
            }
        }
    }
    Ok(ThreeForm { dim, components })
}

/// One verified identity inside a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity the check certifies, in plain notation.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_location: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_zeta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            worst_location: None,
            worst_zeta: None,
            detail: None,
        }
    }

    pub fn at(mut self, location: Option<Vec<f64>>, zeta: Option<Complex64>) -> Self {
        self.worst_location = location;
        self.worst_zeta = zeta.map(|z| [z.re, z.im]);
        self
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn failed(name: &str, anchor: &str, detail: String) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            residual: f64::MAX,
            tolerance: 0.0,
            pass: false,
            worst_location: None,
            worst_zeta: None,
            detail: Some(detail),
        }
    }
}

/// Aggregated result of a chart sweep: one record per identity, and a single
/// pass flag that is true exactly when every record passes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldReport {
    pub checks: Vec<CheckRecord>,
    pub aggregate_pass: bool,
}

impl FieldReport {
    pub fn new(checks: Vec<CheckRecord>) -> Self {
        let aggregate_pass = checks.iter().all(|c| c.pass);
        FieldReport {
            checks,
            aggregate_pass,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// The `zeta`-family of 2-forms as fields over a chart, in either of the two
/// explicit shapes.
#[derive(Debug, Clone)]
pub enum FamilyField {
    /// `(omega_plus, omega_3)` directly.
    PlusThree { plus: FormField, w3: FormField },
    /// `(omega_1, omega_2, omega_3)` with `omega_plus = omega_1 + i omega_2`.
    Triple {
        w1: FormField,
        w2: FormField,
        w3: FormField,
    },
}

impl FamilyField {
    pub fn dim(&self) -> usize {
        match self {
            FamilyField::PlusThree { plus, .. } => plus.dim(),
            FamilyField::Triple { w1, .. } => w1.dim(),
        }
    }

    pub fn validate_on_chart(&self, chart: &ChartSpec) -> Result<()> {
        match self {
            FamilyField::PlusThree { plus, w3 } => {
                plus.validate_on_chart(chart)?;
                w3.validate_on_chart(chart)
            }
            FamilyField::Triple { w1, w2, w3 } => {
                w1.validate_on_chart(chart)?;
                w2.validate_on_chart(chart)?;
                w3.validate_on_chart(chart)
            }
        }
    }

    /// The pointwise family at a chart point.
    pub fn family_at(&self, chart: &ChartSpec, x: &[f64]) -> Result<HoloSympFamily> {
        match self {
            FamilyField::PlusThree { plus, w3 } => HoloSympFamily::new(
                plus.eval(chart, x)?,
                w3.eval(chart, x)?,
                tolerances::REALITY,
            ),
            FamilyField::Triple { w1, w2, w3 } => {
                let omega_plus = w1
                    .eval(chart, x)?
                    .add(&w2.eval(chart, x)?.scaled(c64(0.0, 1.0)));
                HoloSympFamily::new(omega_plus, w3.eval(chart, x)?, tolerances::REALITY)
            }
        }
    }

    /// The real 2-form fields whose closedness certifies closedness of the
    /// whole family, each with the part selector to apply to derivatives.
    fn closedness_targets(&self) -> Vec<(String, &FormField, Part)> {
        match self {
            FamilyField::PlusThree { plus, w3 } => vec![
                ("omega_1".into(), plus, Part::Re),
                ("omega_2".into(), plus, Part::Im),
                ("omega_3".into(), w3, Part::Re),
            ],
            FamilyField::Triple { w1, w2, w3 } => vec![
                ("omega_1".into(), w1, Part::Re),
                ("omega_2".into(), w2, Part::Re),
                ("omega_3".into(), w3, Part::Re),
            ],
        }
    }
}

#[derive(Clone, Copy)]
enum Part {
    Re,
    Im,
}

impl Part {
    fn of(&self, c: Complex64) -> f64 {
        match self {
            Part::Re => c.re,
            Part::Im => c.im,
        }
    }
}

/// Worst residual and location of a scalar sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub worst: f64,
    pub worst_location: Option<Vec<f64>>,
    pub worst_zeta: Option<Complex64>,
}

impl SweepOutcome {
    fn new() -> Self {
        SweepOutcome {
            worst: 0.0,
            worst_location: None,
            worst_zeta: None,
        }
    }

    fn update(&mut self, value: f64, location: &[f64], zeta: Option<Complex64>) {
        if value > self.worst || self.worst_location.is_none() {
            self.worst = value;
            self.worst_location = Some(location.to_vec());
            self.worst_zeta = zeta;
        }
    }
}

/// Sweeps interior grid points and reports the largest `|dF|`.
fn closedness_sweep(
    field: &FormField,
    part: Part,
    chart: &ChartSpec,
    h: f64,
    order: FdOrder,
) -> Result<SweepOutcome> {
    let symbolic = field.supports_symbolic_derivative();
    let margin = if symbolic {
        0.0
    } else {
        match order {
            FdOrder::Second => h,
            FdOrder::Fourth => 2.0 * h,
        }
    };
    let points = chart.interior_points(margin);
    if points.is_empty() {
        return Err(Error::Input(
            "no interior grid points available for the closedness sweep".into(),
        ));
    }
    let mut outcome = SweepOutcome::new();
    for x in &points {
        let df = exterior_derivative(field, chart, x, h, order)?;
        let worst = df
            .components
            .iter()
            .map(|(_, c)| part.of(*c).abs())
            .fold(0.0, f64::max);
        outcome.update(worst, x, None);
    }
    Ok(outcome)
}

/// Closedness sweep for real-valued fields (both parts checked; the
/// imaginary one is zero for honest real fields).
pub fn closedness_sweep_real(
    field: &FormField,
    chart: &ChartSpec,
    h: f64,
    order: FdOrder,
) -> Result<SweepOutcome> {
    let re = closedness_sweep(field, Part::Re, chart, h, order)?;
    let im = closedness_sweep(field, Part::Im, chart, h, order)?;
    Ok(if im.worst > re.worst { im } else { re })
}

/// Public closedness check producing a report record.
pub fn closedness_check(
    field: &FormField,
    chart: &ChartSpec,
    h: f64,
    tol: f64,
    order: FdOrder,
) -> Result<CheckRecord> {
    let outcome = closedness_sweep(field, Part::Re, chart, h, order)?;
    // imaginary part swept too for complex fields
    let outcome_im = closedness_sweep(field, Part::Im, chart, h, order)?;
    let (worst, loc) = if outcome_im.worst > outcome.worst {
        (outcome_im.worst, outcome_im.worst_location)
    } else {
        (outcome.worst, outcome.worst_location)
    };
    Ok(CheckRecord::new("closedness", "dF = 0", worst, tol).at(loc, None))
}

/// Per-axis central-difference derivatives of the three structures.
type TripleDerivative = (RMat, RMat, RMat);

/// Triple at every point of a finite-difference stencil, for derivative
/// assembly.
fn stencil_triples(
    family: &FamilyField,
    chart: &ChartSpec,
    x: &[f64],
    h: f64,
    tol: f64,
) -> Result<(QuaternionicTriple, Vec<TripleDerivative>)> {
    use crate::pointwise::triple_from_family;
    let dim = chart.dim();
    let center = triple_from_family(&family.family_at(chart, x)?, tol)
        .map_err(|e| e.at_point(x, "structure reconstruction"))?;
    let mut derivatives = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut xp = x.to_vec();
        xp[axis] += h;
        let mut xm = x.to_vec();
        xm[axis] -= h;
        let tp = triple_from_family(&family.family_at(chart, &xp)?, tol)
            .map_err(|e| e.at_point(&xp, "structure reconstruction"))?;
        let tm = triple_from_family(&family.family_at(chart, &xm)?, tol)
            .map_err(|e| e.at_point(&xm, "structure reconstruction"))?;
        let d = |a: &RMat, b: &RMat| (a - b) / (2.0 * h);
        derivatives.push((
            d(&tp.j1().real_matrix(), &tm.j1().real_matrix()),
            d(&tp.j2().real_matrix(), &tm.j2().real_matrix()),
            d(&tp.j3().real_matrix(), &tm.j3().real_matrix()),
        ));
    }
    Ok((center, derivatives))
}

/// Nijenhuis tensor of a matrix field from its value and partials:
/// `N(e_i, e_j) = [J e_i, J e_j] - J [J e_i, e_j] - J [e_i, J e_j]`.
fn nijenhuis_max(j: &RMat, dj: &[RMat]) -> f64 {
    let n = j.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for jj in (i + 1)..n {
            for k in 0..n {
                let mut val = 0.0;
                for l in 0..n {
                    val += j[(l, i)] * dj[l][(k, jj)] - j[(l, jj)] * dj[l][(k, i)];
                }
                for m in 0..n {
                    val += j[(k, m)] * (dj[jj][(m, i)] - dj[i][(m, jj)]);
                }
                worst = worst.max(val.abs());
            }
        }
    }
    worst
}

/// Integrability sweep: reconstructs the structure field on a central
/// stencil around each interior grid point and bounds the Nijenhuis tensor
/// of `J` at the sampled sphere points.
pub fn nijenhuis_check(
    family: &FamilyField,
    chart: &ChartSpec,
    zetas: &[TwistorParam],
    h: f64,
    tol: f64,
    algebra_tol: f64,
) -> Result<CheckRecord> {
    let points = chart.interior_points(h);
    if points.is_empty() {
        return Err(Error::Input(
            "no interior grid points available for the integrability sweep".into(),
        ));
    }
    let mut outcome = SweepOutcome::new();
    for x in &points {
        let (center, derivs) = stencil_triples(family, chart, x, h, algebra_tol)?;
        for zeta in zetas {
            let j = center.complex_structure_at(zeta).real_matrix();
            let c = crate::twistor::stereographic(zeta);
            let dj: Vec<RMat> = derivs
                .iter()
                .map(|(d1, d2, d3)| d1 * c[0] + d2 * c[1] + d3 * c[2])
                .collect();
            let value = nijenhuis_max(&j, &dj);
            outcome.update(value, x, zeta.finite());
        }
    }
    Ok(
        CheckRecord::new("nijenhuis", "N_J(v, w) = 0", outcome.worst, tol)
            .at(outcome.worst_location, outcome.worst_zeta),
    )
}

/// Configuration for [`verify_chart`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Tolerance for pointwise algebraic identities (quaternion relations,
    /// compatibility, rotation frames, reality).
    pub algebra_tol: f64,
    pub closedness_h: f64,
    pub closedness_tol: f64,
    pub nijenhuis_h: f64,
    pub nijenhuis_tol: f64,
    /// Sphere points for the integrability sweep, as (re, im).
    pub nijenhuis_zetas: Vec<[f64; 2]>,
    /// Number of seeded random sphere samples for reality/kernel checks.
    pub zeta_samples: usize,
    pub seed: u64,
    pub fd_order: FdOrder,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            algebra_tol: tolerances::CHART_ALGEBRA,
            closedness_h: tolerances::FD_STEP_CLOSEDNESS,
            closedness_tol: tolerances::CLOSEDNESS,
            nijenhuis_h: tolerances::FD_STEP_NIJENHUIS,
            nijenhuis_tol: tolerances::NIJENHUIS,
            nijenhuis_zetas: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0]],
            zeta_samples: 20,
            seed: 0,
            fd_order: FdOrder::Second,
        }
    }
}

/// Runs every pointwise construction and every chart-level identity over the
/// grid and aggregates the outcome.
pub fn verify_chart(
    family: &FamilyField,
    chart: &ChartSpec,
    config: &VerifyConfig,
) -> Result<FieldReport> {
    family.validate_on_chart(chart)?;
    let r = family.dim() / 4;
    let tol = config.algebra_tol;
    let zetas = sample_zetas(config.seed, config.zeta_samples);
    let mut checks: Vec<CheckRecord> = Vec::new();

    let mut holosymp_wedge_min = f64::INFINITY;
    let mut holosymp_kernel_ok = true;
    let mut holosymp_loc: Option<Vec<f64>> = None;
    let mut quat = SweepOutcome::new();
    let mut omega3_type = SweepOutcome::new();
    let mut omega3_smin = f64::INFINITY;
    let mut wedge_vanish = SweepOutcome::new();
    let mut chain_compat = SweepOutcome::new();
    let mut reality = SweepOutcome::new();
    let mut antipodal = SweepOutcome::new();
    let mut kernel_dim_dev = SweepOutcome::new();
    let mut graph = SweepOutcome::new();
    let mut frame_rescale = SweepOutcome::new();
    let mut frame_pairing = SweepOutcome::new();
    let mut signatures: Vec<(Vec<f64>, Signature)> = Vec::new();
    let mut failure: Option<CheckRecord> = None;

    'points: for x in chart.grid_points() {
        let step = (|| -> Result<()> {
            let fam = family.family_at(chart, &x)?;
            let hs = holosymp_check(fam.omega_plus(), r, tol)?;
            if hs.wedge_volume < holosymp_wedge_min {
                holosymp_wedge_min = hs.wedge_volume;
                holosymp_loc = Some(x.clone());
            }
            if hs.kernel_dim < hs.required_kernel_dim {
                holosymp_kernel_ok = false;
                holosymp_loc = Some(x.clone());
            }

            let ps: PointStructure = metric_from_family(&fam, tol)?;
            quat.update(ps.triple.quaternion_residual(), &x, None);
            chain_compat.update(ps.compatibility_residual()?, &x, None);

            let o3 = omega3_type_check(&fam, ps.triple.j3())?;
            omega3_type.update(o3.type_residual, &x, None);
            omega3_smin = omega3_smin.min(o3.smallest_singular_value);
            if let (Some(wp), Some(wm)) = (o3.wedge_plus, o3.wedge_minus) {
                wedge_vanish.update(wp.max(wm), &x, None);
            }

            signatures.push((x.clone(), ps.signature));

            for z in &zetas {
                let zp = TwistorParam::Finite(*z);
                reality.update(family_reality_residual(&fam, &zp), &x, Some(*z));
                antipodal.update(antipodal_structure_residual(&ps.triple, &zp), &x, Some(*z));
                let dim = kernel_dimension_of_family(&fam, &zp, tolerances::RANK_REL)?;
                kernel_dim_dev.update(dim.abs_diff(2 * r) as f64, &x, Some(*z));
                graph.update(
                    graph_property_residual(
                        &fam,
                        ps.triple.j1(),
                        ps.triple.j3(),
                        *z,
                        tolerances::RANK_REL,
                    )?,
                    &x,
                    Some(*z),
                );
                let frame = rotation_frame_report(&ps.triple, &ps.sympl, *z)?;
                frame_rescale.update(frame.rescale_residual, &x, Some(*z));
                frame_pairing.update(frame.pairing_residual, &x, Some(*z));
            }
            Ok(())
        })();
        if let Err(e) = step {
            failure = Some(
                CheckRecord::failed(
                    "pointwise_reconstruction",
                    "family -> (J_1, J_2, J_3, g)",
                    e.to_string(),
                )
                .at(Some(x.clone()), None),
            );
            break 'points;
        }
    }

    if let Some(f) = failure {
        checks.push(f);
    } else {
        let hs_pass = holosymp_wedge_min > tol && holosymp_kernel_ok;
        checks.push(CheckRecord {
            name: "holomorphic_symplectic".into(),
            anchor: "W^r ^ conj(W)^r != 0 and dim ker W >= 2r".into(),
            residual: if holosymp_kernel_ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: hs_pass,
            worst_location: holosymp_loc,
            worst_zeta: None,
            detail: Some(format!("min wedge volume {holosymp_wedge_min:.6e}")),
        });
        checks.push(
            CheckRecord::new(
                "quaternion_relations",
                "J_a J_b = eps_abc J_c - delta_ab",
                quat.worst,
                tol,
            )
            .at(quat.worst_location.clone(), None),
        );
        checks.push(
            CheckRecord::new(
                "metric_compatibility",
                "w_a = J_a' g, g = w_a J_a, J_a = -g^-1 w_a",
                chain_compat.worst,
                tol,
            )
            .at(chain_compat.worst_location.clone(), None),
        );
        checks.push(
            CheckRecord::new(
                "omega3_type",
                "omega_3(J_3 ., J_3 .) = omega_3",
                omega3_type.worst,
                tol,
            )
            .at(omega3_type.worst_location.clone(), None),
        );
        checks.push(
            CheckRecord::new(
                "omega3_nondegenerate",
                "smallest singular value of omega_3 > 0",
                if omega3_smin > tol { 0.0 } else { 1.0 },
                0.0,
            )
            .with_detail(format!("min singular value {omega3_smin:.6e}")),
        );
        if r == 1 {
            checks.push(
                CheckRecord::new(
                    "omega3_wedge_vanishing",
                    "omega_+^r ^ omega_3 = 0 and omega_-^r ^ omega_3 = 0",
                    wedge_vanish.worst,
                    tol,
                )
                .at(wedge_vanish.worst_location.clone(), None),
            );
        }
        // signature constancy and divisibility
        let sig0 = signatures[0].1;
        let mut sig_dev = 0.0;
        let mut sig_loc = Some(signatures[0].0.clone());
        for (x, s) in &signatures {
            if *s != sig0 {
                sig_dev = 1.0;
                sig_loc = Some(x.clone());
                break;
            }
        }
        checks.push(
            CheckRecord::new(
                "signature_constant",
                "signature is constant on the chart, (p, q) multiples of 4",
                sig_dev
                    + if sig0.positive.is_multiple_of(4)
                        && sig0.negative.is_multiple_of(4)
                        && sig0.zero == 0
                    {
                        0.0
                    } else {
                        1.0
                    },
                0.0,
            )
            .at(sig_loc, None)
            .with_detail(format!("signature {sig0}")),
        );
        checks.push(
            CheckRecord::new(
                "family_reality",
                "conj(W(-1/conj zeta)) = W(zeta)",
                reality.worst,
                tol,
            )
            .at(reality.worst_location.clone(), reality.worst_zeta),
        );
        checks.push(
            CheckRecord::new(
                "antipodal_structures",
                "J at the antipode = -J",
                antipodal.worst,
                tol,
            )
            .at(antipodal.worst_location.clone(), antipodal.worst_zeta),
        );
        checks.push(
            CheckRecord::new(
                "kernel_dimension",
                "dim ker W(zeta) = 2r",
                kernel_dim_dev.worst,
                0.0,
            )
            .at(
                kernel_dim_dev.worst_location.clone(),
                kernel_dim_dev.worst_zeta,
            ),
        );
        checks.push(
            CheckRecord::new(
                "kernel_graph",
                "holomorphic part of ker W(zeta) = zeta K (antiholomorphic part)",
                graph.worst,
                tol,
            )
            .at(graph.worst_location.clone(), graph.worst_zeta),
        );
        checks.push(
            CheckRecord::new(
                "rotation_frame",
                "(|z| + 1/|z|)^-1 W(zeta) = (w_K + i w_I)/2",
                frame_rescale.worst,
                tol,
            )
            .at(
                frame_rescale.worst_location.clone(),
                frame_rescale.worst_zeta,
            ),
        );
        checks.push(
            CheckRecord::new(
                "rotation_frame_pairing",
                "(|z| + 1/|z|)^-1 W(zeta)(v, K x) = g(v, x)",
                frame_pairing.worst,
                tol,
            )
            .at(
                frame_pairing.worst_location.clone(),
                frame_pairing.worst_zeta,
            ),
        );
    }

    // chart-level: closedness of the three real forms
    for (name, field, part) in family.closedness_targets() {
        let outcome = closedness_sweep(field, part, chart, config.closedness_h, config.fd_order)?;
        checks.push(
            CheckRecord::new(
                "closedness",
                &format!("d({name}) = 0"),
                outcome.worst,
                config.closedness_tol,
            )
            .at(outcome.worst_location, None)
            .with_detail(name),
        );
    }

    // chart-level: integrability, skipped when reconstruction already failed
    if checks.iter().all(|c| c.name != "pointwise_reconstruction") {
        let zetas: Vec<TwistorParam> = config
            .nijenhuis_zetas
            .iter()
            .map(|z| TwistorParam::new(z[0], z[1]))
            .collect();
        match nijenhuis_check(
            family,
            chart,
            &zetas,
            config.nijenhuis_h,
            config.nijenhuis_tol,
            config.algebra_tol,
        ) {
            Ok(rec) => checks.push(rec),
            Err(e) => checks.push(CheckRecord::failed(
                "nijenhuis",
                "N_J(v, w) = 0",
                e.to_string(),
            )),
        }
    }

    Ok(FieldReport::new(checks))
}

/// Per-point reconstructed metric with its signature, row-major over the
/// grid.
pub fn reconstruct_metric_field(
    family: &FamilyField,
    chart: &ChartSpec,
    algebra_tol: f64,
) -> Result<Vec<(Vec<f64>, RMat, Signature)>> {
    family.validate_on_chart(chart)?;
    let mut out = Vec::new();
    for x in chart.grid_points() {
        let fam = family
            .family_at(chart, &x)
            .map_err(|e| e.at_point(&x, "family evaluation"))?;
        let ps = metric_from_family(&fam, algebra_tol)
            .map_err(|e| e.at_point(&x, "metric reconstruction"))?;
        out.push((x, ps.metric.real_matrix(), ps.signature));
    }
    Ok(out)
}

/// Outcome of the extract/reconstruct round trip against a model's stored
/// ground truth.
#[derive(Debug, Clone)]
pub struct RoundtripOutcome {
    pub max_metric_rel_error: f64,
    pub max_operator_error: f64,
    pub pass: bool,
}

/// Extracts the family from the model's ground truth at every grid point,
/// reconstructs, and compares against the stored structures.
pub fn roundtrip_check(model: &ZooModel, tol: f64) -> Result<RoundtripOutcome> {
    use crate::pointwise::{extract_family, SymplecticTriple};
    let chart = model.chart();
    let mut metric_err: f64 = 0.0;
    let mut op_err: f64 = 0.0;
    for x in chart.grid_points() {
        let (truth_triple, truth_g) = model.truth_at(&x)?;
        let (w1, w2, w3) = model.symplectic_at(&x)?;
        let sympl = SymplecticTriple::new(w1, w2, w3, tolerances::REALITY)?;
        let family = extract_family(&truth_triple, &sympl)?;
        let ps = metric_from_family(&family, tolerances::ALGEBRA)
            .map_err(|e| e.at_point(&x, "roundtrip reconstruction"))?;
        let scale = max_abs(truth_g.matrix()).max(1.0);
        metric_err = metric_err.max(max_abs(&(ps.metric.matrix() - truth_g.matrix())) / scale);
        for alpha in 1..=3 {
            op_err = op_err.max(max_abs(
                &(ps.triple.j(alpha).matrix() - truth_triple.j(alpha).matrix()),
            ));
        }
    }
    Ok(RoundtripOutcome {
        max_metric_rel_error: metric_err,
        max_operator_error: op_err,
        pass: metric_err <= tol && op_err <= tol,
    })
}
