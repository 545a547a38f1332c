//! The Landsberg equation of a Minkowski norm `F(p, ·)`: the linear operator
//! `f ↦ G^i(f) = ¼ g^{il} (y^k ∂_l f_k - f_l)`, its residual tensor, and the
//! action of linear isometries on candidate solutions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvature::{hessian_jet, max_abs3, tensor3, Tensor3};
use crate::derivjet::{check_fiber, shape, Dual, Jet, Scalar};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::metrics::{FrozenNorm, MetricKind, MetricSpec};
use crate::sampling::sphere_directions;
use crate::tolerances;

/// Directions used to certify that a map is a norm isometry.
pub const ISOMETRY_SAMPLES: usize = 200;

type FieldFn = dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync;

/// A vector of fiber functions `f_l(y)`, positively 2-homogeneous. Fields
/// are closures over jets, so every derivative the operator needs is exact.
#[derive(Clone)]
pub struct FiberField {
    n: usize,
    label: String,
    f: Arc<FieldFn>,
}

impl fmt::Debug for FiberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiberField({}, n = {})", self.label, self.n)
    }
}

impl FiberField {
    pub fn new(
        n: usize,
        label: impl Into<String>,
        f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        FiberField {
            n,
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn zero(n: usize) -> Self {
        FiberField::new(n, "0", move |_| vec![Jet::constant(0.0); n])
    }

    /// `f_l(y) = yᵀ Q_l y`.
    pub fn quadratic(q: Vec<Mat<f64>>) -> Self {
        let n = q.len();
        FiberField::new(n, "quadratic", move |y| {
            q.iter()
                .map(|m| Mat::<Jet>::from_f64(m).bilinear(y, y))
                .collect()
        })
    }

    /// A fixed non-polynomial test field, `f_l = |y| y_{l+1} + 0.3 y_l²`.
    pub fn probe(n: usize) -> Self {
        FiberField::new(n, "probe", move |y| {
            let r = y
                .iter()
                .fold(Jet::constant(0.0), |acc, v| acc + v.clone() * v.clone())
                .sqrt();
            (0..n)
                .map(|l| r.clone() * y[(l + 1) % n].clone() + y[l].clone() * y[l].clone() * 0.3)
                .collect()
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval_jets(&self, y: &[Jet]) -> Result<Vec<Jet>> {
        if y.len() != self.n {
            return Err(Error::Domain(format!(
                "field has {} components, got {} coordinates",
                self.n,
                y.len()
            )));
        }
        let out = (self.f)(y);
        if out.len() != self.n {
            return Err(Error::Evaluation {
                order: format!("field {} returned {} components", self.label, out.len()),
            });
        }
        for (l, c) in out.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Evaluation {
                    order: format!("component f_{} of {}", l + 1, self.label),
                });
            }
        }
        Ok(out)
    }

    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        let yj: Vec<Jet> = y.iter().map(|v| Jet::constant(*v)).collect();
        Ok(self.eval_jets(&yj)?.iter().map(Scalar::value).collect())
    }

    /// `a f + b h`.
    pub fn combine(a: f64, f: &FiberField, b: f64, h: &FiberField) -> FiberField {
        assert_eq!(f.n, h.n, "fields of different dimension");
        let (ff, hf) = (f.f.clone(), h.f.clone());
        FiberField::new(
            f.n,
            format!("{a}·{} + {b}·{}", f.label, h.label),
            move |y| {
                ff(y)
                    .into_iter()
                    .zip(hf(y))
                    .map(|(u, v)| u * a + v * b)
                    .collect()
            },
        )
    }

    /// `(ξf)(y)_k = ξ^i_k f_i(ξy)`.
    pub fn act(&self, map: &LinearMap) -> FiberField {
        assert_eq!(self.n, map.dim(), "map and field dimensions differ");
        let m = map.xi.clone();
        let inner = self.f.clone();
        let n = self.n;
        FiberField::new(n, format!("{}·{}", map.label, self.label), move |y| {
            let my = Mat::<Jet>::from_f64(&m).mul_vec(y);
            let fy = inner(&my);
            (0..n)
                .map(|k| {
                    let mut acc = Jet::constant(0.0);
                    for (i, fi) in fy.iter().enumerate() {
                        if m[(i, k)] != 0.0 {
                            acc = acc + fi.clone() * m[(i, k)];
                        }
                    }
                    acc
                })
                .collect()
        })
    }

    /// `½ (f + ρf)`.
    pub fn even_part(&self, rho: &LinearMap) -> FiberField {
        FiberField::combine(0.5, self, 0.5, &self.act(rho))
    }

    /// `½ (f - ρf)`.
    pub fn odd_part(&self, rho: &LinearMap) -> FiberField {
        FiberField::combine(0.5, self, -0.5, &self.act(rho))
    }

    /// Worst relative `|f(λy) - λ² f(y)|` for `λ ∈ {0.5, 2}`.
    pub fn homogeneity_defect(&self, samples: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for y in samples {
            let f = self.eval(y)?;
            let scale = f
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE);
            for lambda in [0.5, 2.0] {
                let ys: Vec<f64> = y.iter().map(|v| lambda * v).collect();
                for (a, b) in self.eval(&ys)?.iter().zip(&f) {
                    worst = worst.max((a - lambda * lambda * b).abs() / (lambda * lambda * scale));
                }
            }
        }
        Ok(worst)
    }
}

/// An invertible linear map of the fiber, `xi[(j, i)] = ξ^j_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub label: String,
    pub xi: Mat<f64>,
    pub eta: Mat<f64>,
}

impl LinearMap {
    pub fn new(label: impl Into<String>, xi: Mat<f64>) -> Result<LinearMap> {
        let label = label.into();
        if xi.rows != xi.cols {
            return Err(Error::Precondition(format!("{label}: map is not square")));
        }
        let det = xi.det();
        if !(det.abs() > 1e-12) || !det.is_finite() {
            return Err(Error::Precondition(format!(
                "{label}: map is singular (det = {det})"
            )));
        }
        let eta = xi.inverse();
        let prod = xi.mul(&eta);
        let n = xi.rows;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                if (prod[(i, j)] - want).abs() > tolerances::INVERSE {
                    return Err(Error::Precondition(format!(
                        "{label}: inverse is inaccurate"
                    )));
                }
            }
        }
        Ok(LinearMap { label, xi, eta })
    }

    pub fn identity(n: usize) -> LinearMap {
        LinearMap {
            label: "identity".into(),
            xi: Mat::identity(n),
            eta: Mat::identity(n),
        }
    }

    pub fn diagonal(d: &[f64]) -> Result<LinearMap> {
        let n = d.len();
        let label = format!(
            "diag({})",
            d.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        LinearMap::new(
            label,
            Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }),
        )
    }

    /// Rotation by `degrees` in the first `V1` plane, optionally composed
    /// with the reflection of the last `V2` coordinate. With a
    /// one-dimensional `V1` the angle must be a multiple of 180°.
    pub fn block_rotation(split: (usize, usize), degrees: f64, flip: bool) -> Result<LinearMap> {
        let (n1, n2) = split;
        let n = n1 + n2;
        let t = degrees.to_radians();
        let (c, s) = (t.cos(), t.sin());
        let mut m = Mat::identity(n);
        if n1 >= 2 {
            m[(0, 0)] = c;
            m[(0, 1)] = -s;
            m[(1, 0)] = s;
            m[(1, 1)] = c;
        } else if s.abs() < 1e-12 {
            m[(0, 0)] = c.signum();
        } else {
            return Err(Error::Precondition(format!(
                "V1 is one-dimensional: no rotation by {degrees}°"
            )));
        }
        if flip {
            m[(n - 1, n - 1)] = -1.0;
        }
        let label = format!(
            "block-rotation:{degrees}deg{}",
            if flip { "+flip" } else { "" }
        );
        LinearMap::new(label, m)
    }

    /// `identity`, `block-rotation:<deg>deg[+flip]` or `diag:<d1>,…,<dn>`.
    pub fn parse(s: &str, split: (usize, usize)) -> Result<LinearMap> {
        let s = s.trim();
        if s == "identity" {
            return Ok(LinearMap::identity(split.0 + split.1));
        }
        if let Some(rest) = s.strip_prefix("block-rotation:") {
            let (angle, flip) = match rest.strip_suffix("+flip") {
                Some(a) => (a, true),
                None => (rest, false),
            };
            let angle = angle.strip_suffix("deg").unwrap_or(angle);
            let deg: f64 = angle
                .parse()
                .map_err(|_| Error::Config(format!("bad rotation angle '{angle}'")))?;
            return LinearMap::block_rotation(split, deg, flip);
        }
        if let Some(rest) = s.strip_prefix("diag:") {
            let d = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("bad diagonal '{rest}'")))?;
            if d.len() != split.0 + split.1 {
                return Err(Error::Config(format!(
                    "diagonal needs {} entries",
                    split.0 + split.1
                )));
            }
            return LinearMap::diagonal(&d);
        }
        Err(Error::Config(format!("unknown map '{s}'")))
    }

    pub fn dim(&self) -> usize {
        self.xi.rows
    }

    /// The map whose action is `f ↦ self(other f)`.
    pub fn then(&self, other: &LinearMap) -> LinearMap {
        LinearMap {
            label: format!("{}∘{}", self.label, other.label),
            xi: other.xi.mul(&self.xi),
            eta: self.eta.mul(&other.eta),
        }
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.xi.mul_vec(y)
    }

    /// Worst relative `|F(ξy) - F(y)| / F(y)` and the direction attaining it.
    pub fn isometry_defect(&self, norm: &FrozenNorm, samples: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let mut worst = (0.0, Vec::new());
        for y in samples {
            let f = norm.norm(y);
            let d = (norm.norm(&self.apply(y)) - f).abs() / f;
            if !(d <= worst.0) {
                worst = (d, y.clone());
            }
        }
        worst
    }
}

/// `(G^i(f), g)` as jets of the given degree around `y`.
fn spray_jets(
    norm: &FrozenNorm,
    f: &FiberField,
    y: &[f64],
    degree: usize,
) -> Result<(Vec<Jet>, Mat<Jet>)> {
    let n = norm.dim();
    if y.len() != n || f.dim() != n {
        return Err(Error::Domain(format!("expected {n} fiber coordinates")));
    }
    check_fiber(y)?;
    let vars = |d: usize| -> Vec<Jet> {
        let s = shape(n, d);
        (0..n).map(|k| Jet::variable(s.clone(), y[k], k)).collect()
    };
    let f2 = norm.f_squared(&vars(degree + 2));
    let g = hessian_jet(&f2, n);
    let g0 = g.values();
    crate::curvature::checked_inverse(&g0, norm.x(), y)?;
    let fj = f.eval_jets(&vars(degree + 1))?;
    let y0 = vars(degree);
    let g_cov: Vec<Jet> = (0..n)
        .map(|l| {
            let mut acc = -fj[l].truncate(degree);
            for (k, yk) in y0.iter().enumerate() {
                acc = acc + yk.clone() * fj[k].derivative(l);
            }
            acc * 0.25
        })
        .collect();
    Ok((g.inverse().mul_vec(&g_cov), g))
}

/// `G^i(f)(y)`.
pub fn landsberg_operator(norm: &FrozenNorm, f: &FiberField, y: &[f64]) -> Result<Vec<f64>> {
    let (g, _) = spray_jets(norm, f, y, 0)?;
    Ok(g.iter().map(Scalar::value).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    /// `R_pqr = y^j g_ij ∂³G^i(f) / ∂y^p ∂y^q ∂y^r`.
    pub values: Tensor3,
    pub max_abs: f64,
}

pub fn landsberg_residual(norm: &FrozenNorm, f: &FiberField, y: &[f64]) -> Result<ResidualTable> {
    let n = norm.dim();
    let (gs, g) = spray_jets(norm, f, y, 3)?;
    let yg = g.values().mul_vec(y);
    let values = tensor3(n, |p, q, r| {
        let e = crate::curvature::exps(n, &[p, q, r]);
        (0..n).map(|i| yg[i] * gs[i].partial(&e)).sum()
    });
    Ok(ResidualTable {
        max_abs: max_abs3(&values),
        values,
    })
}

/// `f_l(y) = ∂_{x^l} F²(p, y)`, whose operator image is the geodesic spray
/// at `p`. For `(α₁, α₂)`-metrics it is assembled as
/// `L₁ ∂_l(α - b)(y, y) + L₂ ∂_l b(y, y)`; other families differentiate
/// `F²` in `x` with dual numbers.
pub fn canonical_f(spec: &MetricSpec, p: &[f64]) -> Result<FiberField> {
    spec.at(p)?;
    let n = spec.dim();
    let xd: Vec<Dual<f64>> = (0..n).map(|k| Dual::seed(p[k], k, n)).collect();
    let label = format!("∂ₓF² at {p:?}");
    let partials = |m: &Mat<Dual<f64>>| -> Vec<Mat<f64>> {
        (0..n)
            .map(|k| Mat::from_fn(n, n, |i, j| m[(i, j)].tangent(k)))
            .collect()
    };
    match &spec.kind {
        MetricKind::Alpha1Alpha2 { generator } => {
            let (alpha, b) = spec.fields(&xd);
            let a_minus_b = Mat::from_fn(n, n, |i, j| alpha[(i, j)].clone() - b[(i, j)].clone());
            let (a0, b0) = (a_minus_b.values(), b.values());
            let (da, db) = (partials(&a_minus_b), partials(&b));
            let generator = generator.clone();
            Ok(FiberField::new(n, label, move |y| {
                let s = Mat::<Jet>::from_f64(&a0).bilinear(y, y);
                let t = Mat::<Jet>::from_f64(&b0).bilinear(y, y);
                let (l1, l2) = generator.first_partials(s, t);
                (0..n)
                    .map(|l| {
                        l1.clone() * Mat::<Jet>::from_f64(&da[l]).bilinear(y, y)
                            + l2.clone() * Mat::<Jet>::from_f64(&db[l]).bilinear(y, y)
                    })
                    .collect()
            }))
        }
        MetricKind::Riemannian => {
            let da = partials(&spec.fields(&xd).0);
            Ok(FiberField::new(n, label, move |y| {
                da.iter()
                    .map(|m| Mat::<Jet>::from_f64(m).bilinear(y, y))
                    .collect()
            }))
        }
        _ => {
            let spec = spec.clone();
            let p = p.to_vec();
            Ok(FiberField::new(n, label, move |y| {
                let xs: Vec<Dual<Jet>> = (0..n)
                    .map(|k| Dual::seed(Jet::constant(p[k]), k, n))
                    .collect();
                let ys: Vec<Dual<Jet>> = y.iter().map(|v| Dual::constant(v.clone())).collect();
                let f2 = spec.f_squared(&xs, &ys);
                (0..n).map(|l| f2.tangent(l)).collect()
            }))
        }
    }
}

/// `max_y ‖G(af + bh)(y) - a G(f)(y) - b G(h)(y)‖`.
pub fn linearity_defect(
    norm: &FrozenNorm,
    f: &FiberField,
    h: &FiberField,
    a: f64,
    b: f64,
    samples: &[Vec<f64>],
) -> Result<f64> {
    let combined = FiberField::combine(a, f, b, h);
    let mut worst: f64 = 0.0;
    for y in samples {
        let gc = landsberg_operator(norm, &combined, y)?;
        let gf = landsberg_operator(norm, f, y)?;
        let gh = landsberg_operator(norm, h, y)?;
        for i in 0..y.len() {
            worst = worst.max((gc[i] - a * gf[i] - b * gh[i]).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub map: String,
    pub field: String,
    pub samples: usize,
    pub isometry_defect: f64,
    /// `max |G(ξf)(y) - η G(f)(ξy)|` over the largest `|G(f)|`.
    pub kernel_error: f64,
    /// `max |g(ξy) - ηᵀ g(y) η|` over the largest `|g|`.
    pub hessian_error: f64,
    pub f_residual: f64,
    pub xi_f_residual: f64,
    pub solution_tol: f64,
    /// `(n max |ξ|)³`, bounding how residuals grow under the action.
    pub condition_factor: f64,
    pub f_is_solution: bool,
    /// Whether `ξf` is again a solution, when `f` is one.
    pub preserved: Option<bool>,
    pub kernel_tol: f64,
    pub passed: bool,
}

/// Check that the isometry `map` carries the operator to itself: the
/// kernel identity `G(ξf)(y) = η G(f)(ξy)`, the Hessian identity, and (if
/// `f` solves the equation at the samples) that `ξf` does too.
pub fn invariance_check(
    norm: &FrozenNorm,
    map: &LinearMap,
    f: &FiberField,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<InvarianceReport> {
    let n = norm.dim();
    if map.dim() != n {
        return Err(Error::Precondition(format!(
            "map acts on R^{}, norm on R^{n}",
            map.dim()
        )));
    }
    let mut probe = sphere_directions(n, ISOMETRY_SAMPLES);
    probe.extend(samples.iter().cloned());
    let (iso, worst) = map.isometry_defect(norm, &probe);
    if !(iso <= tolerances::ISOMETRY) {
        return Err(Error::Precondition(format!(
            "{} is not an isometry of F: relative defect {iso:.3e} at y = {worst:?}",
            map.label
        )));
    }
    let xf = f.act(map);
    let (mut kernel, mut g_scale) = (0.0f64, 0.0f64);
    let (mut hess, mut h_scale) = (0.0f64, 0.0f64);
    let (mut res_f, mut res_xf) = (0.0f64, 0.0f64);
    for y in samples {
        let my = map.apply(y);
        let lhs = landsberg_operator(norm, &xf, y)?;
        let rhs = map.eta.mul_vec(&landsberg_operator(norm, f, &my)?);
        for (a, b) in lhs.iter().zip(&rhs) {
            kernel = kernel.max((a - b).abs());
            g_scale = g_scale.max(b.abs());
        }
        let gy = crate::curvature::fundamental_from_norm(norm, y)?;
        let gmy = crate::curvature::fundamental_from_norm(norm, &my)?;
        let pulled = map.eta.transpose().mul(&gy).mul(&map.eta);
        for (a, b) in gmy.data.iter().zip(&pulled.data) {
            hess = hess.max((a - b).abs());
            h_scale = h_scale.max(b.abs());
        }
        res_f = res_f.max(landsberg_residual(norm, f, y)?.max_abs);
        res_xf = res_xf.max(landsberg_residual(norm, &xf, y)?.max_abs);
    }
    let rel = |e: f64, s: f64| {
        if e == 0.0 {
            0.0
        } else {
            e / s.max(f64::MIN_POSITIVE)
        }
    };
    let kernel_error = rel(kernel, g_scale);
    let hessian_error = rel(hess, h_scale);
    let max_xi = map.xi.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let condition_factor = (n as f64 * max_xi).powi(3);
    let f_is_solution = res_f < tol;
    let preserved = f_is_solution.then(|| res_xf < condition_factor * tol);
    let passed = kernel_error < tolerances::KERNEL
        && hessian_error < tolerances::KERNEL
        && preserved != Some(false);
    Ok(InvarianceReport {
        map: map.label.clone(),
        field: f.label.clone(),
        samples: samples.len(),
        isometry_defect: iso,
        kernel_error,
        hessian_error,
        f_residual: res_f,
        xi_f_residual: res_xf,
        solution_tol: tol,
        condition_factor,
        f_is_solution,
        preserved,
        kernel_tol: tolerances::KERNEL,
        passed,
    })
}
