//! Finsler metric families built on a [`ManifoldModel`]: Riemannian, Randers,
//! `(α, β)` and `(α₁, α₂)`, plus raw fiber expressions for testing.

mod config;
mod generator;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use config::{MetricConfig, ModelConfig, SpecConfig};
pub use generator::{builtin_generator_source, Generator, LPartials, PARTIALS_TOL};
pub use validate::{validate_norm, ValidationReport, HOMOGENEITY_TOL};

use crate::derivjet::{check_fiber, Scalar, ScalarField};
use crate::error::{Error, Result};
use crate::expr::{chart_variables, Expr};
use crate::linalg::Mat;
use crate::manifold::{ChartMap, ManifoldModel};

/// A one-form field `β_i(x)` given by expressions in `x1..xn`.
#[derive(Clone, Debug)]
pub struct OneForm {
    source: Vec<String>,
    exprs: Vec<Expr>,
}

impl PartialEq for OneForm {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl OneForm {
    pub fn parse(source: &[String]) -> Result<OneForm> {
        let n = source.len();
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let exprs = source
            .iter()
            .map(|s| Expr::parse(s, &refs))
            .collect::<Result<_>>()?;
        Ok(OneForm {
            source: source.to_vec(),
            exprs,
        })
    }

    pub fn constant(values: &[f64]) -> OneForm {
        let src: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        OneForm::parse(&src).expect("numeric literals parse")
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.exprs.iter().map(|e| e.eval(x)).collect()
    }
}

/// Profile `φ(r)` of an `(α, β)`-metric `F = α φ(β/α)`.
#[derive(Clone, Debug)]
pub struct Profile {
    source: String,
    expr: Expr,
}

impl PartialEq for Profile {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Profile {
    pub fn parse(source: &str) -> Result<Profile> {
        Ok(Profile {
            source: source.to_string(),
            expr: Expr::parse(source, &["r"])?,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// A fiber expression for `F` itself in `x1..xn, y1..yn`.
#[derive(Clone, Debug)]
pub struct RawNorm {
    name: String,
    source: String,
    expr: Expr,
}

impl PartialEq for RawNorm {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl RawNorm {
    pub fn parse(name: &str, source: &str, n: usize) -> Result<RawNorm> {
        let names = chart_variables(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(RawNorm {
            name: name.to_string(),
            source: source.to_string(),
            expr: Expr::parse(source, &refs)?,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    /// `F = α`.
    Riemannian,
    /// `F = α + β`.
    Randers { beta: OneForm },
    /// `F = α φ(β/α)`.
    AlphaBeta { beta: OneForm, phi: Profile },
    /// `F = sqrt(L(α₁², α₂²))` with `α₁² = α² - α₂²`.
    Alpha1Alpha2 { generator: Generator },
    /// `F` given directly; the model only supplies the chart domain.
    Raw(RawNorm),
}

/// A Finsler metric: a family, the model it lives on and optionally the
/// chart its coordinates refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub model: Arc<ManifoldModel>,
    pub chart: Option<ChartMap>,
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MetricKind::Riemannian => write!(f, "riemannian")?,
            MetricKind::Randers { beta } => write!(f, "randers[{}]", beta.source.join(", "))?,
            MetricKind::AlphaBeta { beta, phi } => write!(
                f,
                "alpha-beta[{}; phi = {}]",
                beta.source.join(", "),
                phi.source
            )?,
            MetricKind::Alpha1Alpha2 { generator } => write!(f, "alpha1-alpha2[{generator}]")?,
            MetricKind::Raw(r) => write!(f, "raw[{}]", r.source)?,
        }
        write!(f, " on {}", self.model)
    }
}

impl MetricSpec {
    pub fn new(kind: MetricKind, model: ManifoldModel) -> Result<MetricSpec> {
        let spec = MetricSpec {
            kind,
            model: Arc::new(model),
            chart: None,
        };
        spec.check_dimensions()?;
        Ok(spec)
    }

    pub fn alpha1_alpha2(generator: &str, model: ManifoldModel) -> Result<MetricSpec> {
        MetricSpec::new(
            MetricKind::Alpha1Alpha2 {
                generator: Generator::resolve(generator)?,
            },
            model,
        )
    }

    pub fn riemannian(model: ManifoldModel) -> MetricSpec {
        MetricSpec {
            kind: MetricKind::Riemannian,
            model: Arc::new(model),
            chart: None,
        }
    }

    /// Named metrics: `riemannian`, `linear`, `cross02`, `cross005`,
    /// `randers`, `quartic-test`, `doubled-euclidean`, or any generator
    /// expression in `s, t`.
    pub fn from_registry(name: &str, model: ManifoldModel) -> Result<MetricSpec> {
        let n = model.dim();
        match name {
            "riemannian" | "euclidean" => Ok(MetricSpec::riemannian(model)),
            "randers" => {
                let mut b = vec![0.0; n];
                b[0] = 0.5;
                MetricSpec::new(
                    MetricKind::Randers {
                        beta: OneForm::constant(&b),
                    },
                    model,
                )
            }
            "quartic-test" => {
                let src = (1..=n)
                    .map(|i| format!("y{i}^4"))
                    .collect::<Vec<_>>()
                    .join("+");
                let raw = RawNorm::parse(name, &format!("({src})^0.25"), n)?;
                MetricSpec::new(MetricKind::Raw(raw), model)
            }
            "doubled-euclidean" => {
                let src = (1..=n)
                    .map(|i| format!("y{i}^2"))
                    .collect::<Vec<_>>()
                    .join("+");
                let raw = RawNorm::parse(name, &format!("2*sqrt({src})"), n)?;
                MetricSpec::new(MetricKind::Raw(raw), model)
            }
            _ => MetricSpec::alpha1_alpha2(name, model),
        }
    }

    fn check_dimensions(&self) -> Result<()> {
        let n = self.model.dim();
        let bad = match &self.kind {
            MetricKind::Randers { beta } | MetricKind::AlphaBeta { beta, .. } => {
                beta.exprs.len() != n
            }
            _ => false,
        };
        if bad {
            return Err(Error::Config(format!("one-form must have {n} components")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn generator(&self) -> Option<&Generator> {
        match &self.kind {
            MetricKind::Alpha1Alpha2 { generator } => Some(generator),
            _ => None,
        }
    }

    pub fn is_alpha1_alpha2(&self) -> bool {
        self.generator().is_some()
    }

    /// The same metric expressed in `chart`.
    pub fn in_chart(&self, chart: ChartMap) -> MetricSpec {
        MetricSpec {
            kind: self.kind.clone(),
            model: self.model.clone(),
            chart: Some(chart),
        }
    }

    /// The same metric with a different generator.
    pub fn with_generator(&self, generator: Generator) -> MetricSpec {
        MetricSpec {
            kind: MetricKind::Alpha1Alpha2 { generator },
            model: self.model.clone(),
            chart: self.chart.clone(),
        }
    }

    /// The Riemannian metric `α` of the same model and chart; used as a
    /// known-zero control.
    pub fn riemannian_control(&self) -> MetricSpec {
        MetricSpec {
            kind: MetricKind::Riemannian,
            model: self.model.clone(),
            chart: self.chart.clone(),
        }
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        match &self.chart {
            None => self.model.in_domain(x),
            Some(c) => x.iter().all(|v| v.is_finite()) && self.model.in_domain(&c.point(x)),
        }
    }

    /// `α` and `b` at chart point `x`.
    pub fn fields<T: Scalar>(&self, x: &[T]) -> (Mat<T>, Mat<T>) {
        self.model.fields(self.chart.as_ref(), x)
    }

    fn beta<T: Scalar>(&self, form: &OneForm, x: &[T]) -> Vec<T> {
        match &self.chart {
            None => form.eval(x),
            Some(c) => {
                let bx = form.eval(&c.point(x));
                c.jacobian(x).transpose().mul_vec(&bx)
            }
        }
    }

    /// `(α₁², α₂²)` at `(x, y)`.
    pub fn split_squares<T: Scalar>(&self, x: &[T], y: &[T]) -> (T, T) {
        let (a, b) = self.fields(x);
        let q = a.bilinear(y, y);
        let t = b.bilinear(y, y);
        (q - t.clone(), t)
    }

    /// `F²(x, y)`; domain failures give NaN.
    pub fn f_squared<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        match &self.kind {
            MetricKind::Riemannian => {
                let a = self.model.fields(self.chart.as_ref(), x).0;
                a.bilinear(y, y)
            }
            MetricKind::Randers { beta } => {
                let a = self.fields(x).0;
                let bx = self.beta(beta, x);
                let f = a.bilinear(y, y).sqrt() + crate::derivjet::dot(&bx, y);
                f.square()
            }
            MetricKind::AlphaBeta { beta, phi } => {
                let a = self.fields(x).0;
                let q = a.bilinear(y, y);
                let bx = self.beta(beta, x);
                let r = crate::derivjet::dot(&bx, y) / q.sqrt();
                q * phi.expr.eval(&[r]).square()
            }
            MetricKind::Alpha1Alpha2 { generator } => {
                let (s, t) = self.split_squares(x, y);
                generator.eval(s, t)
            }
            MetricKind::Raw(raw) => {
                let (xs, ys) = match &self.chart {
                    None => (x.to_vec(), y.to_vec()),
                    Some(c) => (c.point(x), c.jacobian(x).mul_vec(y)),
                };
                let vars: Vec<T> = xs.into_iter().chain(ys).collect();
                raw.expr.eval(&vars).square()
            }
        }
    }

    /// `F(x, y)` in double precision, without argument checks.
    pub fn norm(&self, x: &[f64], y: &[f64]) -> f64 {
        self.f_squared(x, y).sqrt()
    }
}

/// The Minkowski norm `F(x, ·)` at a fixed base point, with the model
/// fields evaluated once.
#[derive(Clone, Debug)]
pub struct FrozenNorm {
    spec: MetricSpec,
    x: Vec<f64>,
    alpha: Mat<f64>,
    b: Mat<f64>,
    beta: Option<Vec<f64>>,
    /// Raw fields: model-chart point and Jacobian.
    raw_point: Vec<f64>,
    raw_jacobian: Option<Mat<f64>>,
}

impl MetricSpec {
    pub fn at(&self, x: &[f64]) -> Result<FrozenNorm> {
        let n = self.dim();
        if x.len() != n || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "expected {n} finite coordinates, got {x:?}"
            )));
        }
        if !self.in_domain(x) {
            return Err(Error::Domain(format!("{x:?} outside the chart")));
        }
        let (alpha, b) = self.fields(x);
        let beta = match &self.kind {
            MetricKind::Randers { beta } | MetricKind::AlphaBeta { beta, .. } => {
                Some(self.beta(beta, x))
            }
            _ => None,
        };
        let (raw_point, raw_jacobian) = match &self.chart {
            Some(c) => (c.point(x), Some(c.jacobian(x))),
            None => (x.to_vec(), None),
        };
        Ok(FrozenNorm {
            spec: self.clone(),
            x: x.to_vec(),
            alpha,
            b,
            beta,
            raw_point,
            raw_jacobian,
        })
    }
}

impl FrozenNorm {
    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn f_squared<T: Scalar>(&self, y: &[T]) -> T {
        let q = || Mat::<T>::from_f64(&self.alpha).bilinear(y, y);
        let beta_y = || {
            let b: Vec<T> = self
                .beta
                .as_ref()
                .expect("one-form frozen")
                .iter()
                .map(|v| T::cst(*v))
                .collect();
            crate::derivjet::dot(&b, y)
        };
        match &self.spec.kind {
            MetricKind::Riemannian => q(),
            MetricKind::Randers { .. } => (q().sqrt() + beta_y()).square(),
            MetricKind::AlphaBeta { phi, .. } => {
                let q = q();
                let r = beta_y() / q.sqrt();
                q * phi.expr.eval(&[r]).square()
            }
            MetricKind::Alpha1Alpha2 { generator } => {
                let t = Mat::<T>::from_f64(&self.b).bilinear(y, y);
                generator.eval(q() - t.clone(), t)
            }
            MetricKind::Raw(raw) => {
                let ys = match &self.raw_jacobian {
                    Some(j) => Mat::<T>::from_f64(j).mul_vec(y),
                    None => y.to_vec(),
                };
                let vars: Vec<T> = self
                    .raw_point
                    .iter()
                    .map(|v| T::cst(*v))
                    .chain(ys)
                    .collect();
                raw.expr.eval(&vars).square()
            }
        }
    }

    pub fn norm(&self, y: &[f64]) -> f64 {
        self.f_squared(y).sqrt()
    }
}

/// `F²` as a field of the fiber only; the base-point argument is ignored.
impl ScalarField for FrozenNorm {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn eval<T: Scalar>(&self, _x: &[T], y: &[T]) -> T {
        self.f_squared(y)
    }
}

impl ScalarField for MetricSpec {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        self.f_squared(x, y)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        MetricSpec::in_domain(self, x)
    }
}

/// `F(x, y)` with argument and positivity checks.
pub fn norm_value(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = spec.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::Domain(format!("expected {n} coordinates")));
    }
    check_fiber(y)?;
    if !spec.in_domain(x) {
        return Err(Error::Domain(format!("{x:?} outside the chart")));
    }
    let f2 = spec.f_squared(x, y);
    if let MetricKind::Alpha1Alpha2 { generator } = &spec.kind {
        if !(f2 > 0.0) {
            let (s, t) = spec.split_squares(x, y);
            return Err(Error::InvalidGenerator(format!(
                "{} gives L({s}, {t}) = {f2}",
                generator.source()
            )));
        }
    }
    if !f2.is_finite() {
        return Err(Error::Evaluation {
            order: "x[0]y[0]".into(),
        });
    }
    Ok(f2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat11() -> ManifoldModel {
        ManifoldModel::FlatProduct { n1: 1, n2: 1 }
    }

    #[test]
    fn euclidean_norm() {
        let spec = MetricSpec::from_registry("linear", flat11()).unwrap();
        assert_eq!(norm_value(&spec, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn cross_term_vanishes_on_axis() {
        let spec = MetricSpec::from_registry("cross02", flat11()).unwrap();
        assert_eq!(norm_value(&spec, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn randers_value() {
        let spec = MetricSpec::from_registry("randers", flat11()).unwrap();
        assert_eq!(norm_value(&spec, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.5);
    }

    #[test]
    fn randers_equals_alpha_beta_with_linear_profile() {
        let beta = OneForm::parse(&["0.3*x2".into(), "0.1".into()]).unwrap();
        let model = ManifoldModel::PolarPlane;
        let r = MetricSpec::new(MetricKind::Randers { beta: beta.clone() }, model.clone()).unwrap();
        let ab = MetricSpec::new(
            MetricKind::AlphaBeta {
                beta,
                phi: Profile::parse("1 + r").unwrap(),
            },
            model,
        )
        .unwrap();
        for (x, y) in [([1.0, 0.5], [0.3, -0.9]), ([-0.7, 1.2], [1.0, 1.0])] {
            let a = norm_value(&r, &x, &y).unwrap();
            let b = norm_value(&ab, &x, &y).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_generator_rejected() {
        let spec = MetricSpec::alpha1_alpha2("s - 2*t", flat11()).unwrap();
        let e = norm_value(&spec, &[0.0, 0.0], &[0.1, 1.0]).unwrap_err();
        assert!(matches!(e, Error::InvalidGenerator(_)));
    }

    #[test]
    fn zero_fiber_rejected() {
        let spec = MetricSpec::from_registry("cross02", flat11()).unwrap();
        assert!(matches!(
            norm_value(&spec, &[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn frozen_norm_matches_spec() {
        use crate::manifold::normal_chart;
        let hopf = ManifoldModel::HopfSphere;
        let report = normal_chart(&hopf, &[0.1, -0.2, 0.3], None).unwrap();
        let beta = OneForm::parse(&["0.1*x2".into(), "0.2".into(), "0.1*x1*x3".into()]).unwrap();
        let specs = [
            MetricSpec::from_registry("cross02", hopf.clone()).unwrap(),
            MetricSpec::from_registry("quartic-test", hopf.clone()).unwrap(),
            MetricSpec::new(MetricKind::Randers { beta: beta.clone() }, hopf.clone()).unwrap(),
            MetricSpec::new(
                MetricKind::AlphaBeta {
                    beta,
                    phi: Profile::parse("1 + r^2").unwrap(),
                },
                hopf.clone(),
            )
            .unwrap(),
        ];
        for spec in specs {
            for s in [spec.clone(), spec.in_chart(report.chart.clone())] {
                let x = [0.05, 0.1, -0.02];
                let frozen = s.at(&x).unwrap();
                for y in [[0.3, -0.4, 0.8], [1.0, 0.0, 0.0]] {
                    let a = frozen.norm(&y);
                    let b = s.norm(&x, &y);
                    assert!((a - b).abs() < 1e-14 * b, "{s}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn chart_pullback_preserves_norm() {
        use crate::manifold::normal_chart;
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let report = normal_chart(&spec.model, &[1.0, 0.0], Some(&[0.8, 0.6])).unwrap();
        let local = spec.in_chart(report.chart.clone());
        // at the chart center the frame maps (a, a') to the alignment vector
        let f_local = norm_value(&local, &[0.0, 0.0], &[0.6, 0.8]).unwrap();
        let f_global = norm_value(&spec, &[1.0, 0.0], &[0.8, 0.6]).unwrap();
        assert!((f_local - f_global).abs() < 1e-14);
    }
}
