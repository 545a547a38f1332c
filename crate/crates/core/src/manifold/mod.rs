//! Geometry models: a Riemannian metric `α` and an `α`-orthogonal splitting
//! `TM = V1 ⊕ V2`, stored as the full `α` matrix and the lowered projector
//! `b` onto `V2`.

mod chart;
mod hopf;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use chart::{
    berwald_criterion, lemma31_check, normal_chart, ChartMap, Lemma31Report, NormalChartReport,
};

use crate::derivjet::Scalar;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::Mat;
use crate::sampling::kronecker;

pub const PROJECTOR_TOL: f64 = 1e-10;
pub const CHART_TOL: f64 = 1e-7;

/// How a custom model describes `V2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V2Source {
    /// Entries of the lowered projector `b_ij(x)`, row-major `n x n`.
    Projector(Vec<String>),
    /// Columns spanning `V2`, row-major `n x n2`; `b` is derived as
    /// `α W (Wᵀ α W)⁻¹ Wᵀ α`.
    Frame(Vec<String>),
}

/// A model whose fields are expressions in `x1..xn`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomModel {
    pub name: String,
    pub n1: usize,
    pub n2: usize,
    /// Row-major `n x n` entries of `α`.
    pub alpha: Vec<String>,
    pub v2: V2Source,
    /// Chart is the open ball of this radius around the origin.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(skip)]
    parsed: Option<ParsedCustom>,
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
struct ParsedCustom {
    alpha: Vec<Expr>,
    v2: Vec<Expr>,
}

impl CustomModel {
    pub fn new(
        name: &str,
        n1: usize,
        n2: usize,
        alpha: Vec<String>,
        v2: V2Source,
        radius: f64,
    ) -> Result<Self> {
        let mut m = CustomModel {
            name: name.to_string(),
            n1,
            n2,
            alpha,
            v2,
            radius,
            parsed: None,
        };
        m.parse()?;
        Ok(m)
    }

    /// Parse the expression strings; called by [`CustomModel::new`] and
    /// after deserialization.
    pub fn parse(&mut self) -> Result<()> {
        let n = self.n1 + self.n2;
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Model("both subbundles must be nontrivial".into()));
        }
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let parse_all = |v: &[String], want: usize, what: &str| -> Result<Vec<Expr>> {
            if v.len() != want {
                return Err(Error::Model(format!(
                    "{what}: expected {want} entries, got {}",
                    v.len()
                )));
            }
            v.iter().map(|s| Expr::parse(s, &refs)).collect()
        };
        let alpha = parse_all(&self.alpha, n * n, "alpha")?;
        let v2 = match &self.v2 {
            V2Source::Projector(v) => parse_all(v, n * n, "projector")?,
            V2Source::Frame(v) => parse_all(v, n * self.n2, "frame")?,
        };
        self.parsed = Some(ParsedCustom { alpha, v2 });
        Ok(())
    }

    fn parsed(&self) -> &ParsedCustom {
        self.parsed
            .as_ref()
            .expect("custom model parsed on construction")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ManifoldModel {
    /// Flat `R^n` with the coordinate splitting `R^n1 x R^n2`.
    FlatProduct {
        n1: usize,
        n2: usize,
    },
    /// `R^2 \ {0}` in Cartesian coordinates, `V1` angular, `V2` radial.
    PolarPlane,
    /// `SU(2)` with the bi-invariant round metric in exponential
    /// coordinates at the identity, `V2` tangent to the Hopf fibers.
    HopfSphere,
    Custom(CustomModel),
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldModel::FlatProduct { n1, n2 } => write!(f, "flat-product({n1},{n2})"),
            ManifoldModel::PolarPlane => write!(f, "polar-plane"),
            ManifoldModel::HopfSphere => write!(f, "hopf-sphere"),
            ManifoldModel::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl ManifoldModel {
    /// Resolve a registry name: `flat-product`, `flat-product:n1,n2`,
    /// `polar-plane`, `hopf-sphere`.
    pub fn builtin(name: &str) -> Result<ManifoldModel> {
        match name {
            "flat-product" => Ok(ManifoldModel::FlatProduct { n1: 2, n2: 1 }),
            "polar-plane" => Ok(ManifoldModel::PolarPlane),
            "hopf-sphere" => Ok(ManifoldModel::HopfSphere),
            _ => {
                if let Some(rest) = name.strip_prefix("flat-product:") {
                    let parts: Vec<&str> = rest.split(',').collect();
                    if let [a, b] = parts.as_slice() {
                        if let (Ok(n1), Ok(n2)) = (a.trim().parse(), b.trim().parse()) {
                            if n1 > 0 && n2 > 0 {
                                return Ok(ManifoldModel::FlatProduct { n1, n2 });
                            }
                        }
                    }
                }
                Err(Error::Config(format!("unknown model '{name}'")))
            }
        }
    }

    pub fn split(&self) -> (usize, usize) {
        match self {
            ManifoldModel::FlatProduct { n1, n2 } => (*n1, *n2),
            ManifoldModel::PolarPlane => (1, 1),
            ManifoldModel::HopfSphere => (2, 1),
            ManifoldModel::Custom(c) => (c.n1, c.n2),
        }
    }

    pub fn dim(&self) -> usize {
        let (a, b) = self.split();
        a + b
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            ManifoldModel::FlatProduct { .. } => true,
            ManifoldModel::PolarPlane => r2 > 1e-12,
            ManifoldModel::HopfSphere => r2 < hopf::RADIUS * hopf::RADIUS,
            ManifoldModel::Custom(c) => r2 < c.radius * c.radius,
        }
    }

    /// The full Riemannian metric `α_ij(x)`.
    pub fn alpha<T: Scalar>(&self, x: &[T]) -> Mat<T> {
        let n = self.dim();
        match self {
            ManifoldModel::FlatProduct { .. } | ManifoldModel::PolarPlane => Mat::identity(n),
            ManifoldModel::HopfSphere => hopf::alpha(x),
            ManifoldModel::Custom(c) => {
                let p = c.parsed();
                Mat::from_fn(n, n, |i, j| p.alpha[i * n + j].eval(x))
            }
        }
    }

    /// The lowered projector `b_ij(x)` onto `V2`.
    pub fn b<T: Scalar>(&self, x: &[T]) -> Mat<T> {
        let n = self.dim();
        match self {
            ManifoldModel::FlatProduct { n1, .. } => Mat::from_fn(n, n, |i, j| {
                T::cst(if i == j && i >= *n1 { 1.0 } else { 0.0 })
            }),
            ManifoldModel::PolarPlane => {
                let r2 = x[0].square() + x[1].square();
                Mat::from_fn(2, 2, |i, j| x[i].clone() * x[j].clone() / r2.clone())
            }
            ManifoldModel::HopfSphere => hopf::b(x),
            ManifoldModel::Custom(c) => {
                let p = c.parsed();
                match &c.v2 {
                    V2Source::Projector(_) => Mat::from_fn(n, n, |i, j| p.v2[i * n + j].eval(x)),
                    V2Source::Frame(_) => {
                        let w = Mat::from_fn(n, c.n2, |i, j| p.v2[i * c.n2 + j].eval(x));
                        let a = self.alpha(x);
                        let aw = a.mul(&w);
                        let gram = w.transpose().mul(&aw).inverse();
                        aw.mul(&gram).mul(&aw.transpose())
                    }
                }
            }
        }
    }

    /// `α` and `b` at `w`, expressed in `chart` when given.
    pub fn fields<T: Scalar>(&self, chart: Option<&ChartMap>, w: &[T]) -> (Mat<T>, Mat<T>) {
        match chart {
            None => (self.alpha(w), self.b(w)),
            Some(c) => {
                let x = c.point(w);
                let j = c.jacobian(w);
                (self.alpha(&x).congruence(&j), self.b(&x).congruence(&j))
            }
        }
    }

    /// Check that `b(x)` is a symmetric `α`-projector of rank `n2`.
    pub fn validate_projector(&self, x: &[f64]) -> Result<f64> {
        let (_, n2) = self.split();
        let a = self.alpha(x);
        let b = self.b(x);
        let ainv = a.inverse();
        let resid = b
            .mul(&ainv)
            .mul(&b)
            .sub(&b)
            .max_abs()
            .max(b.max_asymmetry());
        let p2 = ainv.mul(&b);
        let rank: f64 = (0..p2.rows).map(|i| p2[(i, i)]).sum();
        if (rank - n2 as f64).abs() > 1e-6 {
            return Err(Error::Model(format!(
                "projector at {x:?} has rank {rank:.6}, expected {n2}"
            )));
        }
        if resid > PROJECTOR_TOL {
            return Err(Error::Model(format!(
                "b is not an α-orthogonal projector at {x:?}: residual {resid:e}"
            )));
        }
        Ok(resid)
    }

    /// Deterministic base points inside the chart.
    pub fn sample_points(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..count)
            .map(|k| {
                let u = kronecker(n, k);
                match self {
                    ManifoldModel::FlatProduct { .. } => u.iter().map(|v| 2.0 * v - 1.0).collect(),
                    ManifoldModel::PolarPlane => {
                        if k == 0 {
                            return vec![1.0, 0.0];
                        }
                        let r = 0.6 + 1.4 * u[0];
                        let t = 2.0 * std::f64::consts::PI * u[1];
                        vec![r * t.cos(), r * t.sin()]
                    }
                    ManifoldModel::HopfSphere | ManifoldModel::Custom(_) => {
                        if k == 0 {
                            return vec![0.0; n];
                        }
                        let radius = match self {
                            ManifoldModel::Custom(c) => 0.5 * c.radius,
                            _ => 0.6,
                        };
                        u.iter()
                            .map(|v| radius * (2.0 * v - 1.0) / (n as f64).sqrt())
                            .collect()
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perturbed_flat() -> ManifoldModel {
        let alpha = vec![
            "1 + 0.1*x1^2".to_string(),
            "0.05*x1*x2".to_string(),
            "0.05*x1*x2".to_string(),
            "1 + 0.2*x2".to_string(),
        ];
        let frame = V2Source::Frame(vec!["0.3*x1 + 0.1*x2^2".into(), "1".into()]);
        ManifoldModel::Custom(CustomModel::new("perturbed", 1, 1, alpha, frame, 1.0).unwrap())
    }

    #[test]
    fn builtins_are_projectors() {
        let models = [
            ManifoldModel::FlatProduct { n1: 2, n2: 1 },
            ManifoldModel::PolarPlane,
            ManifoldModel::HopfSphere,
            perturbed_flat(),
        ];
        for m in &models {
            for x in m.sample_points(12) {
                assert!(m.in_domain(&x), "{m} {x:?}");
                m.validate_projector(&x).unwrap();
            }
        }
    }

    #[test]
    fn registry_names() {
        assert_eq!(ManifoldModel::builtin("flat-product:1,1").unwrap().dim(), 2);
        assert_eq!(
            ManifoldModel::builtin("hopf-sphere").unwrap().split(),
            (2, 1)
        );
        assert!(ManifoldModel::builtin("torus").is_err());
    }

    #[test]
    fn custom_rejects_bad_expression() {
        let e = CustomModel::new(
            "bad",
            1,
            1,
            vec!["1".into(), "0".into(), "0".into(), "1 + y1".into()],
            V2Source::Frame(vec!["0".into(), "1".into()]),
            1.0,
        )
        .unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }
}
