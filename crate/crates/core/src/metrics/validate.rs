use serde::{Deserialize, Serialize};

use super::{MetricKind, MetricSpec};
use crate::derivjet::{taylor_eval, MultiOrder};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Mat};
use crate::sampling::sphere_directions;

pub const HOMOGENEITY_TOL: f64 = 1e-9;
const SCALES: [f64; 3] = [0.5, 2.0, 7.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub x: Vec<f64>,
    pub num_directions: usize,
    pub tol: f64,
    pub positivity_ok: bool,
    pub homogeneity_ok: bool,
    pub convexity_ok: bool,
    pub min_hessian_eigenvalue: f64,
    pub max_homogeneity_residual: f64,
    /// `max |sL₁ + tL₂ - L| / L`; zero for non-`(α₁, α₂)` families.
    pub euler_residual_max: f64,
    pub worst_direction: Vec<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.positivity_ok && self.homogeneity_ok && self.convexity_ok
    }
}

/// `½` times the `y`-Hessian of `F²`.
pub(crate) fn hessian(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<Mat<f64>> {
    let n = spec.dim();
    let mut orders = Vec::new();
    for i in 0..n {
        for j in i..n {
            orders.push(MultiOrder::from_indices(n, None, &[i, j]));
        }
    }
    let t = taylor_eval(spec, x, y, &orders)?;
    let mut g = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * t.entries[&orders[k]];
            g[(i, j)] = v;
            g[(j, i)] = v;
            k += 1;
        }
    }
    Ok(g)
}

/// Scan deterministic directions at `x` for the Minkowski-norm axioms:
/// positivity, positive 1-homogeneity and strong convexity.
pub fn validate_norm(
    spec: &MetricSpec,
    x: &[f64],
    num_directions: usize,
    tol: f64,
) -> Result<ValidationReport> {
    let n = spec.dim();
    if num_directions < 8 {
        return Err(Error::Precondition("at least 8 directions required".into()));
    }
    if !spec.in_domain(x) {
        return Err(Error::Domain(format!("{x:?} outside the chart")));
    }
    let mut report = ValidationReport {
        x: x.to_vec(),
        num_directions,
        tol,
        positivity_ok: true,
        homogeneity_ok: true,
        convexity_ok: true,
        min_hessian_eigenvalue: f64::INFINITY,
        max_homogeneity_residual: 0.0,
        euler_residual_max: 0.0,
        worst_direction: vec![0.0; n],
    };
    for u in sphere_directions(n, num_directions) {
        let f = spec.f_squared(x, &u).sqrt();
        if !(f > 0.0) {
            report.positivity_ok = false;
            report.convexity_ok = false;
            report.min_hessian_eigenvalue = f64::NAN;
            report.worst_direction = u;
            continue;
        }
        for lambda in SCALES {
            let v: Vec<f64> = u.iter().map(|c| lambda * c).collect();
            let fl = spec.f_squared(x, &v).sqrt();
            let r = (fl - lambda * f).abs() / (lambda * f);
            report.max_homogeneity_residual = report.max_homogeneity_residual.max(r);
        }
        if let MetricKind::Alpha1Alpha2 { generator } = &spec.kind {
            let (s, t) = spec.split_squares(x, &u);
            report.euler_residual_max = report
                .euler_residual_max
                .max(generator.euler_residual(s, t));
        }
        let g = hessian(spec, x, &u)?;
        let e = symmetric_eigenvalues(&g)[0];
        if report.positivity_ok && e < report.min_hessian_eigenvalue {
            report.min_hessian_eigenvalue = e;
            report.worst_direction = u;
        }
    }
    report.homogeneity_ok = report.max_homogeneity_residual < HOMOGENEITY_TOL;
    if report.positivity_ok {
        report.convexity_ok = report.min_hessian_eigenvalue > tol;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldModel;

    #[test]
    fn euclidean_passes_with_unit_eigenvalue() {
        let spec = MetricSpec::from_registry("linear", ManifoldModel::FlatProduct { n1: 1, n2: 1 })
            .unwrap();
        let r = validate_norm(&spec, &[0.0, 0.0], 16, 1e-9).unwrap();
        assert!(r.passed());
        assert!((r.min_hessian_eigenvalue - 1.0).abs() < 1e-14);
        assert!(r.euler_residual_max < 1e-15);
    }

    #[test]
    fn cross02_is_strongly_convex() {
        let spec =
            MetricSpec::from_registry("cross02", ManifoldModel::FlatProduct { n1: 1, n2: 1 })
                .unwrap();
        let r = validate_norm(&spec, &[0.0, 0.0], 64, 1e-9).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.min_hessian_eigenvalue > 0.5);
    }

    #[test]
    fn quartic_degenerates_on_axes() {
        let spec =
            MetricSpec::from_registry("quartic-test", ManifoldModel::FlatProduct { n1: 1, n2: 1 })
                .unwrap();
        let r = validate_norm(&spec, &[0.0, 0.0], 64, 1e-9).unwrap();
        assert!(!r.convexity_ok);
        assert!(r.positivity_ok && r.homogeneity_ok);
        assert!(r.min_hessian_eigenvalue.abs() < 1e-12);
        let on_axis = r.worst_direction.iter().filter(|c| c.abs() < 1e-12).count();
        assert_eq!(on_axis, 1);
    }

    #[test]
    fn hopf_cross02_validates() {
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::HopfSphere).unwrap();
        let r = validate_norm(&spec, &[0.1, 0.2, -0.3], 32, 1e-9).unwrap();
        assert!(r.passed());
    }
}
