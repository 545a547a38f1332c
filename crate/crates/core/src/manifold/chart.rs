use serde::{Deserialize, Serialize};

use super::{ManifoldModel, CHART_TOL};
use crate::derivjet::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Second-order coordinate change `x(w) = p + E (w - ½ Γ(w, w))`.
///
/// `E` has the new coordinate directions as columns; `gamma[i][j][k]` are
/// the Christoffel symbols `Γ^i_jk` of `α` at `p` in the linear chart
/// `x = p + E z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartMap {
    pub p: Vec<f64>,
    pub frame: Mat<f64>,
    pub gamma: Vec<Vec<Vec<f64>>>,
}

impl ChartMap {
    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// The plain translation chart at `p`.
    pub fn translation(p: &[f64]) -> ChartMap {
        let n = p.len();
        ChartMap {
            p: p.to_vec(),
            frame: Mat::identity(n),
            gamma: vec![vec![vec![0.0; n]; n]; n],
        }
    }

    fn quad<T: Scalar>(&self, w: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..n {
                    for k in 0..n {
                        let g = self.gamma[i][j][k];
                        if g != 0.0 {
                            acc = acc + w[j].clone() * w[k].clone() * g;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    pub fn point<T: Scalar>(&self, w: &[T]) -> Vec<T> {
        let q = self.quad(w);
        let z: Vec<T> = w
            .iter()
            .zip(&q)
            .map(|(wi, qi)| wi.clone() - qi.clone() * 0.5)
            .collect();
        let ez = Mat::<T>::from_f64(&self.frame).mul_vec(&z);
        ez.into_iter().zip(&self.p).map(|(v, p)| v + *p).collect()
    }

    /// `∂x/∂w = E (I - Γ(w, ·))`.
    pub fn jacobian<T: Scalar>(&self, w: &[T]) -> Mat<T> {
        let n = self.dim();
        let inner = Mat::from_fn(n, n, |i, k| {
            let mut acc = T::cst(if i == k { 1.0 } else { 0.0 });
            for j in 0..n {
                let g = self.gamma[i][j][k];
                if g != 0.0 {
                    acc = acc - w[j].clone() * g;
                }
            }
            acc
        });
        Mat::<T>::from_f64(&self.frame).mul(&inner)
    }

    /// Compose with the linear change `w = Q w'`.
    pub fn rotate(&self, q: &Mat<f64>) -> ChartMap {
        let n = self.dim();
        let qinv = q.inverse();
        let mut gamma = vec![vec![vec![0.0; n]; n]; n];
        for (i, gi) in gamma.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                for (k, g) in gij.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                acc += qinv[(i, a)] * self.gamma[a][b][c] * q[(b, j)] * q[(c, k)];
                            }
                        }
                    }
                    *g = acc;
                }
            }
        }
        ChartMap {
            p: self.p.clone(),
            frame: self.frame.mul(q),
            gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalChartReport {
    pub p: Vec<f64>,
    pub split: (usize, usize),
    pub chart: ChartMap,
    /// `da[k][i][j] = ∂_k (α - b)_ij(p)` in the new chart.
    pub da: Vec<Vec<Vec<f64>>>,
    /// `db[k][i][j] = ∂_k b_ij(p)` in the new chart.
    pub db: Vec<Vec<Vec<f64>>>,
    /// `∂_k α_ij(p)` in the new chart; zero up to rounding.
    pub dalpha: Vec<Vec<Vec<f64>>>,
    pub a1: f64,
    pub a2: f64,
    /// `f_first_order[k][i][j] = ∂_k f_i^j(p)` for `i < n1 <= j`, where
    /// `V1` is spanned by `∂_i + f_i^j ∂_j`.
    pub f_first_order: Vec<Vec<Vec<f64>>>,
    /// `∂_k f̃_j^i(p)` stored as `[k][i][j]`, where `V2` is spanned by
    /// `∂_j + f̃_j^i ∂_i`.
    pub f_tilde_first_order: Vec<Vec<Vec<f64>>>,
    /// Components `(a, a')` of the normalized alignment vector, if given.
    pub aligned: Option<(f64, f64)>,
    /// `max |α(p) - I|` in the new chart.
    pub alpha_residual: f64,
    /// `max |b(p) - diag(0.., 1..)|` in the new chart.
    pub b_residual: f64,
}

impl NormalChartReport {
    pub fn n(&self) -> usize {
        self.p.len()
    }
}

fn alpha_orthonormalize(alpha: &Mat<f64>, candidates: &[Vec<f64>], want: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        if basis.len() == want {
            break;
        }
        let mut v = c.clone();
        for b in &basis {
            let proj = alpha.bilinear(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = alpha.bilinear(&v, &v).sqrt();
        let scale = alpha.bilinear(c, c).sqrt().max(1e-300);
        if norm > 1e-8 * scale {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Build a normal chart at `p`: a linear frame that is `α`-orthonormal and
/// adapted to `V1 ⊕ V2` (with `align` mapped to `(a, 0, …, 0, a')`), then
/// the quadratic correction that kills the Christoffel symbols of `α` at
/// `p`.
pub fn normal_chart(
    model: &ManifoldModel,
    p: &[f64],
    align: Option<&[f64]>,
) -> Result<NormalChartReport> {
    let n = model.dim();
    let (n1, n2) = model.split();
    if p.len() != n || !model.in_domain(p) {
        return Err(Error::Domain(format!(
            "point {p:?} outside the {model} chart"
        )));
    }
    model.validate_projector(p)?;
    let alpha = model.alpha(p);
    let b = model.b(p);
    let p2 = alpha.inverse().mul(&b);
    let p1 = Mat::<f64>::identity(n).sub(&p2);

    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut aligned = None;
    if let Some(y) = align {
        if y.len() != n {
            return Err(Error::Alignment(format!("expected {n} components")));
        }
        let u1 = p1.mul_vec(y);
        let u2 = p2.mul_vec(y);
        let full = alpha.bilinear(y, y).sqrt();
        let a = alpha.bilinear(&u1, &u1).sqrt();
        let ap = alpha.bilinear(&u2, &u2).sqrt();
        if !(full > 0.0) || a < 1e-10 * full || ap < 1e-10 * full {
            return Err(Error::Alignment(format!("{y:?} lies in V1 or V2")));
        }
        aligned = Some((a / full, ap / full));
        c1.push(u1);
        c2.push(u2);
    }
    for k in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        c1.push(p1.mul_vec(&e));
        c2.push(p2.mul_vec(&e));
    }
    let v1 = alpha_orthonormalize(&alpha, &c1, n1);
    let mut v2 = alpha_orthonormalize(&alpha, &c2, n2);
    if v1.len() != n1 || v2.len() != n2 {
        return Err(Error::Model(format!(
            "could not build an adapted frame at {p:?}"
        )));
    }
    if align.is_some() {
        let first = v2.remove(0);
        v2.push(first);
    }
    let cols: Vec<Vec<f64>> = v1.into_iter().chain(v2).collect();
    let frame = Mat::from_fn(n, n, |i, j| cols[j][i]);

    // Christoffel symbols in the linear chart x = p + E z.
    let linear = ChartMap {
        p: p.to_vec(),
        frame: frame.clone(),
        gamma: vec![vec![vec![0.0; n]; n]; n],
    };
    let z: Vec<Dual<f64>> = (0..n).map(|k| Dual::seed(0.0, k, n)).collect();
    let (ahat, _) = model.fields(Some(&linear), &z);
    let d = |k: usize, i: usize, j: usize| ahat[(i, j)].tangent(k);
    let ahat0 = ahat.values();
    let ainv0 = ahat0.inverse();
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for (i, gi) in gamma.iter_mut().enumerate() {
        for (j, gij) in gi.iter_mut().enumerate() {
            for (k, g) in gij.iter_mut().enumerate() {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ainv0[(i, l)] * 0.5 * (d(j, l, k) + d(k, l, j) - d(l, j, k));
                }
                *g = acc;
            }
        }
    }
    let chart = ChartMap {
        p: p.to_vec(),
        frame,
        gamma,
    };

    let w: Vec<Dual<f64>> = (0..n).map(|k| Dual::seed(0.0, k, n)).collect();
    let (at, bt) = model.fields(Some(&chart), &w);
    let grad = |m: &Mat<Dual<f64>>| -> Vec<Vec<Vec<f64>>> {
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| m[(i, j)].tangent(k)).collect())
                    .collect()
            })
            .collect()
    };
    let dalpha = grad(&at);
    let db = grad(&bt);
    let da: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|i| (0..n).map(|j| dalpha[k][i][j] - db[k][i][j]).collect())
                .collect()
        })
        .collect();

    let alpha_residual = at.values().sub(&Mat::identity(n)).max_abs();
    let target = Mat::from_fn(n, n, |i, j| if i == j && i >= n1 { 1.0 } else { 0.0 });
    let b_residual = bt.values().sub(&target).max_abs();
    if alpha_residual > CHART_TOL || b_residual > CHART_TOL {
        return Err(Error::Model(format!(
            "normal chart residuals too large: alpha {alpha_residual:e}, b {b_residual:e}"
        )));
    }

    // Frame tilts: V1 = ker P2 spanned by [I; F], V2 = ker P1 spanned by [G; I].
    let proj2 = at.inverse().mul(&bt);
    let proj1 = Mat::<Dual<f64>>::identity(n).sub(&proj2);
    let block = |m: &Mat<Dual<f64>>, r0: usize, rn: usize, c0: usize, cn: usize| {
        Mat::from_fn(rn, cn, |i, j| m[(r0 + i, c0 + j)].clone())
    };
    let f_mat = block(&proj2, n1, n2, n1, n2)
        .inverse()
        .mul(&block(&proj2, n1, n2, 0, n1))
        .scale(-1.0);
    let g_mat = block(&proj1, 0, n1, 0, n1)
        .inverse()
        .mul(&block(&proj1, 0, n1, n1, n2))
        .scale(-1.0);
    let mut f_first_order = vec![vec![vec![0.0; n]; n]; n];
    let mut f_tilde_first_order = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n1 {
            for j in n1..n {
                f_first_order[k][i][j] = f_mat[(j - n1, i)].tangent(k);
                f_tilde_first_order[k][i][j] = g_mat[(i, j - n1)].tangent(k);
            }
        }
    }

    Ok(NormalChartReport {
        p: p.to_vec(),
        split: (n1, n2),
        a1: db[0][0][n - 1],
        a2: db[n - 1][0][n - 1],
        chart,
        da,
        db,
        dalpha,
        f_first_order,
        f_tilde_first_order,
        aligned,
        alpha_residual,
        b_residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Report {
    /// `max |∂a + ∂b|`.
    pub a_plus_b: f64,
    /// `max |∂_k b_ij|` over same-block index pairs.
    pub same_block: f64,
    /// `max |∂_k b_ij + ∂_k f_i^j|` over mixed pairs.
    pub mixed_vs_f: f64,
    /// `max |∂_k b_ij - ∂_k f̃_j^i|` over mixed pairs.
    pub mixed_vs_f_tilde: f64,
    pub max_violation: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Check the first-order identities every normal chart satisfies.
pub fn lemma31_check(report: &NormalChartReport, tol: f64) -> Lemma31Report {
    let n = report.n();
    let n1 = report.split.0;
    let mut r = Lemma31Report {
        a_plus_b: 0.0,
        same_block: 0.0,
        mixed_vs_f: 0.0,
        mixed_vs_f_tilde: 0.0,
        max_violation: 0.0,
        tol,
        passed: false,
    };
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let db = report.db[k][i][j];
                r.a_plus_b = r.a_plus_b.max((report.da[k][i][j] + db).abs());
                if (i < n1) == (j < n1) {
                    r.same_block = r.same_block.max(db.abs());
                } else if i < n1 {
                    r.mixed_vs_f = r.mixed_vs_f.max((db + report.f_first_order[k][i][j]).abs());
                    r.mixed_vs_f_tilde = r
                        .mixed_vs_f_tilde
                        .max((db - report.f_tilde_first_order[k][i][j]).abs());
                }
            }
        }
    }
    r.max_violation = r
        .a_plus_b
        .max(r.same_block)
        .max(r.mixed_vs_f)
        .max(r.mixed_vs_f_tilde);
    r.passed = r.max_violation < tol;
    r
}

/// True iff every mixed-block derivative `∂_k b_ij(p)`, `i < n1 <= j`, is
/// below `tol`.
pub fn berwald_criterion(report: &NormalChartReport, tol: f64) -> bool {
    let n = report.n();
    let n1 = report.split.0;
    (0..n).all(|k| {
        (0..n1).all(|i| {
            (n1..n).all(|j| report.db[k][i][j].abs() < tol && report.db[k][j][i].abs() < tol)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{CustomModel, V2Source};

    fn fd_christoffels(model: &ManifoldModel, chart: &ChartMap) -> f64 {
        let n = chart.dim();
        let h = 1e-4;
        let field = |w: &[f64]| model.fields(Some(chart), w).0;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let mut wp = vec![0.0; n];
            let mut wm = vec![0.0; n];
            wp[k] = h;
            wm[k] = -h;
            let d = field(&wp).sub(&field(&wm)).scale(0.5 / h);
            worst = worst.max(d.max_abs());
        }
        worst
    }

    #[test]
    fn flat_product_is_trivial() {
        let m = ManifoldModel::FlatProduct { n1: 2, n2: 1 };
        let r = normal_chart(&m, &[0.3, -0.1, 2.0], None).unwrap();
        assert_eq!(r.a1, 0.0);
        assert_eq!(r.a2, 0.0);
        assert!(r.db.iter().flatten().flatten().all(|v| *v == 0.0));
        assert_eq!(lemma31_check(&r, 1e-12).max_violation, 0.0);
        assert!(berwald_criterion(&r, 1e-12));
    }

    #[test]
    fn polar_plane_at_unit_radius() {
        let r = normal_chart(
            &ManifoldModel::PolarPlane,
            &[1.0, 0.0],
            Some(&[0.0, 1.0][..]),
        );
        // (0,1) is purely angular at (1,0)
        assert!(matches!(r, Err(Error::Alignment(_))));
        let r = normal_chart(&ManifoldModel::PolarPlane, &[1.0, 0.0], Some(&[0.8, 0.6])).unwrap();
        assert!((r.a1.abs() - 1.0).abs() < 1e-12);
        assert!(r.a2.abs() < 1e-12);
        let (a, ap) = r.aligned.unwrap();
        assert!((a - 0.6).abs() < 1e-12 && (ap - 0.8).abs() < 1e-12);
        assert!(lemma31_check(&r, 1e-8).passed);
        assert!(!berwald_criterion(&r, 1e-6));
        assert!(fd_christoffels(&ManifoldModel::PolarPlane, &r.chart) < 1e-7);
    }

    #[test]
    fn polar_plane_other_radius() {
        let r = normal_chart(&ManifoldModel::PolarPlane, &[0.0, 2.0], None).unwrap();
        assert!((r.a1.abs() - 0.5).abs() < 1e-12);
        assert!(r.a2.abs() < 1e-12);
    }

    #[test]
    fn hopf_identity_matches_exponential_chart() {
        let m = ManifoldModel::HopfSphere;
        let r = normal_chart(&m, &[0.0; 3], None).unwrap();
        assert!(r.chart.frame.sub(&Mat::identity(3)).max_abs() < 1e-14);
        assert!(r
            .chart
            .gamma
            .iter()
            .flatten()
            .flatten()
            .all(|g| g.abs() < 1e-12));
        let db = &r.db;
        assert!(db[0][0][2].abs() < 1e-12 && db[1][1][2].abs() < 1e-12);
        assert!(db[2][0][2].abs() < 1e-12 && db[2][1][2].abs() < 1e-12);
        assert!((db[0][1][2] - 1.0).abs() < 1e-12);
        assert!((db[1][0][2] + 1.0).abs() < 1e-12);
        assert!(lemma31_check(&r, 1e-8).passed);
        assert!(!berwald_criterion(&r, 1e-6));
    }

    #[test]
    fn hopf_off_identity_is_still_normal() {
        let m = ManifoldModel::HopfSphere;
        let p = [0.2, -0.3, 0.25];
        let r = normal_chart(&m, &p, Some(&[0.3, 0.1, 0.9])).unwrap();
        assert!(fd_christoffels(&m, &r.chart) < 1e-7);
        assert!(lemma31_check(&r, 1e-8).passed);
        // left-invariant geometry: mixed derivatives keep magnitude 1
        let mixed: f64 = (0..3)
            .flat_map(|k| (0..2).map(move |i| (k, i)))
            .map(|(k, i)| r.db[k][i][2].powi(2))
            .sum();
        assert!((mixed - 2.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_flat_satisfies_identities() {
        let alpha = vec![
            "1 + 0.1*x1^2 + 0.2*x3".to_string(),
            "0.05*x1*x2".to_string(),
            "0".to_string(),
            "0.05*x1*x2".to_string(),
            "1 + 0.2*x2".to_string(),
            "0.1*x3*x1".to_string(),
            "0".to_string(),
            "0.1*x3*x1".to_string(),
            "1 - 0.3*x1".to_string(),
        ];
        let frame = V2Source::Frame(vec![
            "0.3*x1 + 0.1*x2^2".into(),
            "0.2*x3 - 0.1*x1".into(),
            "1".into(),
        ]);
        let m = ManifoldModel::Custom(CustomModel::new("p", 2, 1, alpha, frame, 1.0).unwrap());
        for p in m.sample_points(5) {
            let r = normal_chart(&m, &p, None).unwrap();
            assert!(
                lemma31_check(&r, 1e-8).passed,
                "{:?}",
                lemma31_check(&r, 1e-8)
            );
            assert!(fd_christoffels(&m, &r.chart) < 1e-7);
        }
    }

    #[test]
    fn block_rotation_gives_another_normal_chart() {
        let m = ManifoldModel::HopfSphere;
        let r = normal_chart(&m, &[0.1, 0.2, -0.1], None).unwrap();
        let t: f64 = 0.5;
        let q = Mat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) | (1, 1) => t.cos(),
            (0, 1) => -t.sin(),
            (1, 0) => t.sin(),
            (2, 2) => -1.0,
            _ => 0.0,
        });
        let rotated = r.chart.rotate(&q);
        assert!(fd_christoffels(&m, &rotated) < 1e-7);
        let (a, b) = m.fields(Some(&rotated), &[0.0; 3]);
        assert!(a.sub(&Mat::identity(3)).max_abs() < 1e-12);
        assert!((b[(2, 2)] - 1.0).abs() < 1e-12 && b[(0, 2)].abs() < 1e-12);
    }
}
