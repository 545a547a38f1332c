use serde::{Deserialize, Serialize};

use crate::curvature::{
    berwald_landsberg_tensors, ln_sigma_gradient, s_curvature_formula, s_curvature_with,
    s_vanishing_identities, IdentityCheck, DEFAULT_SIGMA_STEP,
};
use crate::error::{Error, Result};
use crate::manifold::{
    berwald_criterion, lemma31_check, normal_chart, Lemma31Report, ManifoldModel,
};
use crate::metrics::MetricSpec;
use crate::sampling::sphere_directions;
use crate::tolerances;

use super::unit_directions;

/// S-curvature is compared only where the formula exceeds this.
pub const S_SIGNIFICANT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem41Row {
    pub a: f64,
    pub a_prime: f64,
    pub s_direct: f64,
    pub s_formula: f64,
    pub rel_err: f64,
    pub abs_err: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem41Report {
    pub metric: String,
    pub p: Vec<f64>,
    pub a1: f64,
    pub a2: f64,
    pub tol_rel: f64,
    pub zero_tol: f64,
    pub nodes: usize,
    pub rows: Vec<Theorem41Row>,
    pub passed: bool,
}

/// `(cos t, sin t)` for `t = (2k + 1)π / 2m`, never on an axis.
pub fn off_axis_directions(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|k| {
            let t = (2 * k + 1) as f64 * std::f64::consts::PI / (2 * m) as f64;
            (t.cos(), t.sin())
        })
        .collect()
}

/// Direct S-curvature (jets plus differentiated density) against the
/// closed form, in the normal chart at `p` along `y = (a, 0, …, 0, a')`.
pub fn verify_theorem41(
    spec: &MetricSpec,
    p: &[f64],
    directions: &[(f64, f64)],
    tol_rel: f64,
    nodes: usize,
) -> Result<Theorem41Report> {
    if !spec.is_alpha1_alpha2() {
        return Err(Error::Precondition(format!(
            "{spec} is not an (α₁, α₂)-metric"
        )));
    }
    let report = normal_chart(&spec.model, p, None)?;
    let local = spec.in_chart(report.chart.clone());
    let n = spec.dim();
    let origin = vec![0.0; n];
    let grad = ln_sigma_gradient(&local, &origin, DEFAULT_SIGMA_STEP, nodes)?;
    let mut rows = Vec::with_capacity(directions.len());
    for &(a, ap) in directions {
        let formula = s_curvature_formula(spec, &report, a, ap)?;
        let mut y = vec![0.0; n];
        y[0] = a;
        y[n - 1] = ap;
        let direct = s_curvature_with(&local, &origin, &y, &grad)?;
        let abs_err = (direct.value - formula.s_formula).abs();
        let rel_err = abs_err / formula.s_formula.abs().max(f64::MIN_POSITIVE);
        let passed = if formula.s_formula.abs() > S_SIGNIFICANT {
            rel_err < tol_rel
        } else {
            rel_err < tol_rel
                || (direct.value.abs() < tolerances::S_ZERO
                    && formula.s_formula.abs() < tolerances::S_ZERO)
        };
        rows.push(Theorem41Row {
            a,
            a_prime: ap,
            s_direct: direct.value,
            s_formula: formula.s_formula,
            rel_err,
            abs_err,
            passed,
        });
    }
    Ok(Theorem41Report {
        metric: spec.to_string(),
        p: p.to_vec(),
        a1: report.a1,
        a2: report.a2,
        tol_rel,
        zero_tol: tolerances::S_ZERO,
        nodes: grad.quadrature_nodes,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem42Row {
    pub p: Vec<f64>,
    pub identities: IdentityCheck,
    pub max_s: f64,
    pub control_s: f64,
    pub s_threshold: f64,
    pub s_vanishes: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem42Report {
    pub metric: String,
    pub directions: usize,
    pub rows: Vec<Theorem42Row>,
    pub passed: bool,
}

/// At each point: do the normal-chart identities hold, and does `S`
/// vanish on sampled directions? Passes iff the verdicts agree everywhere.
pub fn verify_theorem42(
    spec: &MetricSpec,
    points: &[Vec<f64>],
    directions: usize,
    identity_tol: f64,
    nodes: usize,
) -> Result<Theorem42Report> {
    let dirs = sphere_directions(spec.dim(), directions);
    let control = spec.riemannian_control();
    let mut rows = Vec::new();
    for (index, p) in points.iter().enumerate() {
        let tag = |e: Error| e.at_sample(index);
        let report = normal_chart(&spec.model, p, None).map_err(tag)?;
        let identities = s_vanishing_identities(&report, identity_tol);
        let max_abs_s = |m: &MetricSpec| -> Result<f64> {
            let grad = ln_sigma_gradient(m, p, DEFAULT_SIGMA_STEP, nodes)?;
            let mut worst: f64 = 0.0;
            for y in unit_directions(m, p, &dirs)? {
                worst = worst.max(s_curvature_with(m, p, &y, &grad)?.value.abs());
            }
            Ok(worst)
        };
        let max_s = max_abs_s(spec).map_err(tag)?;
        let control_s = max_abs_s(&control).map_err(tag)?;
        let s_threshold = tolerances::NOISE_FACTOR * control_s.max(tolerances::S_FLOOR);
        let s_vanishes = max_s < s_threshold;
        rows.push(Theorem42Row {
            p: p.clone(),
            agree: identities.holds == s_vanishes,
            identities,
            max_s,
            control_s,
            s_threshold,
            s_vanishes,
        });
    }
    Ok(Theorem42Report {
        metric: spec.to_string(),
        directions,
        passed: rows.iter().all(|r| r.agree),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarExampleRow {
    pub p: Vec<f64>,
    pub radius: f64,
    pub a1: f64,
    pub a2: f64,
    pub lemma31: Lemma31Report,
    pub berwald_criterion: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarExampleReport {
    pub tol: f64,
    pub rows: Vec<PolarExampleRow>,
    pub passed: bool,
}

/// The polar plane: `|A₁| = 1/r`, `A₂ = 0`, the normal-chart identities, and the
/// Berwald criterion fails.
pub fn polar_example(points: &[Vec<f64>], tol: f64) -> Result<PolarExampleReport> {
    let model = ManifoldModel::PolarPlane;
    let mut rows = Vec::new();
    for p in points {
        let r = normal_chart(&model, p, None)?;
        let radius = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lemma31 = lemma31_check(&r, tol);
        let criterion = berwald_criterion(&r, tol);
        let passed = (r.a1.abs() - 1.0 / radius).abs() < tol
            && r.a2.abs() < tol
            && lemma31.passed
            && !criterion;
        rows.push(PolarExampleRow {
            p: p.clone(),
            radius,
            a1: r.a1,
            a2: r.a2,
            lemma31,
            berwald_criterion: criterion,
            passed,
        });
    }
    Ok(PolarExampleReport {
        tol,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfExampleReport {
    pub p: Vec<f64>,
    /// `[∂₁b₁₃], [∂₂b₂₃], [∂₃b₁₃], [∂₃b₂₃]`.
    pub zeros: [f64; 4],
    /// `[∂₁b₂₃], [∂₂b₁₃]`.
    pub twist: [f64; 2],
    pub max_zero: f64,
    pub twist_defect: f64,
    pub identities: IdentityCheck,
    pub lemma31: Lemma31Report,
    pub berwald_criterion: bool,
    pub tol: f64,
    pub passed: bool,
}

/// The Hopf sphere: only `[∂₁b₂₃] = -[∂₂b₁₃] = ±1` survive among the
/// mixed derivatives.
pub fn hopf_example(p: &[f64], tol: f64) -> Result<HopfExampleReport> {
    let r = normal_chart(&ManifoldModel::HopfSphere, p, None)?;
    let db = &r.db;
    let zeros = [db[0][0][2], db[1][1][2], db[2][0][2], db[2][1][2]];
    let twist = [db[0][1][2], db[1][0][2]];
    let max_zero = zeros.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let twist_defect = (twist[0].abs() - 1.0)
        .abs()
        .max((twist[1].abs() - 1.0).abs())
        .max((twist[0] + twist[1]).abs());
    let identities = s_vanishing_identities(&r, tol);
    let lemma31 = lemma31_check(&r, tol);
    let criterion = berwald_criterion(&r, tol);
    Ok(HopfExampleReport {
        p: p.to_vec(),
        zeros,
        twist,
        max_zero,
        twist_defect,
        passed: max_zero < tol
            && twist_defect < tol
            && identities.holds
            && lemma31.passed
            && !criterion,
        identities,
        lemma31,
        berwald_criterion: criterion,
        tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Suite {
    pub model: String,
    pub rows: Vec<(Vec<f64>, Lemma31Report)>,
    pub passed: bool,
}

pub fn lemma31_suite(model: &ManifoldModel, points: &[Vec<f64>], tol: f64) -> Result<Lemma31Suite> {
    let mut rows = Vec::new();
    for p in points {
        let r = normal_chart(model, p, None)?;
        rows.push((p.clone(), lemma31_check(&r, tol)));
    }
    Ok(Lemma31Suite {
        model: model.to_string(),
        passed: rows.iter().all(|(_, r)| r.passed),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop32Row {
    pub p: Vec<f64>,
    pub criterion: bool,
    pub max_berwald: f64,
    pub berwald_threshold: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop32Report {
    pub metric: String,
    pub rows: Vec<Prop32Row>,
    pub passed: bool,
}

/// Where the mixed block derivatives vanish, the Berwald tensor must too.
pub fn berwald_criterion_suite(
    spec: &MetricSpec,
    points: &[Vec<f64>],
    directions: usize,
    tol: f64,
) -> Result<Prop32Report> {
    let dirs = sphere_directions(spec.dim(), directions);
    let control = spec.riemannian_control();
    let mut rows = Vec::new();
    for (index, p) in points.iter().enumerate() {
        let tag = |e: Error| e.at_sample(index);
        let r = normal_chart(&spec.model, p, None).map_err(tag)?;
        let criterion = berwald_criterion(&r, tol);
        let (mut max_berwald, mut floor) = (0.0f64, tolerances::JET_FLOOR);
        for y in unit_directions(spec, p, &dirs).map_err(tag)? {
            max_berwald = max_berwald.max(
                berwald_landsberg_tensors(spec, p, &y)
                    .map_err(tag)?
                    .max_berwald,
            );
            floor = floor.max(
                berwald_landsberg_tensors(&control, p, &y)
                    .map_err(tag)?
                    .max_berwald,
            );
        }
        let berwald_threshold = tolerances::NOISE_FACTOR * floor;
        rows.push(Prop32Row {
            p: p.clone(),
            criterion,
            max_berwald,
            berwald_threshold,
            consistent: !criterion || max_berwald < berwald_threshold,
        });
    }
    Ok(Prop32Report {
        metric: spec.to_string(),
        passed: rows.iter().all(|r| r.consistent),
        rows,
    })
}
