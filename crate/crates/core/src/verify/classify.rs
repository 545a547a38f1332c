use serde::{Deserialize, Serialize};

use crate::curvature::{
    curvature_bundle, default_nodes, ln_sigma_gradient, s_curvature_with, DEFAULT_SIGMA_STEP,
};
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::sampling::{sphere_directions, SEQUENCE_TAG};
use crate::tolerances;

use super::unit_directions;

pub const MIN_POINTS: usize = 5;
pub const MIN_DIRECTIONS: usize = 16;

/// Calibration of the "vanishes" verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// A quantity vanishes below this multiple of its noise floor.
    pub noise_factor: f64,
    /// Lower bound for the floors of jet quantities.
    pub jet_floor: f64,
    /// Lower bound for the S-curvature floor.
    pub s_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            noise_factor: tolerances::NOISE_FACTOR,
            jet_floor: tolerances::JET_FLOOR,
            s_floor: tolerances::S_FLOOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyPlan {
    pub points: Vec<Vec<f64>>,
    pub directions: usize,
    pub nodes: usize,
    pub sequence: String,
}

impl ClassifyPlan {
    pub fn for_spec(
        spec: &MetricSpec,
        points: usize,
        directions: usize,
        nodes: Option<usize>,
    ) -> ClassifyPlan {
        ClassifyPlan {
            points: spec.model.sample_points(points),
            directions,
            nodes: nodes.unwrap_or_else(|| default_nodes(spec.dim())),
            sequence: SEQUENCE_TAG.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub max_mean_cartan: f64,
    pub max_berwald: f64,
    pub max_landsberg: f64,
    pub max_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub riemannian: bool,
    pub berwald: bool,
    pub landsberg: bool,
    pub s_vanishing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub flags: Flags,
    pub residuals: Residuals,
    /// The same maxima for the Riemannian metric of the same model.
    pub control: Residuals,
    /// `max(control, absolute floor)` per quantity.
    pub noise_floors: Residuals,
    pub thresholds: Thresholds,
    pub plan: ClassifyPlan,
    pub notes: Vec<String>,
}

/// Maxima of `|I|`, `|B|`, `|Λ|` and `|S|` over the plan, with directions
/// scaled to `F = 1`.
pub fn residual_maxima(spec: &MetricSpec, plan: &ClassifyPlan) -> Result<Residuals> {
    let mut r = Residuals::default();
    let dirs = sphere_directions(spec.dim(), plan.directions);
    let mut index = 0;
    for x in &plan.points {
        let grad = ln_sigma_gradient(spec, x, DEFAULT_SIGMA_STEP, plan.nodes)
            .map_err(|e| e.at_sample(index))?;
        for y in unit_directions(spec, x, &dirs).map_err(|e| e.at_sample(index))? {
            let tag = |e: Error| e.at_sample(index);
            let b = curvature_bundle(spec, x, &y).map_err(tag)?;
            let s = s_curvature_with(spec, x, &y, &grad).map_err(tag)?;
            let i_max = b.cartan.i_cov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            r.max_mean_cartan = r.max_mean_cartan.max(i_max);
            r.max_berwald = r.max_berwald.max(b.tensors.max_berwald);
            r.max_landsberg = r.max_landsberg.max(b.tensors.max_landsberg);
            r.max_s = r.max_s.max(s.value.abs());
            index += 1;
        }
    }
    Ok(r)
}

/// Riemannian / Berwald / Landsberg / S-vanishing verdicts, each against a
/// noise floor measured on the Riemannian metric of the same model.
pub fn classify(
    spec: &MetricSpec,
    plan: &ClassifyPlan,
    thresholds: Thresholds,
) -> Result<ClassificationReport> {
    if plan.points.len() < MIN_POINTS || plan.directions < MIN_DIRECTIONS {
        return Err(Error::Precondition(format!(
            "classification needs at least {MIN_POINTS} points and {MIN_DIRECTIONS} directions"
        )));
    }
    let residuals = residual_maxima(spec, plan)?;
    let control = residual_maxima(&spec.riemannian_control(), plan)?;
    let noise_floors = Residuals {
        max_mean_cartan: control.max_mean_cartan.max(thresholds.jet_floor),
        max_berwald: control.max_berwald.max(thresholds.jet_floor),
        max_landsberg: control.max_landsberg.max(thresholds.jet_floor),
        max_s: control.max_s.max(thresholds.s_floor),
    };
    let below = |v: f64, floor: f64| v < thresholds.noise_factor * floor;
    let mut flags = Flags {
        riemannian: below(residuals.max_mean_cartan, noise_floors.max_mean_cartan),
        berwald: below(residuals.max_berwald, noise_floors.max_berwald),
        landsberg: below(residuals.max_landsberg, noise_floors.max_landsberg),
        s_vanishing: below(residuals.max_s, noise_floors.max_s),
    };
    let mut notes = Vec::new();
    if flags.berwald && !flags.landsberg {
        notes.push(format!(
            "Berwald residual {:.3e} is below threshold but Landsberg residual {:.3e} is not; landsberg flag forced",
            residuals.max_berwald, residuals.max_landsberg
        ));
        flags.landsberg = true;
    }
    if flags.berwald && !flags.s_vanishing {
        notes.push(format!(
            "Berwald residual {:.3e} is below threshold but max |S| = {:.3e} is not; s_vanishing flag forced",
            residuals.max_berwald, residuals.max_s
        ));
        flags.s_vanishing = true;
    }
    Ok(ClassificationReport {
        metric: spec.to_string(),
        flags,
        residuals,
        control,
        noise_floors,
        thresholds,
        plan: plan.clone(),
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerwaldLandsbergReport {
    pub metric: String,
    pub samples: usize,
    pub tol: f64,
    /// Samples with `max |B| < tol` and `max |Λ| >= n² tol`.
    pub violations: Vec<(Vec<f64>, Vec<f64>)>,
    pub berwald_samples: usize,
}

/// Samplewise `B ≈ 0 ⇒ Λ ≈ 0` over `count` points with one direction each.
pub fn berwald_implies_landsberg(
    spec: &MetricSpec,
    count: usize,
    tol: f64,
) -> Result<BerwaldLandsbergReport> {
    let n = spec.dim();
    let points = spec.model.sample_points(count);
    let dirs = sphere_directions(n, count);
    let mut violations = Vec::new();
    let mut berwald_samples = 0;
    for (index, (x, y)) in points.iter().zip(&dirs).enumerate() {
        let t = crate::curvature::berwald_landsberg_tensors(spec, x, y)
            .map_err(|e| e.at_sample(index))?;
        if t.max_berwald < tol {
            berwald_samples += 1;
            if t.max_landsberg >= (n * n) as f64 * tol {
                violations.push((x.clone(), y.clone()));
            }
        }
    }
    Ok(BerwaldLandsbergReport {
        metric: spec.to_string(),
        samples: count,
        tol,
        violations,
        berwald_samples,
    })
}
