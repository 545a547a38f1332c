use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curvature::berwald_landsberg_tensors;
use crate::derivjet::{shape, Jet, Scalar};
use crate::error::{Error, Result};
use crate::manifold::{normal_chart, ManifoldModel};
use crate::metrics::{FrozenNorm, Generator, MetricKind, MetricSpec};
use crate::sampling::circle_directions;
use crate::tolerances;

use super::unit_directions;

pub const MIN_ANGLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixTrace {
    pub angles: Vec<f64>,
    /// `Y_t = (cos t, sin t) / F(cos t, sin t)`.
    pub points: Vec<[f64; 2]>,
    /// Anticlockwise tangents with `g_Y(U, U) = 1`.
    pub tangents: Vec<[f64; 2]>,
    /// `c(t) = C_Y(U, U, U)`.
    pub trace: Vec<f64>,
    pub max_norm_defect: f64,
    pub max_unit_defect: f64,
}

impl IndicatrixTrace {
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .trace
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            });
        hi - lo
    }

    /// `|c|` at `t = 0, π/2, π, 3π/2`; needs a multiple of 4 angles.
    pub fn axis_values(&self) -> Vec<f64> {
        let m = self.angles.len();
        if m % 4 != 0 {
            return Vec::new();
        }
        (0..4).map(|k| self.trace[k * m / 4]).collect()
    }
}

/// `F²(Y + sV)` as a cubic jet in `s`.
fn directional(norm: &FrozenNorm, y: &[f64], v: &[f64]) -> Jet {
    let s = Jet::variable(shape(1, 3), 0.0, 0);
    let ys: Vec<Jet> = y.iter().zip(v).map(|(a, b)| s.clone() * *b + *a).collect();
    norm.f_squared(&ys)
}

/// Trace the Cartan tensor around the indicatrix of a 2D Minkowski norm.
pub fn indicatrix_cartan_trace(norm: &FrozenNorm, num_angles: usize) -> Result<IndicatrixTrace> {
    if norm.dim() != 2 {
        return Err(Error::UnsupportedDimension(norm.dim()));
    }
    if num_angles < MIN_ANGLES {
        return Err(Error::Precondition(format!(
            "need at least {MIN_ANGLES} angles, got {num_angles}"
        )));
    }
    let mut out = IndicatrixTrace {
        angles: Vec::with_capacity(num_angles),
        points: Vec::with_capacity(num_angles),
        tangents: Vec::with_capacity(num_angles),
        trace: Vec::with_capacity(num_angles),
        max_norm_defect: 0.0,
        max_unit_defect: 0.0,
    };
    for (k, u) in circle_directions(num_angles).into_iter().enumerate() {
        let t = 2.0 * PI * k as f64 / num_angles as f64;
        let du = [-u[1], u[0]];
        let along = directional(norm, &u, &du);
        let f2 = along.value();
        if !(f2 > 0.0) {
            return Err(Error::StrongConvexity(format!("F² = {f2} at t = {t}")));
        }
        let f = f2.sqrt();
        // d/dt F(u(t)) = (F²)' / 2F
        let df = along.coefficient(&[1]) / (2.0 * f);
        let y = [u[0] / f, u[1] / f];
        let tangent = [du[0] / f - u[0] * df / f2, du[1] / f - u[1] * df / f2];
        crate::curvature::fundamental_from_norm(norm, &y)
            .map_err(|e| Error::StrongConvexity(format!("at t = {t}: {e}")))?;
        let gtt = directional(norm, &y, &tangent).coefficient(&[2]);
        let scale = gtt.sqrt();
        let unit = [tangent[0] / scale, tangent[1] / scale];
        let cubic = directional(norm, &y, &unit);
        out.max_norm_defect = out.max_norm_defect.max((norm.norm(&y) - 1.0).abs());
        out.max_unit_defect = out
            .max_unit_defect
            .max((cubic.coefficient(&[2]) - 1.0).abs());
        out.angles.push(t);
        out.points.push(y);
        out.tangents.push(unit);
        // C(U,U,U) = ¼ d³/ds³ F²(Y + sU) = (6/4) a₃
        out.trace.push(1.5 * cubic.coefficient(&[3]));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma81Certificate {
    pub generator: String,
    pub radius: f64,
    pub max_landsberg: f64,
    pub witness_p: Vec<f64>,
    pub witness_y: Vec<f64>,
    /// Max Landsberg residual of the Riemannian control on the same grid.
    pub control_landsberg: f64,
    pub noise_floor: f64,
    pub noise_factor: f64,
    pub trace_spread: f64,
    pub trace_nonconstant: bool,
    pub axis_trace: Vec<f64>,
    pub axis_zero: bool,
    pub passed: bool,
}

/// Numerical evidence that the polar-plane metric with generator `L` is not
/// Landsberg: a Landsberg residual well above the noise floor on the circle
/// of radius `r0`, and a non-constant Cartan trace on the indicatrix.
pub fn lemma81_certificate(
    generator: &Generator,
    r0: f64,
    angles: usize,
    directions: usize,
) -> Result<Lemma81Certificate> {
    if generator.is_linear(1e-12) {
        return Err(Error::Precondition(format!(
            "L = {generator} is linear: the metric is Riemannian"
        )));
    }
    if !(r0 > 0.0) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r0}"
        )));
    }
    let model = ManifoldModel::PolarPlane;
    let spec = MetricSpec::new(
        MetricKind::Alpha1Alpha2 {
            generator: generator.clone(),
        },
        model.clone(),
    )?;
    let control = spec.riemannian_control();
    let dirs = circle_directions(directions);
    let mut best = (0.0f64, Vec::new(), Vec::new());
    let mut floor = 0.0f64;
    for p in circle_directions(angles)
        .iter()
        .map(|u| vec![r0 * u[0], r0 * u[1]])
    {
        for y in unit_directions(&spec, &p, &dirs)? {
            let l = berwald_landsberg_tensors(&spec, &p, &y)?.max_landsberg;
            if l > best.0 {
                best = (l, p.clone(), y.clone());
            }
            floor = floor.max(berwald_landsberg_tensors(&control, &p, &y)?.max_landsberg);
        }
    }
    let noise_floor = floor.max(tolerances::JET_FLOOR);
    let r = normal_chart(&model, &[r0, 0.0], None)?;
    let local = spec.in_chart(r.chart);
    let trace = indicatrix_cartan_trace(&local.at(&[0.0, 0.0])?, 4 * MIN_ANGLES)?;
    let axis_trace = trace.axis_values();
    let axis_zero = axis_trace.iter().all(|c| c.abs() < tolerances::AXIS_TRACE);
    let spread = trace.spread();
    let trace_nonconstant = spread > tolerances::NOISE_FACTOR * tolerances::JET_FLOOR;
    Ok(Lemma81Certificate {
        generator: generator.to_string(),
        radius: r0,
        passed: best.0 > tolerances::NOISE_FACTOR * noise_floor && trace_nonconstant && axis_zero,
        max_landsberg: best.0,
        witness_p: best.1,
        witness_y: best.2,
        control_landsberg: floor,
        noise_floor,
        noise_factor: tolerances::NOISE_FACTOR,
        trace_spread: spread,
        trace_nonconstant,
        axis_trace,
        axis_zero,
    })
}
