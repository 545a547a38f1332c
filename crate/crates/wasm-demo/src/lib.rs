//! Browser bindings for the demo page: indicatrix, S against direction and
//! Landsberg residual for a 2D metric. Every export returns a JSON string.

use std::f64::consts::PI;

use finsler_core::curvature::{
    berwald_landsberg_tensors, default_nodes, ln_sigma_gradient, s_curvature_with,
    DEFAULT_SIGMA_STEP,
};
use finsler_core::error::{Error, Result};
use finsler_core::manifold::ManifoldModel;
use finsler_core::metrics::MetricSpec;
use finsler_core::sampling::circle_directions;
use finsler_core::verify::{indicatrix_cartan_trace, MIN_ANGLES};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct IndicatrixCurve {
    pub metric: String,
    pub x: Vec<f64>,
    pub angles: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub cartan_trace: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct DirectionSeries {
    pub metric: String,
    pub x: Vec<f64>,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    /// Same series for the Riemannian metric of the model.
    pub control: Vec<f64>,
}

fn spec_2d(metric: &str, model: &str) -> Result<MetricSpec> {
    let model = ManifoldModel::builtin(model)?;
    if model.dim() != 2 {
        return Err(Error::UnsupportedDimension(model.dim()));
    }
    MetricSpec::from_registry(metric, model)
}

fn angles(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 2.0 * PI * k as f64 / count as f64)
        .collect()
}

fn unit(spec: &MetricSpec, x: &[f64], u: &[f64]) -> Vec<f64> {
    let f = spec.norm(x, u);
    u.iter().map(|v| v / f).collect()
}

pub fn indicatrix_curve(
    metric: &str,
    model: &str,
    x: &[f64],
    count: usize,
) -> Result<IndicatrixCurve> {
    let spec = spec_2d(metric, model)?;
    let t = indicatrix_cartan_trace(&spec.at(x)?, count.max(MIN_ANGLES))?;
    Ok(IndicatrixCurve {
        metric: spec.to_string(),
        x: x.to_vec(),
        angles: t.angles,
        points: t.points,
        cartan_trace: t.trace,
    })
}

pub fn s_series(metric: &str, model: &str, x: &[f64], count: usize) -> Result<DirectionSeries> {
    let spec = spec_2d(metric, model)?;
    let control = spec.riemannian_control();
    let eval = |s: &MetricSpec| -> Result<Vec<f64>> {
        let grad = ln_sigma_gradient(s, x, DEFAULT_SIGMA_STEP, default_nodes(2))?;
        circle_directions(count)
            .iter()
            .map(|u| Ok(s_curvature_with(s, x, &unit(s, x, u), &grad)?.value))
            .collect()
    };
    Ok(DirectionSeries {
        metric: spec.to_string(),
        x: x.to_vec(),
        angles: angles(count),
        values: eval(&spec)?,
        control: eval(&control)?,
    })
}

pub fn landsberg_series(
    metric: &str,
    model: &str,
    x: &[f64],
    count: usize,
) -> Result<DirectionSeries> {
    let spec = spec_2d(metric, model)?;
    let control = spec.riemannian_control();
    let eval = |s: &MetricSpec| -> Result<Vec<f64>> {
        circle_directions(count)
            .iter()
            .map(|u| Ok(berwald_landsberg_tensors(s, x, &unit(s, x, u))?.max_landsberg))
            .collect()
    };
    Ok(DirectionSeries {
        metric: spec.to_string(),
        x: x.to_vec(),
        angles: angles(count),
        values: eval(&spec)?,
        control: eval(&control)?,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("plain data serializes"))
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn indicatrix(
    metric: &str,
    model: &str,
    x: Vec<f64>,
    count: usize,
) -> std::result::Result<String, JsError> {
    to_js(indicatrix_curve(metric, model, &x, count))
}

#[wasm_bindgen]
pub fn s_curvature(
    metric: &str,
    model: &str,
    x: Vec<f64>,
    count: usize,
) -> std::result::Result<String, JsError> {
    to_js(s_series(metric, model, &x, count))
}

#[wasm_bindgen]
pub fn landsberg(
    metric: &str,
    model: &str,
    x: Vec<f64>,
    count: usize,
) -> std::result::Result<String, JsError> {
    to_js(landsberg_series(metric, model, &x, count))
}
