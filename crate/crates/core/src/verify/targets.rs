use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curvature::default_nodes;
use crate::error::{Error, Result};
use crate::landsberg::{
    canonical_f, invariance_check, linearity_defect, FiberField, InvarianceReport, LinearMap,
};
use crate::manifold::{normal_chart, ManifoldModel};
use crate::metrics::MetricSpec;
use crate::sampling::sphere_directions;
use crate::tolerances;

use super::indicatrix::lemma81_certificate;
use super::theorems::{
    berwald_criterion_suite, hopf_example, lemma31_suite, off_axis_directions, polar_example,
    verify_theorem41, verify_theorem42,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyTarget {
    Theorem41,
    Theorem42,
    Example33,
    Example34,
    Lemma31,
    Lemma51,
    Lemma81,
    Prop32,
}

impl VerifyTarget {
    pub const ALL: [VerifyTarget; 8] = [
        VerifyTarget::Theorem41,
        VerifyTarget::Theorem42,
        VerifyTarget::Example33,
        VerifyTarget::Example34,
        VerifyTarget::Lemma31,
        VerifyTarget::Lemma51,
        VerifyTarget::Lemma81,
        VerifyTarget::Prop32,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerifyTarget::Theorem41 => "theorem41",
            VerifyTarget::Theorem42 => "theorem42",
            VerifyTarget::Example33 => "example33",
            VerifyTarget::Example34 => "example34",
            VerifyTarget::Lemma31 => "lemma31",
            VerifyTarget::Lemma51 => "lemma51",
            VerifyTarget::Lemma81 => "lemma81",
            VerifyTarget::Prop32 => "prop32",
        }
    }
}

impl fmt::Display for VerifyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VerifyTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<VerifyTarget> {
        VerifyTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown verification target '{s}'")))
    }
}

/// Overrides for a verification run; `None` picks the target's default.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub spec: MetricSpec,
    pub points: Option<usize>,
    pub directions: Option<usize>,
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub xi: Option<String>,
}

impl VerifyOptions {
    pub fn new(spec: MetricSpec) -> Self {
        VerifyOptions {
            spec,
            points: None,
            directions: None,
            nodes: None,
            tol: None,
            xi: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: VerifyTarget,
    pub passed: bool,
    pub summary: String,
    /// Every parameter the run used, defaults included.
    pub settings: Value,
    pub report: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma51Report {
    pub p: Vec<f64>,
    pub map: LinearMap,
    pub canonical: InvarianceReport,
    pub probe: InvarianceReport,
    pub linearity_defect: f64,
    pub linearity_tol: f64,
    pub passed: bool,
}

/// Isometry invariance of the Landsberg operator for the norm at `p`, seen
/// in the normal chart (where `O(n₁) × O(n₂)` acts by isometries), on the
/// canonical field and on a fixed probe field.
pub fn lemma51_check(
    spec: &MetricSpec,
    p: &[f64],
    map: &LinearMap,
    fibers: usize,
) -> Result<Lemma51Report> {
    let n = spec.dim();
    let r = normal_chart(&spec.model, p, None)?;
    let local = spec.in_chart(r.chart);
    let origin = vec![0.0; n];
    let norm = local.at(&origin)?;
    let samples = sphere_directions(n, fibers);
    let f = canonical_f(&local, &origin)?;
    let probe = FiberField::probe(n);
    let canonical = invariance_check(&norm, map, &f, &samples, tolerances::SOLUTION)?;
    let probe_report = invariance_check(&norm, map, &probe, &samples, tolerances::SOLUTION)?;
    let linearity = linearity_defect(&norm, &f, &probe, 2.0, 3.0, &samples)?;
    Ok(Lemma51Report {
        p: p.to_vec(),
        map: map.clone(),
        passed: canonical.passed && probe_report.passed && linearity < tolerances::LINEARITY,
        canonical,
        probe: probe_report,
        linearity_defect: linearity,
        linearity_tol: tolerances::LINEARITY,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run_target(target: VerifyTarget, opts: &VerifyOptions) -> Result<TargetReport> {
    let spec = &opts.spec;
    let model: &ManifoldModel = &spec.model;
    let nodes = opts.nodes.unwrap_or_else(|| default_nodes(spec.dim()));
    let (passed, summary, settings, report) = match target {
        VerifyTarget::Theorem41 => {
            let tol = opts.tol.unwrap_or(tolerances::S_AGREEMENT);
            let p = model.sample_points(1).remove(0);
            let mut dirs = vec![(0.6, 0.8)];
            dirs.extend(off_axis_directions(opts.directions.unwrap_or(8)));
            let r = verify_theorem41(spec, &p, &dirs, tol, nodes)?;
            let worst = r.rows.iter().map(|row| row.rel_err).fold(0.0, f64::max);
            let summary = format!(
                "{} directions at {:?}: worst relative error {worst:.3e}, max |S| {:.3e}",
                r.rows.len(),
                r.p,
                r.rows
                    .iter()
                    .map(|row| row.s_formula.abs())
                    .fold(0.0, f64::max)
            );
            let settings = json!({"p": p, "directions": dirs, "tol_rel": tol, "zero_tol": tolerances::S_ZERO, "nodes": nodes});
            (r.passed, summary, settings, to_value(&r))
        }
        VerifyTarget::Theorem42 => {
            let tol = opts.tol.unwrap_or(tolerances::CHART_IDENTITY);
            let points = model.sample_points(opts.points.unwrap_or(3));
            let directions = opts.directions.unwrap_or(16);
            let r = verify_theorem42(spec, &points, directions, tol, nodes)?;
            let agree = r.rows.iter().filter(|row| row.agree).count();
            let summary = format!("verdicts agree at {agree}/{} points", r.rows.len());
            let settings = json!({"points": points, "directions": directions, "identity_tol": tol, "nodes": nodes});
            (r.passed, summary, settings, to_value(&r))
        }
        VerifyTarget::Example33 => {
            let tol = opts.tol.unwrap_or(tolerances::CHART_IDENTITY);
            let points = match opts.points {
                Some(k) => ManifoldModel::PolarPlane.sample_points(k),
                None => vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-0.5, 0.5]],
            };
            let r = polar_example(&points, tol)?;
            let summary = format!(
                "polar plane at {} points: |A1| r = {:?}",
                r.rows.len(),
                r.rows
                    .iter()
                    .map(|row| row.a1.abs() * row.radius)
                    .collect::<Vec<_>>()
            );
            (
                r.passed,
                summary,
                json!({"points": points, "tol": tol}),
                to_value(&r),
            )
        }
        VerifyTarget::Example34 => {
            let tol = opts.tol.unwrap_or(tolerances::CHART_IDENTITY);
            let r = hopf_example(&[0.0; 3], tol)?;
            let summary = format!(
                "hopf sphere at the identity: max zero entry {:.3e}, twist {:?}",
                r.max_zero, r.twist
            );
            (
                r.passed,
                summary,
                json!({"p": [0.0, 0.0, 0.0], "tol": tol}),
                to_value(&r),
            )
        }
        VerifyTarget::Lemma31 => {
            let tol = opts.tol.unwrap_or(tolerances::CHART_IDENTITY);
            let points = model.sample_points(opts.points.unwrap_or(5));
            let r = lemma31_suite(model, &points, tol)?;
            let worst = r
                .rows
                .iter()
                .map(|(_, row)| row.max_violation)
                .fold(0.0, f64::max);
            let summary = format!(
                "{} points on {}: max violation {worst:.3e}",
                r.rows.len(),
                r.model
            );
            (
                r.passed,
                summary,
                json!({"points": points, "tol": tol}),
                to_value(&r),
            )
        }
        VerifyTarget::Lemma51 => {
            let xi = opts
                .xi
                .clone()
                .unwrap_or_else(|| "block-rotation:30deg".into());
            let map = LinearMap::parse(&xi, model.split())?;
            let p = model.sample_points(1).remove(0);
            let fibers = opts.directions.unwrap_or(20);
            let r = lemma51_check(spec, &p, &map, fibers)?;
            let summary = format!(
                "{}: kernel error {:.3e} / {:.3e}, Hessian error {:.3e}, linearity {:.3e}",
                map.label,
                r.canonical.kernel_error,
                r.probe.kernel_error,
                r.canonical.hessian_error.max(r.probe.hessian_error),
                r.linearity_defect
            );
            let settings =
                json!({"p": p, "xi": xi, "fibers": fibers, "kernel_tol": tolerances::KERNEL});
            (r.passed, summary, settings, to_value(&r))
        }
        VerifyTarget::Lemma81 => {
            let generator = spec
                .generator()
                .ok_or_else(|| Error::Precondition(format!("{spec} is not an (α₁, α₂)-metric")))?;
            let directions = opts.directions.unwrap_or(16);
            let c = lemma81_certificate(generator, 1.0, 8, directions)?;
            let summary = format!(
                "max Landsberg residual {:.3e} vs noise floor {:.3e}; trace spread {:.3e}",
                c.max_landsberg, c.noise_floor, c.trace_spread
            );
            let settings = json!({"radius": 1.0, "angles": 8, "directions": directions});
            (c.passed, summary, settings, to_value(&c))
        }
        VerifyTarget::Prop32 => {
            let tol = opts.tol.unwrap_or(tolerances::CHART_IDENTITY);
            let points = model.sample_points(opts.points.unwrap_or(5));
            let directions = opts.directions.unwrap_or(16);
            let r = berwald_criterion_suite(spec, &points, directions, tol)?;
            let hits = r.rows.iter().filter(|row| row.criterion).count();
            let summary = format!(
                "criterion holds at {hits}/{} points; consistent everywhere: {}",
                r.rows.len(),
                r.passed
            );
            (
                r.passed,
                summary,
                json!({"points": points, "directions": directions, "tol": tol}),
                to_value(&r),
            )
        }
    };
    Ok(TargetReport {
        target,
        passed,
        summary,
        settings,
        report,
    })
}
