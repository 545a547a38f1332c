//! Cross-checks of the closed-form results against the generic pipeline,
//! and metric classification.

mod classify;
mod indicatrix;
mod targets;
mod theorems;

pub use classify::{
    berwald_implies_landsberg, classify, residual_maxima, BerwaldLandsbergReport,
    ClassificationReport, ClassifyPlan, Flags, Residuals, Thresholds, MIN_DIRECTIONS, MIN_POINTS,
};
pub use indicatrix::{
    indicatrix_cartan_trace, lemma81_certificate, IndicatrixTrace, Lemma81Certificate, MIN_ANGLES,
};
pub use targets::{
    lemma51_check, run_target, Lemma51Report, TargetReport, VerifyOptions, VerifyTarget,
};
pub use theorems::{
    berwald_criterion_suite, hopf_example, lemma31_suite, off_axis_directions, polar_example,
    verify_theorem41, verify_theorem42, HopfExampleReport, Lemma31Suite, PolarExampleReport,
    PolarExampleRow, Prop32Report, Prop32Row, Theorem41Report, Theorem41Row, Theorem42Report,
    Theorem42Row, S_SIGNIFICANT,
};

use crate::error::{Error, Result};
use crate::metrics::MetricSpec;

/// `dirs` rescaled to `F(x, y) = 1`.
pub(crate) fn unit_directions(
    spec: &MetricSpec,
    x: &[f64],
    dirs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    dirs.iter()
        .map(|y| {
            let f = spec.norm(x, y);
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::InvalidGenerator(format!(
                    "F = {f} at x = {x:?}, y = {y:?}"
                )));
            }
            Ok(y.iter().map(|v| v / f).collect())
        })
        .collect()
}
