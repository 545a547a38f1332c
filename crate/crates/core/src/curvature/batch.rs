use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::volume::{
    bh_density, ln_sigma_gradient, s_curvature_with, SigmaGradient, DEFAULT_SIGMA_STEP,
};
use super::{curvature_bundle, CurvatureBundle};
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::sampling::SamplePlan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "g")]
    Fundamental,
    #[serde(rename = "C")]
    Cartan,
    #[serde(rename = "I")]
    MeanCartan,
    #[serde(rename = "G")]
    Spray,
    #[serde(rename = "berwald")]
    Berwald,
    #[serde(rename = "landsberg")]
    Landsberg,
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "S")]
    SCurvature,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::Fundamental,
        Quantity::Cartan,
        Quantity::MeanCartan,
        Quantity::Spray,
        Quantity::Berwald,
        Quantity::Landsberg,
        Quantity::Sigma,
        Quantity::Tau,
        Quantity::SCurvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Fundamental => "g",
            Quantity::Cartan => "C",
            Quantity::MeanCartan => "I",
            Quantity::Spray => "G",
            Quantity::Berwald => "berwald",
            Quantity::Landsberg => "landsberg",
            Quantity::Sigma => "sigma",
            Quantity::Tau => "tau",
            Quantity::SCurvature => "S",
        }
    }

    fn method(self) -> &'static str {
        match self {
            Quantity::Sigma => "quadrature",
            Quantity::Tau => "jet+quadrature",
            Quantity::SCurvature => "jet+quadrature-fd",
            _ => "jet",
        }
    }

    fn needs_jets(self) -> bool {
        !matches!(self, Quantity::Sigma | Quantity::SCurvature)
    }

    /// Parse a comma-separated list; `all` selects everything.
    pub fn parse_list(s: &str) -> Result<Vec<Quantity>> {
        if s.trim() == "all" {
            return Ok(Quantity::ALL.to_vec());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Quantity> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown quantity '{s}'")))
    }
}

/// One output row. Tensors are flattened in row-major index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub quantity: Quantity,
    pub value: Vec<f64>,
    pub method: String,
    pub error_estimate: Option<f64>,
}

fn flatten3(t: &[Vec<Vec<f64>>]) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}

fn jet_value(q: Quantity, b: &CurvatureBundle) -> Vec<f64> {
    match q {
        Quantity::Fundamental => b.fundamental.g.data.clone(),
        Quantity::Cartan => flatten3(&b.cartan.c),
        Quantity::MeanCartan => b.cartan.i_cov.clone(),
        Quantity::Spray => b.spray.g_contra.clone(),
        Quantity::Berwald => b.tensors.berwald.iter().flat_map(|t| flatten3(t)).collect(),
        Quantity::Landsberg => flatten3(&b.tensors.landsberg),
        _ => unreachable!(),
    }
}

struct PointCache {
    x: Vec<f64>,
    grad: Option<(SigmaGradient, SigmaGradient)>,
    sigma: Option<(f64, f64)>,
}

/// Evaluate `quantities` at every sample of `plan`. Density work is shared
/// between consecutive samples at the same point.
pub fn evaluate_batch(
    spec: &MetricSpec,
    plan: &SamplePlan,
    quantities: &[Quantity],
    nodes: usize,
) -> Result<Vec<Record>> {
    let mut out = Vec::with_capacity(plan.len() * quantities.len());
    let mut cache: Option<PointCache> = None;
    let jets = quantities.iter().any(|q| q.needs_jets());
    for (index, (x, y)) in plan.samples.iter().enumerate() {
        let tag = |e: Error| e.at_sample(index);
        if cache.as_ref().map_or(true, |c| &c.x != x) {
            cache = Some(PointCache {
                x: x.clone(),
                grad: None,
                sigma: None,
            });
        }
        let c = cache.as_mut().expect("cache set above");
        let bundle = if jets {
            Some(curvature_bundle(spec, x, y).map_err(tag)?)
        } else {
            None
        };
        for &q in quantities {
            let (value, error_estimate) = match q {
                Quantity::Sigma | Quantity::Tau => {
                    if c.sigma.is_none() {
                        let d = bh_density(spec, x, nodes).map_err(tag)?;
                        c.sigma = Some((d.sigma, d.refinement_delta));
                    }
                    let (sigma, delta) = c.sigma.expect("sigma set above");
                    if q == Quantity::Sigma {
                        (vec![sigma], Some(delta * sigma))
                    } else {
                        let det = bundle.as_ref().expect("jets computed").fundamental.det_g;
                        (vec![(det.sqrt() / sigma).ln()], Some(delta))
                    }
                }
                Quantity::SCurvature => {
                    if c.grad.is_none() {
                        let fine =
                            ln_sigma_gradient(spec, x, DEFAULT_SIGMA_STEP, nodes).map_err(tag)?;
                        let coarse = ln_sigma_gradient(spec, x, 2.0 * DEFAULT_SIGMA_STEP, nodes)
                            .map_err(tag)?;
                        c.grad = Some((fine, coarse));
                    }
                    let (fine, coarse) = c.grad.as_ref().expect("gradient set above");
                    let s = s_curvature_with(spec, x, y, fine).map_err(tag)?;
                    let s2 = s_curvature_with(spec, x, y, coarse).map_err(tag)?;
                    (vec![s.value], Some((s.value - s2.value).abs()))
                }
                _ => (jet_value(q, bundle.as_ref().expect("jets computed")), None),
            };
            out.push(Record {
                x: x.clone(),
                y: y.clone(),
                quantity: q,
                value,
                method: q.method().to_string(),
                error_estimate,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldModel;

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
            assert_eq!(
                serde_json::to_string(&q).unwrap(),
                format!("\"{}\"", q.name())
            );
        }
        assert_eq!(
            Quantity::parse_list("g, S").unwrap(),
            vec![Quantity::Fundamental, Quantity::SCurvature]
        );
        assert!(Quantity::parse_list("g,h").is_err());
    }

    #[test]
    fn batch_shapes_and_sharing() {
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let plan = SamplePlan::grid(&spec.model, 2, 3);
        let recs = evaluate_batch(&spec, &plan, &Quantity::ALL, 256).unwrap();
        assert_eq!(recs.len(), 6 * 9);
        let lens: Vec<usize> = recs[..9].iter().map(|r| r.value.len()).collect();
        assert_eq!(lens, vec![4, 8, 2, 2, 16, 8, 1, 1, 1]);
        let sigmas: Vec<f64> = recs
            .iter()
            .filter(|r| r.quantity == Quantity::Sigma)
            .map(|r| r.value[0])
            .collect();
        assert_eq!(sigmas[0], sigmas[1]);
        assert_eq!(sigmas[1], sigmas[2]);
    }

    #[test]
    fn failing_sample_is_indexed() {
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let plan = SamplePlan::from_pairs(vec![
            (vec![1.0, 0.0], vec![1.0, 0.0]),
            (vec![1.0, 0.0], vec![0.0, 0.0]),
        ]);
        let err = evaluate_batch(&spec, &plan, &[Quantity::Fundamental], 256).unwrap_err();
        assert!(matches!(err, Error::AtSample { index: 1, .. }));
    }
}
