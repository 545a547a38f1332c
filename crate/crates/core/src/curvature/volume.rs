use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::{fundamental_tensor, s_jet_part};
use crate::error::{Error, Result};
use crate::metrics::{FrozenNorm, MetricSpec};

pub const DEFAULT_NODES_2D: usize = 1024;
pub const DEFAULT_NODES_3D: usize = 64 * 128;
pub const DEFAULT_SIGMA_STEP: f64 = 1e-4;
/// Relative change of `σ` between the rule and its half-resolution
/// counterpart above which a warning is attached.
pub const REFINEMENT_WARN: f64 = 1e-6;

pub fn default_nodes(n: usize) -> usize {
    if n == 2 {
        DEFAULT_NODES_2D
    } else {
        DEFAULT_NODES_3D
    }
}

/// Volume of the Euclidean unit ball.
pub fn omega(n: usize) -> f64 {
    match n {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

/// Quadrature on the unit sphere: the trapezoid rule on the circle, or
/// Gauss–Legendre in `z` times the trapezoid rule in longitude.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub n: usize,
    pub dirs: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, nodes: usize) -> Result<SphereRule> {
        match n {
            2 => {
                if nodes < 64 {
                    return Err(Error::Precondition(format!(
                        "circle rule needs at least 64 nodes, got {nodes}"
                    )));
                }
                let w = 2.0 * PI / nodes as f64;
                let dirs = crate::sampling::circle_directions(nodes);
                Ok(SphereRule {
                    n,
                    dirs,
                    weights: vec![w; nodes],
                })
            }
            3 => {
                if nodes < 32 * 32 {
                    return Err(Error::Precondition(format!(
                        "sphere rule needs at least 1024 nodes, got {nodes}"
                    )));
                }
                let m = ((nodes / 2) as f64).sqrt().round() as usize;
                Ok(SphereRule::product(m))
            }
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// `m` Gauss–Legendre nodes in `z` and `2m` longitudes.
    fn product(m: usize) -> SphereRule {
        let gl = GaussLegendre::new(NonZeroUsize::new(m).expect("m > 0"));
        let k = 2 * m;
        let dphi = 2.0 * PI / k as f64;
        let mut dirs = Vec::with_capacity(m * k);
        let mut weights = Vec::with_capacity(m * k);
        for &(z, w) in gl.as_node_weight_pairs() {
            let r = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..k {
                let phi = dphi * j as f64;
                dirs.push(vec![r * phi.cos(), r * phi.sin(), z]);
                weights.push(w * dphi);
            }
        }
        SphereRule {
            n: 3,
            dirs,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// The same family of rule at half the resolution.
    pub fn coarse(&self) -> SphereRule {
        match self.n {
            2 => SphereRule::new(2, (self.len() / 2).max(64)).expect("valid circle rule"),
            _ => {
                let m = ((self.len() / 2) as f64).sqrt().round() as usize;
                SphereRule::product((m / 2).max(2))
            }
        }
    }
}

/// Euclidean volume of `{F(x, ·) < 1}`, `(1/n) ∮ F(u)^{-n} du`.
pub fn unit_ball_volume(norm: &FrozenNorm, rule: &SphereRule) -> Result<f64> {
    let n = norm.dim() as i32;
    let mut acc = 0.0;
    for (u, w) in rule.dirs.iter().zip(&rule.weights) {
        let f = norm.norm(u);
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::InvalidGenerator(format!("F = {f} along {u:?}")));
        }
        acc += w * f.powi(-n);
    }
    Ok(acc / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeDistortion {
    pub sigma: f64,
    pub tau: Option<f64>,
    pub omega_n: f64,
    pub quadrature_nodes: usize,
    /// `|σ - σ_coarse| / σ` against the half-resolution rule.
    pub refinement_delta: f64,
    pub warning: Option<String>,
}

fn sigma_with(norm: &FrozenNorm, rule: &SphereRule) -> Result<f64> {
    Ok(omega(rule.n) / unit_ball_volume(norm, rule)?)
}

/// Busemann–Hausdorff density `σ(x) = ω_n / Vol{F(x, ·) < 1}`.
pub fn bh_density(spec: &MetricSpec, x: &[f64], nodes: usize) -> Result<VolumeDistortion> {
    let rule = SphereRule::new(spec.dim(), nodes)?;
    let norm = spec.at(x)?;
    let sigma = sigma_with(&norm, &rule)?;
    let coarse = sigma_with(&norm, &rule.coarse())?;
    let refinement_delta = (sigma - coarse).abs() / sigma;
    let warning = (refinement_delta > REFINEMENT_WARN).then(|| {
        format!("quadrature not converged: half-resolution rule differs by {refinement_delta:.3e} relative")
    });
    Ok(VolumeDistortion {
        sigma,
        tau: None,
        omega_n: omega(rule.n),
        quadrature_nodes: rule.len(),
        refinement_delta,
        warning,
    })
}

/// Distortion `τ = ln(√det g / σ)`.
pub fn tau(spec: &MetricSpec, x: &[f64], y: &[f64], nodes: usize) -> Result<VolumeDistortion> {
    let mut v = bh_density(spec, x, nodes)?;
    let g = fundamental_tensor(spec, x, y)?;
    v.tau = Some((g.det_g.sqrt() / v.sigma).ln());
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaGradient {
    pub x: Vec<f64>,
    pub sigma: f64,
    pub grad_sigma: Vec<f64>,
    pub grad_ln_sigma: Vec<f64>,
    pub step: f64,
    pub quadrature_nodes: usize,
    pub warning: Option<String>,
}

/// Central differences of `σ` with one node set shared by every stencil
/// point, so the quadrature error largely cancels.
pub fn ln_sigma_gradient(
    spec: &MetricSpec,
    x: &[f64],
    step: f64,
    nodes: usize,
) -> Result<SigmaGradient> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let density = bh_density(spec, x, nodes)?;
    let rule = SphereRule::new(spec.dim(), nodes)?;
    let n = spec.dim();
    let mut grad_sigma = vec![0.0; n];
    let mut grad_ln_sigma = vec![0.0; n];
    for k in 0..n {
        let mut sides = [0.0; 2];
        for (slot, s) in sides.iter_mut().zip([step, -step]) {
            let mut xs = x.to_vec();
            xs[k] += s;
            let norm = spec
                .at(&xs)
                .map_err(|_| Error::Domain(format!("σ stencil leaves the chart at {xs:?}")))?;
            *slot = sigma_with(&norm, &rule)?;
        }
        grad_sigma[k] = (sides[0] - sides[1]) / (2.0 * step);
        grad_ln_sigma[k] = (sides[0].ln() - sides[1].ln()) / (2.0 * step);
    }
    Ok(SigmaGradient {
        x: x.to_vec(),
        sigma: density.sigma,
        grad_sigma,
        grad_ln_sigma,
        step,
        quadrature_nodes: rule.len(),
        warning: density.warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SDirect {
    pub value: f64,
    /// `y^k ½ g^{ij} ∂_k g_ij - 2 G^i I_i`.
    pub jet_part: f64,
    /// `y^k ∂_k ln σ`.
    pub density_part: f64,
    pub sigma: f64,
    pub warning: Option<String>,
}

/// `S = y^k ∂_{x^k} τ - 2 G^i ∂_{y^i} τ` with a precomputed density gradient.
pub fn s_curvature_with(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
    grad: &SigmaGradient,
) -> Result<SDirect> {
    if grad.x != x {
        return Err(Error::Precondition(
            "density gradient was computed at another point".into(),
        ));
    }
    let jet_part = s_jet_part(spec, x, y)?;
    let density_part: f64 = y.iter().zip(&grad.grad_ln_sigma).map(|(a, b)| a * b).sum();
    Ok(SDirect {
        value: jet_part - density_part,
        jet_part,
        density_part,
        sigma: grad.sigma,
        warning: grad.warning.clone(),
    })
}

pub fn s_curvature_direct(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
    fd_step: f64,
    nodes: usize,
) -> Result<SDirect> {
    let grad = ln_sigma_gradient(spec, x, fd_step, nodes)?;
    s_curvature_with(spec, x, y, &grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldModel;

    #[test]
    fn euclidean_and_doubled() {
        let flat = ManifoldModel::FlatProduct { n1: 1, n2: 1 };
        let e = MetricSpec::riemannian(flat.clone());
        assert!((bh_density(&e, &[0.0, 0.0], 1024).unwrap().sigma - 1.0).abs() < 1e-14);
        let d = MetricSpec::from_registry("doubled-euclidean", flat).unwrap();
        assert!((bh_density(&d, &[0.0, 0.0], 1024).unwrap().sigma - 4.0).abs() < 1e-13);
        let e3 = MetricSpec::riemannian(ManifoldModel::FlatProduct { n1: 2, n2: 1 });
        let v = bh_density(&e3, &[0.0; 3], DEFAULT_NODES_3D).unwrap();
        assert!((v.sigma - 1.0).abs() < 1e-13);
        assert_eq!(v.quadrature_nodes, DEFAULT_NODES_3D);
    }

    #[test]
    fn refinement_is_converged_for_cross02() {
        let spec =
            MetricSpec::from_registry("cross02", ManifoldModel::FlatProduct { n1: 1, n2: 1 })
                .unwrap();
        let a = bh_density(&spec, &[0.0, 0.0], 512).unwrap().sigma;
        let b = bh_density(&spec, &[0.0, 0.0], 1024).unwrap().sigma;
        assert!((a - b).abs() < 1e-8 * b);
        assert!(b > 1.0);
    }

    #[test]
    fn sphere_rule_integrates_polynomials() {
        let rule = SphereRule::new(3, 2048).unwrap();
        let area: f64 = rule.weights.iter().sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
        let z4: f64 = rule
            .dirs
            .iter()
            .zip(&rule.weights)
            .map(|(u, w)| w * u[2].powi(4))
            .sum();
        assert!((z4 - 4.0 * PI / 5.0).abs() < 1e-12);
        assert!(matches!(
            SphereRule::new(4, 4096),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(matches!(
            SphereRule::new(2, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tau_is_zero_homogeneous() {
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let x = [0.7, 0.5];
        let t1 = tau(&spec, &x, &[0.3, 0.4], 1024).unwrap().tau.unwrap();
        let t2 = tau(&spec, &x, &[0.6, 0.8], 1024).unwrap().tau.unwrap();
        assert!((t1 - t2).abs() < 1e-12);
    }

    #[test]
    fn riemannian_s_vanishes() {
        let spec = MetricSpec::riemannian(ManifoldModel::HopfSphere);
        let s = s_curvature_direct(
            &spec,
            &[0.1, 0.2, -0.1],
            &[0.3, 0.4, 0.5],
            DEFAULT_SIGMA_STEP,
            DEFAULT_NODES_3D,
        )
        .unwrap();
        assert!(s.value.abs() < 2e-5, "{s:?}");
    }

    #[test]
    fn polar_s_matches_oracle() {
        use crate::manifold::normal_chart;
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let r = normal_chart(&spec.model, &[1.0, 0.0], Some(&[0.8, 0.6])).unwrap();
        let global =
            s_curvature_direct(&spec, &[1.0, 0.0], &[0.8, 0.6], DEFAULT_SIGMA_STEP, 1024).unwrap();
        let local = s_curvature_direct(
            &spec.in_chart(r.chart),
            &[0.0, 0.0],
            &[0.6, 0.8],
            DEFAULT_SIGMA_STEP,
            1024,
        )
        .unwrap();
        let want = 0.13619967309482374;
        assert!(
            (global.value.abs() - want).abs() < 1e-6 * want,
            "{global:?}"
        );
        assert!(
            (local.value - global.value).abs() < 1e-6 * want,
            "{local:?}"
        );
    }
}
