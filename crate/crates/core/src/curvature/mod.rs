//! Pointwise curvature of a Finsler metric: fundamental, Cartan and mean
//! Cartan tensors, geodesic spray, Berwald and Landsberg tensors, the
//! Busemann–Hausdorff density, distortion and S-curvature.
//!
//! Everything is read off one fiber Taylor expansion of `F²` that also
//! carries first base-point derivatives, so every tensor at a sample comes
//! from jets with no differencing. Only `σ` needs quadrature.

mod batch;
mod closed_form;
mod volume;

use serde::{Deserialize, Serialize};

pub use batch::{evaluate_batch, Quantity, Record};
pub use closed_form::{
    closed_forms, s_curvature_formula, s_vanishing_identities, ClosedForms, IdentityCheck,
    SCurvatureTerms,
};
pub use volume::{
    bh_density, default_nodes, ln_sigma_gradient, s_curvature_direct, s_curvature_with, tau,
    unit_ball_volume, SDirect, SigmaGradient, SphereRule, VolumeDistortion, DEFAULT_NODES_2D,
    DEFAULT_NODES_3D, DEFAULT_SIGMA_STEP,
};

use crate::derivjet::{fiber_expansion, richardson, shape, FiberExpansion, Jet, Scalar};
use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, Mat};
use crate::metrics::{FrozenNorm, MetricSpec};

pub type Tensor3 = Vec<Vec<Vec<f64>>>;
pub type Tensor4 = Vec<Tensor3>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalTensor {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub g: Mat<f64>,
    pub g_inv: Mat<f64>,
    pub det_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanData {
    /// `C_ijk = ¼ ∂³F² / ∂y^i ∂y^j ∂y^k`.
    pub c: Tensor3,
    /// `I_k = ∂_{y^k} ln √det g`.
    pub i_cov: Vec<f64>,
    /// `I^l = g^{lk} I_k`.
    pub i_contra: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayData {
    pub g_contra: Vec<f64>,
    /// `G_l = ¼ ([F²]_{x^k y^l} y^k - [F²]_{x^l})`.
    pub g_cov: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureTensors {
    /// `berwald[i][p][q][r] = ∂³G^i / ∂y^p ∂y^q ∂y^r`.
    pub berwald: Tensor4,
    /// `Λ_pqr = y^j g_ij B^i_pqr`.
    pub landsberg: Tensor3,
    pub max_berwald: f64,
    pub max_landsberg: f64,
}

/// All pointwise tensors at one `(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBundle {
    pub fundamental: FundamentalTensor,
    pub cartan: CartanData,
    pub spray: SprayData,
    pub tensors: CurvatureTensors,
    /// `∂_{x^k} g_ij`, stored as `[k][i][j]`.
    pub dg_dx: Tensor3,
}

pub(crate) fn exps(n: usize, idx: &[usize]) -> Vec<u8> {
    let mut e = vec![0u8; n];
    for &i in idx {
        e[i] += 1;
    }
    e
}

pub(crate) fn tensor3(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Tensor3 {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| f(i, j, k)).collect())
                .collect()
        })
        .collect()
}

pub(crate) fn max_abs3(t: &Tensor3) -> f64 {
    t.iter()
        .flatten()
        .flatten()
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// `½ ∂²f/∂y^i∂y^j` as jets two degrees below the input.
pub(crate) fn hessian_jet(f2: &Jet, n: usize) -> Mat<Jet> {
    let d1: Vec<Jet> = (0..n).map(|i| f2.derivative(i)).collect();
    Mat::from_fn(n, n, |i, j| d1[i].derivative(j) * 0.5)
}

/// Check that `g` is positive definite and invert it by Cholesky.
pub(crate) fn checked_inverse(g: &Mat<f64>, x: &[f64], y: &[f64]) -> Result<Mat<f64>> {
    if g.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            order: "fundamental tensor".into(),
        });
    }
    spd_inverse(g).ok_or_else(|| {
        Error::StrongConvexity(format!(
            "g is not positive definite at x = {x:?}, y = {y:?}"
        ))
    })
}

fn expand(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
    degree: usize,
    with_x: bool,
) -> Result<FiberExpansion> {
    let n = spec.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::Domain(format!("expected {n} coordinates")));
    }
    fiber_expansion(spec, x, y, degree, with_x)
}

fn fundamental_from(e: &FiberExpansion, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
    let n = y.len();
    let g = Mat::from_fn(n, n, |i, j| 0.5 * e.value.partial(&exps(n, &[i, j])));
    let g_inv = checked_inverse(&g, x, y)?;
    Ok(FundamentalTensor {
        x: x.to_vec(),
        y: y.to_vec(),
        det_g: g.det(),
        g,
        g_inv,
    })
}

fn cartan_from(e: &FiberExpansion, g_inv: &Mat<f64>) -> CartanData {
    let n = g_inv.rows;
    let c = tensor3(n, |i, j, k| 0.25 * e.value.partial(&exps(n, &[i, j, k])));
    let lndet = hessian_jet(&e.value.truncate(3), n).det().ln() * 0.5;
    let i_cov: Vec<f64> = (0..n).map(|k| lndet.partial(&exps(n, &[k]))).collect();
    let i_contra = g_inv.mul_vec(&i_cov);
    CartanData { c, i_cov, i_contra }
}

/// `G_l` as jets of degree `deg(Q) - 1` in `y`.
fn spray_cov_jets(e: &FiberExpansion, y: &[f64]) -> Vec<Jet> {
    let n = y.len();
    let deg = e.dx[0].shape().degree().saturating_sub(1);
    let s = shape(n, deg);
    let ys: Vec<Jet> = (0..n).map(|k| Jet::variable(s.clone(), y[k], k)).collect();
    (0..n)
        .map(|l| {
            let mut acc = e.dx[l].clone() * -1.0;
            for (k, yk) in ys.iter().enumerate() {
                acc = acc + yk.clone() * e.dx[k].derivative(l);
            }
            acc * 0.25
        })
        .collect()
}

fn spray_from(e: &FiberExpansion, y: &[f64], g_inv: &Mat<f64>) -> SprayData {
    let n = y.len();
    let g_cov: Vec<f64> = (0..n)
        .map(|l| {
            let mut acc = -e.dx[l].value();
            for k in 0..n {
                acc += y[k] * e.dx[k].partial(&exps(n, &[l]));
            }
            0.25 * acc
        })
        .collect();
    SprayData {
        g_contra: g_inv.mul_vec(&g_cov),
        g_cov,
    }
}

/// `B` and `Λ` from a degree-5 expansion: `G^i = g^{il} G_l` with the
/// inverse taken in jet arithmetic, then third fiber derivatives.
fn tensors_from(e: &FiberExpansion, y: &[f64], g: &Mat<f64>) -> CurvatureTensors {
    let n = y.len();
    let g_jet = hessian_jet(&e.value, n);
    let g_inv_jet = g_jet.inverse();
    let cov = spray_cov_jets(e, y);
    let contra = g_inv_jet.mul_vec(&cov);
    let berwald: Tensor4 = contra
        .iter()
        .map(|gi| tensor3(n, |p, q, r| gi.partial(&exps(n, &[p, q, r]))))
        .collect();
    let yg = g.mul_vec(y);
    let landsberg = tensor3(n, |p, q, r| {
        (0..n).map(|i| yg[i] * berwald[i][p][q][r]).sum()
    });
    CurvatureTensors {
        max_berwald: berwald.iter().map(max_abs3).fold(0.0, f64::max),
        max_landsberg: max_abs3(&landsberg),
        berwald,
        landsberg,
    }
}

/// `g_ij(y)` of a frozen norm.
pub(crate) fn fundamental_from_norm(norm: &FrozenNorm, y: &[f64]) -> Result<Mat<f64>> {
    let n = norm.dim();
    let s = shape(n, 2);
    let ys: Vec<Jet> = (0..n).map(|k| Jet::variable(s.clone(), y[k], k)).collect();
    let g = hessian_jet(&norm.f_squared(&ys), n).values();
    checked_inverse(&g, norm.x(), y)?;
    Ok(g)
}

/// `g_ij = ½ [F²]_{y^i y^j}`, inverted by Cholesky.
pub fn fundamental_tensor(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
    let e = expand(spec, x, y, 2, false)?;
    fundamental_from(&e, x, y)
}

pub fn cartan_tensor(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<CartanData> {
    let e = expand(spec, x, y, 3, false)?;
    let f = fundamental_from(&e, x, y)?;
    Ok(cartan_from(&e, &f.g_inv))
}

pub fn spray(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<SprayData> {
    let e = expand(spec, x, y, 2, true)?;
    let f = fundamental_from(&e, x, y)?;
    Ok(spray_from(&e, y, &f.g_inv))
}

pub fn berwald_landsberg_tensors(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
) -> Result<CurvatureTensors> {
    let e = expand(spec, x, y, 5, true)?;
    let f = fundamental_from(&e, x, y)?;
    Ok(tensors_from(&e, y, &f.g))
}

/// Every pointwise tensor from a single degree-5 expansion.
pub fn curvature_bundle(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<CurvatureBundle> {
    let e = expand(spec, x, y, 5, true)?;
    let n = y.len();
    let fundamental = fundamental_from(&e, x, y)?;
    let cartan = cartan_from(&e, &fundamental.g_inv);
    let spray = spray_from(&e, y, &fundamental.g_inv);
    let tensors = tensors_from(&e, y, &fundamental.g);
    let dg_dx = tensor3(n, |k, i, j| 0.5 * e.dx[k].partial(&exps(n, &[i, j])));
    Ok(CurvatureBundle {
        fundamental,
        cartan,
        spray,
        tensors,
        dg_dx,
    })
}

pub const FD_SPRAY_STEP: f64 = 1e-3;

/// Berwald tensor by central differences of the jet spray, the
/// independent oracle for the jet path.
pub fn berwald_fd(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
    step: f64,
    levels: usize,
) -> Result<Tensor4> {
    let n = spec.dim();
    spray(spec, x, y)?;
    let h: Vec<f64> = y
        .iter()
        .map(|c| crate::derivjet::scaled_step(step, *c))
        .collect();
    let component = |i: usize| {
        move |v: &[f64]| match spray(spec, x, v) {
            Ok(s) => s.g_contra[i],
            Err(_) => f64::NAN,
        }
    };
    let mut out = vec![tensor3(n, |_, _, _| 0.0); n];
    for p in 0..n {
        for q in p..n {
            for r in q..n {
                let o = exps(n, &[p, q, r]);
                for (i, slot) in out.iter_mut().enumerate() {
                    let (v, _) = richardson(&component(i), y, &o, &h, levels);
                    if !v.is_finite() {
                        return Err(Error::Evaluation {
                            order: format!("spray difference B^{i}_{p}{q}{r}"),
                        });
                    }
                    for (a, b, c) in [
                        (p, q, r),
                        (p, r, q),
                        (q, p, r),
                        (q, r, p),
                        (r, p, q),
                        (r, q, p),
                    ] {
                        slot[a][b][c] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The jet part of the S-curvature, `y^k ½ g^{ij} ∂_k g_ij - 2 G^i I_i`;
/// the density term `-y^k ∂_k ln σ` is added by the caller.
pub(crate) fn s_jet_part(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let e = expand(spec, x, y, 3, true)?;
    let n = y.len();
    let f = fundamental_from(&e, x, y)?;
    let c = cartan_from(&e, &f.g_inv);
    let s = spray_from(&e, y, &f.g_inv);
    let mut acc = 0.0;
    for k in 0..n {
        let mut tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr += f.g_inv[(i, j)] * 0.5 * e.dx[k].partial(&exps(n, &[i, j]));
            }
        }
        acc += y[k] * 0.5 * tr;
    }
    for i in 0..n {
        acc -= 2.0 * s.g_contra[i] * c.i_cov[i];
    }
    Ok(acc)
}
