//! Closed forms for `(α₁, α₂)`-metrics at the center of a normal chart,
//! along `y = (a, 0, …, 0, a')` with `a² + a'² = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::NormalChartReport;
use crate::metrics::{LPartials, MetricSpec};

const UNIT_TOL: f64 = 1e-9;

/// Predicted tensor entries, indexed as in the chart (`0` is the first
/// `V1` direction, `n - 1` the last `V2` direction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    pub n1: usize,
    pub n2: usize,
    pub partials: LPartials,
    /// `L₁L₂ - 2LL₁₂`.
    pub denominator: f64,
    pub g11: f64,
    pub g1n: f64,
    pub gnn: f64,
    /// `g_ii` for the other `V1` and `V2` directions.
    pub g_v1: f64,
    pub g_v2: f64,
    pub g_inv11: f64,
    pub g_inv1n: f64,
    pub g_invnn: f64,
    pub det_block: f64,
    pub det_full: f64,
    pub c111: f64,
    pub cnn1: f64,
    pub cn11: f64,
    pub cnnn: f64,
    /// `(C_ii1, C_iin)` for `i` a middle `V1` or `V2` direction.
    pub c_v1: (f64, f64),
    pub c_v2: (f64, f64),
    pub i1: f64,
    pub i_n: f64,
    pub i_up1: f64,
    /// `I^n = I_n L₁ / (L₁L₂ - 2LL₁₂)`.
    pub i_up_n: f64,
    /// The same with `L₁L₂ - LL₁₂` in the denominator.
    pub i_up_n_alt: f64,
    pub g_cov1: f64,
    pub g_covn: f64,
}

/// Evaluate the closed forms from the generator partials at `(a², a'²)`.
pub fn closed_forms(
    p: &LPartials,
    a: f64,
    ap: f64,
    split: (usize, usize),
    a1: f64,
    a2: f64,
) -> ClosedForms {
    let (n1, n2) = split;
    let d = p.denominator();
    let m1 = (n1 - 1) as f64;
    let m2 = (n2 - 1) as f64;
    let i1 = (-p.l * p.l12 - 2.0 * a * a * p.l * p.l112) / (a * d)
        + m1 * a * p.l11 / p.l1
        + m2 * a * p.l12 / p.l2;
    let i_n = (-p.l * p.l12 - 2.0 * ap * ap * p.l * p.l122) / (ap * d)
        + m1 * ap * p.l12 / p.l1
        + m2 * ap * p.l22 / p.l2;
    ClosedForms {
        n1,
        n2,
        partials: *p,
        denominator: d,
        g11: p.l1 + 2.0 * a * a * p.l11,
        g1n: 2.0 * a * ap * p.l12,
        gnn: p.l2 + 2.0 * ap * ap * p.l22,
        g_v1: p.l1,
        g_v2: p.l2,
        g_inv11: (p.l2 + 2.0 * ap * ap * p.l22) / d,
        g_inv1n: -2.0 * a * ap * p.l12 / d,
        g_invnn: (p.l1 + 2.0 * a * a * p.l11) / d,
        det_block: d,
        det_full: d * p.l1.powi(n1 as i32 - 1) * p.l2.powi(n2 as i32 - 1),
        c111: 3.0 * a * p.l11 + 2.0 * a.powi(3) * p.l111,
        cnn1: a * p.l12 + 2.0 * a * ap * ap * p.l122,
        cn11: ap * p.l12 + 2.0 * a * a * ap * p.l112,
        cnnn: 3.0 * ap * p.l22 + 2.0 * ap.powi(3) * p.l222,
        c_v1: (a * p.l11, ap * p.l12),
        c_v2: (a * p.l12, ap * p.l22),
        i1,
        i_n,
        i_up1: i1 * p.l2 / d,
        i_up_n: i_n * p.l1 / d,
        i_up_n_alt: i_n * p.l1 / (p.l1 * p.l2 - p.l * p.l12),
        g_cov1: a * ap * p.l12 * a1 + 0.5 * ap * ap * (p.l2 - p.l1 + 2.0 * p.l12) * a2,
        g_covn: 0.5 * a * a * (p.l2 - p.l1 - 2.0 * p.l12) * a1 - a * ap * p.l12 * a2,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SCurvatureTerms {
    pub a: f64,
    pub a_prime: f64,
    pub a1: f64,
    pub a2: f64,
    pub psi: f64,
    /// `Φ = L Ψ / (L₁L₂ - 2LL₁₂)`.
    pub phi: f64,
    pub s_formula: f64,
    pub partials: LPartials,
}

/// `S(p, y) = -Φ (a L₁ A₁ + a' L₂ A₂)` from the generator partials and the
/// chart's `A₁ = ∂₁ b_1n`, `A₂ = ∂_n b_1n`.
pub fn s_curvature_formula(
    spec: &MetricSpec,
    report: &NormalChartReport,
    a: f64,
    ap: f64,
) -> Result<SCurvatureTerms> {
    let generator = spec
        .generator()
        .ok_or_else(|| Error::Precondition(format!("{spec} is not an (α₁, α₂)-metric")))?;
    if (a * a + ap * ap - 1.0).abs() > UNIT_TOL {
        return Err(Error::Precondition(format!(
            "a² + a'² = {} is not 1",
            a * a + ap * ap
        )));
    }
    if a == 0.0 || ap == 0.0 {
        return Err(Error::Precondition("y must not lie in V1 or V2".into()));
    }
    let (n1, n2) = report.split;
    let p = generator.partials(a * a, ap * ap);
    let d = p.denominator();
    if !(d > 0.0) {
        return Err(Error::DegenerateDenominator(d));
    }
    let m1 = (n1 - 1) as f64;
    let m2 = (n2 - 1) as f64;
    let psi = (-p.l * p.l12 - 2.0 * a * a * p.l * p.l112) / (a * ap * d)
        + m1 * a * p.l11 / (ap * p.l1)
        + m2 * a * p.l12 / (ap * p.l2);
    let phi = p.l / d * psi;
    let s_formula = -phi * (a * p.l1 * report.a1 + ap * p.l2 * report.a2);
    Ok(SCurvatureTerms {
        a,
        a_prime: ap,
        a1: report.a1,
        a2: report.a2,
        psi,
        phi,
        s_formula,
        partials: p,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub max_violation: f64,
    pub tol: f64,
}

/// `∂_i b_jk + ∂_j b_ik = 0` for `i ≤ j` in one block and `k` in the other.
pub fn s_vanishing_identities(report: &NormalChartReport, tol: f64) -> IdentityCheck {
    let n = report.n();
    let n1 = report.split.0;
    let db = &report.db;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            if (i < n1) != (j < n1) {
                continue;
            }
            for k in 0..n {
                if (k < n1) == (i < n1) {
                    continue;
                }
                worst = worst.max((db[i][j][k] + db[j][i][k]).abs());
            }
        }
    }
    IdentityCheck {
        holds: worst < tol,
        max_violation: worst,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{normal_chart, ManifoldModel};

    #[test]
    fn polar_terms_match_oracle() {
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let r = normal_chart(&spec.model, &[1.0, 0.0], Some(&[0.8, 0.6])).unwrap();
        let t = s_curvature_formula(&spec, &r, 0.6, 0.8).unwrap();
        assert!((t.psi - -0.18395224406919546).abs() < 1e-14);
        assert!((t.phi - -0.20981168215583367).abs() < 1e-14);
        assert!((t.s_formula - r.a1.signum() * 0.13619967309482374).abs() < 1e-14);
    }

    #[test]
    fn linear_generator_gives_zero() {
        let spec = MetricSpec::from_registry("linear", ManifoldModel::PolarPlane).unwrap();
        let r = normal_chart(&spec.model, &[1.0, 0.0], None).unwrap();
        let t = s_curvature_formula(&spec, &r, 0.6, 0.8).unwrap();
        assert_eq!(t.phi, 0.0);
        assert_eq!(t.s_formula, 0.0);
    }

    #[test]
    fn preconditions() {
        let spec = MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap();
        let r = normal_chart(&spec.model, &[1.0, 0.0], None).unwrap();
        assert!(matches!(
            s_curvature_formula(&spec, &r, 0.6, 0.6),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            s_curvature_formula(&spec, &r, 1.0, 0.0),
            Err(Error::Precondition(_))
        ));
        let bad = MetricSpec::alpha1_alpha2("s+t+5*s*t/(s+t)", ManifoldModel::PolarPlane).unwrap();
        assert!(matches!(
            s_curvature_formula(&bad, &r, 0.6, 0.8),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn identities_on_builtins() {
        let flat = normal_chart(
            &ManifoldModel::FlatProduct { n1: 2, n2: 1 },
            &[0.0; 3],
            None,
        )
        .unwrap();
        assert_eq!(s_vanishing_identities(&flat, 1e-9).max_violation, 0.0);
        let hopf = normal_chart(&ManifoldModel::HopfSphere, &[0.0; 3], None).unwrap();
        assert!(s_vanishing_identities(&hopf, 1e-9).holds);
        let polar = normal_chart(&ManifoldModel::PolarPlane, &[1.0, 0.0], None).unwrap();
        let c = s_vanishing_identities(&polar, 1e-9);
        assert!(!c.holds);
        assert!((c.max_violation - 2.0 * polar.a1.abs()).abs() < 1e-12);
    }
}
