use std::fmt;

use serde::{Deserialize, Serialize};

use crate::derivjet::{taylor_eval, MultiOrder, Scalar, ScalarField};
use crate::error::{Error, Result};
use crate::expr::Expr;

const VARS: [&str; 2] = ["s", "t"];

/// Points in the open positive quadrant where generators are cross-checked.
const PROBES: [(f64, f64); 5] = [(0.36, 0.64), (0.5, 0.5), (0.9, 0.1), (0.2, 1.3), (1.7, 0.4)];

/// Agreement required between symbolic and jet partials.
pub const PARTIALS_TOL: f64 = 1e-9;

/// Values of `L` and its partials up to third order at one `(s, t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LPartials {
    pub l: f64,
    pub l1: f64,
    pub l2: f64,
    pub l11: f64,
    pub l12: f64,
    pub l22: f64,
    pub l111: f64,
    pub l112: f64,
    pub l122: f64,
    pub l222: f64,
}

impl LPartials {
    fn from_array(v: [f64; 10]) -> Self {
        LPartials {
            l: v[0],
            l1: v[1],
            l2: v[2],
            l11: v[3],
            l12: v[4],
            l22: v[5],
            l111: v[6],
            l112: v[7],
            l122: v[8],
            l222: v[9],
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.l, self.l1, self.l2, self.l11, self.l12, self.l22, self.l111, self.l112,
            self.l122, self.l222,
        ]
    }

    /// `L₁L₂ - 2LL₁₂`.
    pub fn denominator(&self) -> f64 {
        self.l1 * self.l2 - 2.0 * self.l * self.l12
    }
}

/// `(exps_s, exps_t)` of the ten stored partials, in [`LPartials`] order.
const ORDERS: [(u8, u8); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// The two-variable function `L(s, t)` of an `(α₁, α₂)`-metric, held as an
/// expression together with its symbolic partials.
#[derive(Clone, Debug)]
pub struct Generator {
    name: String,
    source: String,
    expr: Expr,
    partials: Vec<Expr>,
}

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.name == self.source {
            write!(f, "{}", self.source)
        } else {
            write!(f, "{} = {}", self.name, self.source)
        }
    }
}

/// Built-in generators by registry name.
pub fn builtin_generator_source(name: &str) -> Option<&'static str> {
    match name {
        "linear" => Some("s+t"),
        "cross02" => Some("s+t+0.2*s*t/(s+t)"),
        "cross005" => Some("s+t+0.05*s*t/(s+t)"),
        _ => None,
    }
}

struct PairField<'a>(&'a Expr);

impl ScalarField for PairField<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Scalar>(&self, _x: &[T], y: &[T]) -> T {
        self.0.eval(y)
    }
}

impl Generator {
    /// Registry name (`linear`, `cross02`, `cross005`) or an expression in
    /// `s` and `t`.
    pub fn resolve(name_or_expr: &str) -> Result<Generator> {
        match builtin_generator_source(name_or_expr) {
            Some(src) => Generator::named(name_or_expr, src),
            None => Generator::named(name_or_expr, name_or_expr),
        }
    }

    pub fn named(name: &str, source: &str) -> Result<Generator> {
        let expr = Expr::parse(source, &VARS)?;
        let mut partials = Vec::with_capacity(10);
        for &(a, b) in &ORDERS {
            let mut e = expr.clone();
            for _ in 0..a {
                e = e.derivative(0);
            }
            for _ in 0..b {
                e = e.derivative(1);
            }
            partials.push(e);
        }
        let g = Generator {
            name: name.to_string(),
            source: source.to_string(),
            expr,
            partials,
        };
        g.cross_check()?;
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval<T: Scalar>(&self, s: T, t: T) -> T {
        self.expr.eval(&[s, t])
    }

    /// `(L₁, L₂)` in any scalar type.
    pub fn first_partials<T: Scalar>(&self, s: T, t: T) -> (T, T) {
        let args = [s, t];
        (self.partials[1].eval(&args), self.partials[2].eval(&args))
    }

    /// Partials from the symbolic derivatives.
    pub fn partials(&self, s: f64, t: f64) -> LPartials {
        let mut v = [0.0; 10];
        for (slot, e) in v.iter_mut().zip(&self.partials) {
            *slot = e.eval(&[s, t]);
        }
        LPartials::from_array(v)
    }

    /// Partials from jet arithmetic on the expression itself.
    pub fn jet_partials(&self, s: f64, t: f64) -> Result<LPartials> {
        let orders: Vec<MultiOrder> = ORDERS
            .iter()
            .map(|&(a, b)| MultiOrder::y(vec![a, b]))
            .collect();
        let table = taylor_eval(&PairField(&self.expr), &[0.0, 0.0], &[s, t], &orders)?;
        let mut v = [0.0; 10];
        for (slot, o) in v.iter_mut().zip(&orders) {
            *slot = table.entries[o];
        }
        Ok(LPartials::from_array(v))
    }

    fn cross_check(&self) -> Result<()> {
        for &(s, t) in &PROBES {
            let sym = self.partials(s, t).to_array();
            let Ok(jet) = self.jet_partials(s, t) else {
                continue;
            };
            for (k, (a, b)) in sym.iter().zip(jet.to_array()).enumerate() {
                if !a.is_finite() || !b.is_finite() {
                    continue;
                }
                if (a - b).abs() > PARTIALS_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidGenerator(format!(
                        "{}: symbolic and jet partial #{k} disagree at ({s}, {t}): {a} vs {b}",
                        self.source
                    )));
                }
            }
        }
        Ok(())
    }

    /// `|sL₁ + tL₂ - L| / |L|`.
    pub fn euler_residual(&self, s: f64, t: f64) -> f64 {
        let p = self.partials(s, t);
        (s * p.l1 + t * p.l2 - p.l).abs() / p.l.abs()
    }

    /// Whether every second partial vanishes at the probe points.
    pub fn is_linear(&self, tol: f64) -> bool {
        PROBES.iter().all(|&(s, t)| {
            let p = self.partials(s, t);
            p.l11.abs() < tol && p.l12.abs() < tol && p.l22.abs() < tol
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross02_partials_by_hand() {
        let g = Generator::resolve("cross02").unwrap();
        let (s, t) = (0.36, 0.64);
        let p = g.partials(s, t);
        // L = s + t + c s t/(s+t) with s + t = 1
        let c = 0.2;
        assert!((p.l - (1.0 + c * s * t)).abs() < 1e-15);
        assert!((p.l1 - (1.0 + c * t * t)).abs() < 1e-15);
        assert!((p.l2 - (1.0 + c * s * s)).abs() < 1e-15);
        assert!((p.l12 - 2.0 * c * s * t).abs() < 1e-14);
        assert!(g.euler_residual(s, t) < 1e-15);
        // Euler identities for second partials
        assert!((s * p.l11 + t * p.l12).abs() < 1e-14);
        assert!((s * p.l12 + t * p.l22).abs() < 1e-14);
    }

    #[test]
    fn jet_and_symbolic_agree() {
        for src in [
            "s+t+s*t",
            "sqrt(s^2+t^2+s*t)",
            "s+t+0.2*s*t/(s+t)",
            "(s^3+t^3)^(1/3)",
        ] {
            let g = Generator::resolve(src).unwrap();
            let a = g.partials(0.3, 0.7).to_array();
            let b = g.jet_partials(0.3, 0.7).unwrap().to_array();
            for (x, y) in a.iter().zip(b) {
                assert!(
                    (x - y).abs() < 1e-10 * x.abs().max(1.0),
                    "{src}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn linearity_detection() {
        assert!(Generator::resolve("linear").unwrap().is_linear(1e-12));
        assert!(!Generator::resolve("cross02").unwrap().is_linear(1e-12));
    }

    #[test]
    fn parse_error_is_reported() {
        assert!(matches!(
            Generator::resolve("s+*t"),
            Err(Error::Parse { .. })
        ));
    }
}
