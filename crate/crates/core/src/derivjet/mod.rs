//! Exact higher-order partial derivatives of scalar fields `f(x, y)` by
//! truncated Taylor arithmetic, plus an independent finite-difference oracle.

mod dd;
mod dual;
mod fd;
mod jet;
mod scalar;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

pub use dd::Dd;
pub use dual::Dual;
pub use fd::{
    cross_check, fd_partial, CrossCheckReport, DEFAULT_FD_STEP, DEFAULT_RICHARDSON_LEVELS,
};
pub(crate) use fd::{richardson, scaled_step};
pub use jet::{shape, Jet, JetShape};
pub use scalar::{dot, Scalar};

use crate::error::{Error, Result};

/// Highest y-order any computation in the crate requests.
pub const MAX_Y_ORDER: usize = 5;
pub const MAX_X_ORDER: usize = 1;

/// A smooth scalar field on the slit tangent bundle, written in one chart.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    /// Evaluate at `(x, y)`. Numerical domain failures surface as NaN.
    fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> T;

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Chart coordinates of a base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint(pub Vec<f64>);

/// Tangent-vector components in the chart frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberVector(pub Vec<f64>);

impl Deref for ChartPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for FiberVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl FiberVector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// Differentiation multi-index: how often to differentiate in each `x^i`
/// and each `y^i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiOrder {
    pub x_orders: Vec<u8>,
    pub y_orders: Vec<u8>,
}

impl MultiOrder {
    pub fn new(x_orders: Vec<u8>, y_orders: Vec<u8>) -> Self {
        MultiOrder { x_orders, y_orders }
    }

    /// Pure fiber derivative.
    pub fn y(y_orders: Vec<u8>) -> Self {
        let n = y_orders.len();
        MultiOrder {
            x_orders: vec![0; n],
            y_orders,
        }
    }

    /// Build from a list of differentiated fiber indices, e.g. `[0, 0, 1]`
    /// for `∂³/∂y¹∂y¹∂y²`, optionally with one base-point index.
    pub fn from_indices(n: usize, x: Option<usize>, ys: &[usize]) -> Self {
        let mut xo = vec![0u8; n];
        if let Some(k) = x {
            xo[k] += 1;
        }
        let mut yo = vec![0u8; n];
        for &i in ys {
            yo[i] += 1;
        }
        MultiOrder::new(xo, yo)
    }

    pub fn x_total(&self) -> usize {
        self.x_orders.iter().map(|&e| e as usize).sum()
    }

    pub fn y_total(&self) -> usize {
        self.y_orders.iter().map(|&e| e as usize).sum()
    }

    pub fn total(&self) -> usize {
        self.x_total() + self.y_total()
    }

    /// Index of the differentiated base-point coordinate, if any.
    pub fn x_index(&self) -> Option<usize> {
        self.x_orders.iter().position(|&e| e > 0)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.x_orders.len() != n || self.y_orders.len() != n {
            return Err(Error::UnsupportedOrder(format!(
                "{self}: expected {n} entries per group"
            )));
        }
        if self.x_total() > MAX_X_ORDER || self.y_total() > MAX_Y_ORDER {
            return Err(Error::UnsupportedOrder(self.to_string()));
        }
        Ok(())
    }

    /// All orders with `x_total <= max_x` and `y_total <= max_y` in `n`
    /// dimensions.
    pub fn enumerate(n: usize, max_x: usize, max_y: usize) -> Vec<MultiOrder> {
        let mut ys = Vec::new();
        for d in 0..=max_y {
            let mut cur = vec![0u8; n];
            compositions(n, d, 0, &mut cur, &mut ys);
        }
        let mut out = Vec::new();
        for y in &ys {
            out.push(MultiOrder::y(y.clone()));
            if max_x >= 1 {
                for k in 0..n {
                    let mut xo = vec![0u8; n];
                    xo[k] = 1;
                    out.push(MultiOrder::new(xo, y.clone()));
                }
            }
        }
        out
    }
}

fn compositions(n: usize, d: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == n - 1 {
        cur[pos] = d as u8;
        out.push(cur.clone());
        return;
    }
    for e in (0..=d).rev() {
        cur[pos] = e as u8;
        compositions(n, d - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[u8]| {
            v.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "x[{}]y[{}]", list(&self.x_orders), list(&self.y_orders))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    Jet,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialTable {
    pub entries: BTreeMap<MultiOrder, f64>,
    pub method: DerivativeMethod,
    /// Present for finite-difference tables only.
    pub error_estimates: Option<BTreeMap<MultiOrder, f64>>,
}

impl PartialTable {
    pub fn get(&self, order: &MultiOrder) -> Option<f64> {
        self.entries.get(order).copied()
    }
}

pub(crate) fn check_fiber(y: &[f64]) -> Result<()> {
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("zero fiber vector".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite fiber vector".into()));
    }
    Ok(())
}

/// Exact partials of `field` at `(base, fiber)` for every requested order.
///
/// Only the coordinates that some order actually differentiates are seeded:
/// fiber coordinates become jet variables, base-point coordinates become
/// dual tangents.
pub fn taylor_eval<F: ScalarField>(
    field: &F,
    base: &[f64],
    fiber: &[f64],
    orders: &[MultiOrder],
) -> Result<PartialTable> {
    let n = field.dim();
    if base.len() != n || fiber.len() != n {
        return Err(Error::Domain(format!(
            "expected {n} coordinates, got base {} and fiber {}",
            base.len(),
            fiber.len()
        )));
    }
    check_fiber(fiber)?;
    if !field.in_domain(base) {
        return Err(Error::Domain(format!(
            "base point {base:?} outside the chart"
        )));
    }
    for o in orders {
        o.validate(n)?;
    }

    let active_y: Vec<usize> = (0..n)
        .filter(|&i| orders.iter().any(|o| o.y_orders[i] > 0))
        .collect();
    let active_x: Vec<usize> = (0..n)
        .filter(|&i| orders.iter().any(|o| o.x_orders[i] > 0))
        .collect();
    let ydeg = orders.iter().map(|o| o.y_total()).max().unwrap_or(0);

    let jshape = shape(active_y.len(), ydeg);
    let xs: Vec<Dual<Jet>> = (0..n)
        .map(|i| match active_x.iter().position(|&k| k == i) {
            Some(slot) => Dual::seed(Jet::constant(base[i]), slot, active_x.len()),
            None => Dual::constant(Jet::constant(base[i])),
        })
        .collect();
    let ys: Vec<Dual<Jet>> = (0..n)
        .map(|i| match active_y.iter().position(|&k| k == i) {
            Some(slot) => Dual::constant(Jet::variable(jshape.clone(), fiber[i], slot)),
            None => Dual::constant(Jet::constant(fiber[i])),
        })
        .collect();
    let r = field.eval(&xs, &ys);

    let mut entries = BTreeMap::new();
    for o in orders {
        let jet = match o.x_index() {
            Some(k) => {
                let slot = active_x.iter().position(|&a| a == k).expect("seeded");
                r.tangent(slot)
            }
            None => r.re.clone(),
        };
        let exps: Vec<u8> = active_y.iter().map(|&i| o.y_orders[i]).collect();
        let v = jet.partial(&exps);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                order: o.to_string(),
            });
        }
        entries.insert(o.clone(), v);
    }
    Ok(PartialTable {
        entries,
        method: DerivativeMethod::Jet,
        error_estimates: None,
    })
}

/// Fiber Taylor expansion of a field at `(x, y)`: the y-jet of the field
/// itself plus the y-jets of its first derivatives in every base-point
/// coordinate. Used by the curvature and Landsberg modules.
#[derive(Clone, Debug)]
pub struct FiberExpansion {
    pub value: Jet,
    /// `∂/∂x^k` of the field as a jet in `y`; empty when not requested.
    pub dx: Vec<Jet>,
}

pub fn fiber_expansion<F: ScalarField>(
    field: &F,
    x: &[f64],
    y: &[f64],
    y_degree: usize,
    with_x: bool,
) -> Result<FiberExpansion> {
    let n = field.dim();
    check_fiber(y)?;
    if !field.in_domain(x) {
        return Err(Error::Domain(format!("base point {x:?} outside the chart")));
    }
    let s = shape(n, y_degree);
    let xs: Vec<Dual<Jet>> = (0..n)
        .map(|i| {
            if with_x {
                Dual::seed(Jet::constant(x[i]), i, n)
            } else {
                Dual::constant(Jet::constant(x[i]))
            }
        })
        .collect();
    let ys: Vec<Dual<Jet>> = (0..n)
        .map(|i| Dual::constant(Jet::variable(s.clone(), y[i], i)))
        .collect();
    let r = field.eval(&xs, &ys);
    if !r.is_finite() {
        return Err(Error::Evaluation {
            order: format!("fiber expansion of degree {y_degree}"),
        });
    }
    let lift = |j: Jet| {
        if j.is_constant() {
            Jet::constant_in(s.clone(), j.value())
        } else {
            j
        }
    };
    let dx = if with_x {
        (0..n).map(|k| lift(r.tangent(k))).collect()
    } else {
        Vec::new()
    };
    Ok(FiberExpansion {
        value: lift(r.re),
        dx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprField;

    #[test]
    fn trivial_examples() {
        let f = ExprField::parse("y1^2*y2", 2).unwrap();
        let o = MultiOrder::from_indices(2, None, &[0, 1]);
        let t = taylor_eval(&f, &[0.0, 0.0], &[3.0, 5.0], &[o.clone()]).unwrap();
        assert_eq!(t.get(&o), Some(6.0));

        let f = ExprField::parse("y1^2+y2^2+y3^2", 3).unwrap();
        let orders: Vec<MultiOrder> = (0..3)
            .flat_map(|i| (0..3).map(move |j| MultiOrder::from_indices(3, None, &[i, j])))
            .collect();
        let t = taylor_eval(&f, &[0.0; 3], &[0.3, -1.0, 2.0], &orders).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v = t.get(&MultiOrder::from_indices(3, None, &[i, j])).unwrap();
                assert_eq!(v, if i == j { 2.0 } else { 0.0 });
            }
        }

        let f = ExprField::parse("x1*y1^3", 1).unwrap();
        let o = MultiOrder::from_indices(1, Some(0), &[0, 0, 0]);
        let t = taylor_eval(&f, &[2.0], &[7.0], &[o.clone()]).unwrap();
        assert_eq!(t.get(&o), Some(6.0));
    }

    #[test]
    fn zero_fiber_rejected() {
        let f = ExprField::parse("y1^2+y2^2", 2).unwrap();
        let o = MultiOrder::y(vec![1, 0]);
        let e = taylor_eval(&f, &[0.0, 0.0], &[0.0, 0.0], &[o]).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn order_caps_enforced() {
        let f = ExprField::parse("y1^2+y2^2", 2).unwrap();
        let too_many_y = MultiOrder::y(vec![3, 3]);
        let too_many_x = MultiOrder::new(vec![1, 1], vec![0, 0]);
        for o in [too_many_y, too_many_x] {
            let e = taylor_eval(&f, &[0.0, 0.0], &[1.0, 0.0], &[o]).unwrap_err();
            assert!(matches!(e, Error::UnsupportedOrder(_)));
        }
    }

    #[test]
    fn non_finite_names_order() {
        let f = ExprField::parse("sqrt(y1-2)", 1).unwrap();
        let o = MultiOrder::y(vec![1]);
        let e = taylor_eval(&f, &[0.0], &[1.0], &[o]).unwrap_err();
        assert_eq!(
            e,
            Error::Evaluation {
                order: "x[0]y[1]".into()
            }
        );
    }

    #[test]
    fn enumerate_counts() {
        // pure y orders with total <= 5 in two variables: 21, times (1 + 2 x choices)
        assert_eq!(MultiOrder::enumerate(2, 1, 5).len(), 63);
        assert_eq!(MultiOrder::enumerate(3, 0, 2).len(), 10);
    }
}
