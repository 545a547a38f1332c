use serde::{Deserialize, Serialize};

use super::{check_fiber, taylor_eval, Dd, MultiOrder, Scalar, ScalarField};
use crate::error::{Error, Result};

pub const DEFAULT_RICHARDSON_LEVELS: usize = 2;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Central stencils `(offset, weight)` for derivative orders 0..=5, all of
/// second-order accuracy.
fn stencil(order: u8) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        5 => &[
            (-3, -0.5),
            (-2, 2.0),
            (-1, -2.5),
            (1, 2.5),
            (2, -2.0),
            (3, 0.5),
        ],
        _ => unreachable!("order validated before stencil lookup"),
    }
}

fn reach(order: u8) -> f64 {
    stencil(order)
        .iter()
        .map(|&(o, _)| o.unsigned_abs() as f64)
        .fold(0.0, f64::max)
}

/// `step * max(1, |c|)` rounded to a power of two, so that stencil
/// offsets are exact in floating point.
pub(crate) fn scaled_step(step: f64, c: f64) -> f64 {
    (step * c.abs().max(1.0)).log2().round().exp2()
}

/// Tensor-product central difference with step `h_i = step * max(1, |c_i|)`
/// per coordinate, then Richardson extrapolation over `levels` halvings.
/// Stencil points are evaluated in double-double arithmetic.
///
/// Returns `(value, error_estimate)` where the estimate is the difference
/// between the last two extrapolation levels.
pub fn fd_partial<F: ScalarField>(
    field: &F,
    base: &[f64],
    fiber: &[f64],
    order: &MultiOrder,
    step: f64,
    levels: usize,
) -> Result<(f64, f64)> {
    let n = field.dim();
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    if base.len() != n || fiber.len() != n {
        return Err(Error::Domain("coordinate count mismatch".into()));
    }
    check_fiber(fiber)?;
    order.validate(n)?;

    let mut point = base.to_vec();
    point.extend_from_slice(fiber);
    let orders: Vec<u8> = order
        .x_orders
        .iter()
        .chain(&order.y_orders)
        .copied()
        .collect();
    let steps: Vec<f64> = point.iter().map(|&c| scaled_step(step, c)).collect();

    let crosses_origin = (0..n).all(|i| fiber[i].abs() <= reach(orders[n + i]) * steps[n + i]);
    if crosses_origin {
        return Err(Error::Domain(format!(
            "stencil for {order} around {fiber:?} reaches the zero fiber"
        )));
    }
    for i in 0..n {
        let r = reach(orders[i]) * steps[i];
        if r > 0.0 {
            for s in [-r, r] {
                let mut x = base.to_vec();
                x[i] += s;
                if !field.in_domain(&x) {
                    return Err(Error::Domain(format!(
                        "stencil for {order} leaves the chart at {x:?}"
                    )));
                }
            }
        }
    }

    let f = |p: &[Dd]| field.eval(&p[..n], &p[n..]);
    let (value, err) = richardson(&f, &point, &orders, &steps, levels);
    if !value.is_finite() {
        return Err(Error::Evaluation {
            order: order.to_string(),
        });
    }
    Ok((value, err))
}

/// Tensor-product central difference of `f` at `point` with `orders[i]`
/// derivatives along coordinate `i` and step `steps[i]`, refined by
/// Richardson extrapolation over `levels` halvings.
pub(crate) fn richardson<T: Scalar>(
    f: &dyn Fn(&[T]) -> T,
    point: &[f64],
    orders: &[u8],
    steps: &[f64],
    levels: usize,
) -> (f64, f64) {
    let axes: Vec<(usize, f64, &'static [(i32, f64)])> = (0..point.len())
        .filter(|&i| orders[i] > 0)
        .map(|i| (i, steps[i], stencil(orders[i])))
        .collect();
    let origin: Vec<T> = point.iter().map(|&c| T::cst(c)).collect();
    let diff = |scale: f64| -> T {
        let denom: f64 = axes
            .iter()
            .map(|&(i, h, _)| (h * scale).powi(orders[i] as i32))
            .product();
        let mut total = T::zero();
        let mut idx = vec![0usize; axes.len()];
        let mut p = origin.clone();
        loop {
            p.clone_from_slice(&origin);
            let mut w = 1.0;
            for (a, &(slot, h, st)) in axes.iter().enumerate() {
                let (off, c) = st[idx[a]];
                w *= c;
                p[slot] = p[slot].clone() + off as f64 * h * scale;
            }
            total = total + f(&p) * w;
            let mut a = 0;
            loop {
                if a == axes.len() {
                    return total / denom;
                }
                idx[a] += 1;
                if idx[a] < axes[a].2.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    };

    let rows = levels.max(1) + 1;
    let mut table: Vec<Vec<T>> = vec![(0..rows).map(|j| diff(0.5f64.powi(j as i32))).collect()];
    for k in 1..rows {
        let prev = &table[k - 1];
        let f = 4f64.powi(k as i32);
        let next: Vec<T> = (0..prev.len() - 1)
            .map(|j| (prev[j + 1].clone() * f - prev[j].clone()) / (f - 1.0))
            .collect();
        table.push(next);
    }
    let (last, before) = if levels == 0 {
        (&table[0][0], &table[0][1])
    } else {
        (&table[levels][0], &table[levels - 1][1])
    };
    (last.value(), (last.clone() - before.clone()).value().abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub max_rel_discrepancy: f64,
    pub worst_sample: usize,
    pub worst_order: Option<MultiOrder>,
    pub comparisons: usize,
    pub rel_tol: f64,
    pub passed: bool,
}

/// Compare jet partials against finite differences entry by entry. The
/// relative discrepancy uses a `max(|a|, |b|, 1)` denominator.
pub fn cross_check<F: ScalarField>(
    field: &F,
    samples: &[(Vec<f64>, Vec<f64>)],
    orders: &[MultiOrder],
    rel_tol: f64,
) -> Result<CrossCheckReport> {
    if samples.is_empty() {
        return Err(Error::Precondition(
            "cross_check needs at least one sample".into(),
        ));
    }
    let mut report = CrossCheckReport {
        max_rel_discrepancy: 0.0,
        worst_sample: 0,
        worst_order: None,
        comparisons: 0,
        rel_tol,
        passed: true,
    };
    for (index, (x, y)) in samples.iter().enumerate() {
        let table = taylor_eval(field, x, y, orders).map_err(|e| e.at_sample(index))?;
        for o in orders {
            let a = table.entries[o];
            let (b, _) = fd_partial(field, x, y, o, DEFAULT_FD_STEP, DEFAULT_RICHARDSON_LEVELS)
                .map_err(|e| e.at_sample(index))?;
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            report.comparisons += 1;
            if rel > report.max_rel_discrepancy || report.worst_order.is_none() {
                report.max_rel_discrepancy = rel.max(report.max_rel_discrepancy);
                report.worst_sample = index;
                report.worst_order = Some(o.clone());
            }
        }
    }
    report.passed = report.max_rel_discrepancy < rel_tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprField;

    #[test]
    fn second_derivative_of_square_norm() {
        let f = ExprField::parse("y1^2+y2^2", 2).unwrap();
        let o = MultiOrder::y(vec![2, 0]);
        let (v, _) = fd_partial(&f, &[0.0, 0.0], &[1.0, 1.0], &o, 1e-3, 2).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn fifth_derivative_of_quintic() {
        let f = ExprField::parse("y1^5", 1).unwrap();
        let o = MultiOrder::y(vec![5]);
        let (v, _) = fd_partial(&f, &[0.0], &[1.0], &o, 1e-2, 2).unwrap();
        assert!((v - 120.0).abs() / 120.0 < 1e-3);
    }

    #[test]
    fn x_derivative_of_x_free_field() {
        let f = ExprField::parse("y1^2+y2^2", 2).unwrap();
        for k in 0..2 {
            let o = MultiOrder::from_indices(2, Some(k), &[]);
            let (v, _) = fd_partial(&f, &[0.3, -0.2], &[0.4, 0.9], &o, 1e-3, 2).unwrap();
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn stencil_through_origin_rejected() {
        let f = ExprField::parse("y1^2+y2^2", 2).unwrap();
        let o = MultiOrder::y(vec![2, 0]);
        let e = fd_partial(&f, &[0.0, 0.0], &[1e-4, 0.0], &o, 1e-3, 2).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn cross_check_square_norm() {
        let f = ExprField::parse("y1^2+y2^2+y3^2", 3).unwrap();
        let samples = vec![
            (vec![0.0; 3], vec![0.3, -0.5, 0.8]),
            (vec![0.1; 3], vec![1.0, 0.2, 0.0]),
        ];
        let orders = MultiOrder::enumerate(3, 0, 3);
        let r = cross_check(&f, &samples, &orders, 1e-7).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
