//! Deterministic sample sequences. Nothing here uses a random generator, so
//! every report is reproducible.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::manifold::ManifoldModel;

/// Seed string recorded in reports that use these sequences.
pub const SEQUENCE_TAG: &str = "kronecker-r/fibonacci-sphere/v1";

/// Point `index` of the additive recurrence (Kronecker) sequence in
/// `[0,1)^dim`, with generators from the generalized golden ratio.
pub fn kronecker(dim: usize, index: usize) -> Vec<f64> {
    // phi_d solves x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    (1..=dim)
        .map(|k| {
            let a = phi.powi(-(k as i32));
            (0.5 + a * (index as f64 + 1.0)).fract()
        })
        .collect()
}

/// `count` equally spaced unit vectors in the plane, starting at angle 0.
pub fn circle_directions(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// Fibonacci lattice on the unit 2-sphere.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            vec![r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Unit directions in dimension `n`: the circle for `n = 2`, the Fibonacci
/// lattice for `n = 3`, normalized Kronecker points pushed through
/// Box–Muller otherwise.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        2 => circle_directions(count),
        3 => fibonacci_sphere(count),
        _ => (0..count)
            .map(|k| {
                let u = kronecker(2 * n, k);
                let mut v: Vec<f64> = (0..n)
                    .map(|i| {
                        let r = (-2.0 * (1.0 - u[2 * i]).ln()).sqrt();
                        r * (2.0 * PI * u[2 * i + 1]).cos()
                    })
                    .collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                v.iter_mut().for_each(|c| *c /= norm);
                v
            })
            .collect(),
    }
}

/// The `(x, y)` pairs of a batch evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: Vec<(Vec<f64>, Vec<f64>)>,
    pub sequence: String,
}

impl SamplePlan {
    /// Every built-in sample point of `model` paired with every direction.
    pub fn grid(model: &ManifoldModel, points: usize, directions: usize) -> SamplePlan {
        let dirs = sphere_directions(model.dim(), directions);
        let samples = model
            .sample_points(points)
            .into_iter()
            .flat_map(|x| dirs.iter().map(move |y| (x.clone(), y.clone())))
            .collect();
        SamplePlan {
            samples,
            sequence: SEQUENCE_TAG.to_string(),
        }
    }

    pub fn from_pairs(samples: Vec<(Vec<f64>, Vec<f64>)>) -> SamplePlan {
        SamplePlan {
            samples,
            sequence: "explicit".to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences_are_unit_and_deterministic() {
        for n in 2..6 {
            let a = sphere_directions(n, 40);
            let b = sphere_directions(n, 40);
            assert_eq!(a, b);
            for v in &a {
                let norm: f64 = v.iter().map(|c| c * c).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(circle_directions(8)[0], vec![1.0, 0.0]);
    }

    #[test]
    fn kronecker_fills_unit_cube() {
        let pts: Vec<_> = (0..200).map(|i| kronecker(3, i)).collect();
        for d in 0..3 {
            let mean: f64 = pts.iter().map(|p| p[d]).sum::<f64>() / 200.0;
            assert!((mean - 0.5).abs() < 0.02);
        }
    }
}
