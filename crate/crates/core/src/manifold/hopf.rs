//! Fields of the Hopf-fibered round `S^3 = SU(2)` in exponential
//! coordinates `x ↦ exp(x¹E₁ + x²E₂ + x³E₃)`, with the orthonormal basis
//! `E₁ = [[0,1],[-1,0]]`, `E₂ = [[0,i],[i,0]]`, `E₃ = [[i,0],[0,-i]]` of
//! `su(2)`. In this basis `ad_X u = 2 X × u`.
//!
//! Left-trivializing, `d exp_X = J(X) = Σ (-ad_X)^k / (k+1)!`, so
//! `α = JᵀJ`. The fiber direction at `exp X` is generated by left
//! multiplication with `exp(tE₃)`, whose left-trivialized generator is
//! `w = e^{-ad_X} E₃`; hence `b = (Jᵀw)(Jᵀw)ᵀ`.

use crate::derivjet::Scalar;
use crate::linalg::Mat;

/// Chart radius; the exponential map is a diffeomorphism well beyond it.
pub const RADIUS: f64 = 1.5;

const TERMS: usize = 30;

fn minus_ad<T: Scalar>(x: &[T]) -> Mat<T> {
    // -ad_X = -2 [X]_x
    let z = T::zero();
    let (a, b, c) = (x[0].clone() * 2.0, x[1].clone() * 2.0, x[2].clone() * 2.0);
    let rows = [
        [z.clone(), c.clone(), -b.clone()],
        [-c, z.clone(), a.clone()],
        [b, -a, z],
    ];
    Mat::from_fn(3, 3, |i, j| rows[i][j].clone())
}

/// `(J, e^{-ad_X})` by their power series.
fn series<T: Scalar>(x: &[T]) -> (Mat<T>, Mat<T>) {
    let m = minus_ad(x);
    let mut power = Mat::<T>::identity(3);
    let mut j = Mat::<T>::identity(3);
    let mut e = Mat::<T>::identity(3);
    let mut fact = 1.0;
    for k in 1..TERMS {
        power = power.mul(&m);
        fact *= k as f64;
        e = e.add(&power.scale(1.0 / fact));
        j = j.add(&power.scale(1.0 / (fact * (k + 1) as f64)));
    }
    (j, e)
}

pub fn alpha<T: Scalar>(x: &[T]) -> Mat<T> {
    let (j, _) = series(x);
    j.transpose().mul(&j)
}

pub fn b<T: Scalar>(x: &[T]) -> Mat<T> {
    let (j, e) = series(x);
    let w: Vec<T> = (0..3).map(|i| e[(i, 2)].clone()).collect();
    let v = j.transpose().mul_vec(&w);
    Mat::from_fn(3, 3, |i, k| v[i].clone() * v[k].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_orthonormal_and_split() {
        let a = alpha(&[0.0; 3]);
        let b0 = b(&[0.0; 3]);
        assert_eq!(a, Mat::identity(3));
        assert_eq!(
            b0,
            Mat::from_fn(3, 3, |i, j| if i == 2 && j == 2 { 1.0 } else { 0.0 })
        );
    }

    #[test]
    fn radial_lines_have_unit_speed() {
        // exp chart of a bi-invariant metric: α(x)(x, x) = |x|^2
        let x = [0.3, -0.7, 0.4];
        let a = alpha(&x);
        let q = a.bilinear(&x, &x);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((q - r2).abs() < 1e-13);
    }

    #[test]
    fn fiber_generator_is_alpha_unit() {
        let x = [0.2, 0.5, -0.9];
        let a = alpha(&x);
        let bm = b(&x);
        // b = α v vᵀ α with α(v, v) = 1, so trace(α⁻¹ b) = 1
        let p = a.inverse().mul(&bm);
        let tr = p[(0, 0)] + p[(1, 1)] + p[(2, 2)];
        assert!((tr - 1.0).abs() < 1e-12);
    }
}
