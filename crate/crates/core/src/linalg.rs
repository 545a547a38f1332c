//! Small dense matrices over any [`Scalar`], plus `f64` helpers backed by
//! nalgebra.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::derivjet::Scalar;

/// Row-major `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| T::cst(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn from_f64(m: &Mat<f64>) -> Self {
        Mat::from_fn(m.rows, m.cols, |i, j| T::cst(m[(i, j)]))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> Mat<f64> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.value()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self[(i, 0)].clone() * other[(0, j)].clone();
            for k in 1..self.cols {
                acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                let mut acc = self[(i, 0)].clone() * v[0].clone();
                for k in 1..self.cols {
                    acc = acc + self[(i, k)].clone() * v[k].clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn scale(&self, s: f64) -> Mat<T> {
        self.map(|v| v.clone() * s)
    }

    /// `vᵀ M w`.
    pub fn bilinear(&self, v: &[T], w: &[T]) -> T {
        let mw = self.mul_vec(w);
        let mut acc = v[0].clone() * mw[0].clone();
        for i in 1..v.len() {
            acc = acc + v[i].clone() * mw[i].clone();
        }
        acc
    }

    /// `Jᵀ M J`.
    pub fn congruence(&self, j: &Mat<T>) -> Mat<T> {
        j.transpose().mul(&self.mul(j))
    }

    /// Gauss–Jordan inverse with partial pivoting on the constant parts.
    /// Singular input yields non-finite entries.
    pub fn inverse(&self) -> Mat<T> {
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::<T>::identity(n);
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[(r, col)].value().abs() > a[(piv, col)].value().abs() {
                    piv = r;
                }
            }
            if piv != col {
                for c in 0..n {
                    let t = a[(col, c)].clone();
                    a[(col, c)] = a[(piv, c)].clone();
                    a[(piv, c)] = t;
                    let t = inv[(col, c)].clone();
                    inv[(col, c)] = inv[(piv, c)].clone();
                    inv[(piv, c)] = t;
                }
            }
            let r = a[(col, col)].recip();
            for c in 0..n {
                a[(col, c)] = a[(col, c)].clone() * r.clone();
                inv[(col, c)] = inv[(col, c)].clone() * r.clone();
            }
            for row in 0..n {
                if row != col {
                    let f = a[(row, col)].clone();
                    for c in 0..n {
                        a[(row, c)] = a[(row, c)].clone() - f.clone() * a[(col, c)].clone();
                        inv[(row, c)] = inv[(row, c)].clone() - f.clone() * inv[(col, c)].clone();
                    }
                }
            }
        }
        inv
    }

    /// Determinant by elimination with partial pivoting on constant parts.
    pub fn det(&self) -> T {
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::cst(1.0);
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[(r, col)].value().abs() > a[(piv, col)].value().abs() {
                    piv = r;
                }
            }
            if piv != col {
                for c in 0..n {
                    let t = a[(col, c)].clone();
                    a[(col, c)] = a[(piv, c)].clone();
                    a[(piv, c)] = t;
                }
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            let r = p.recip();
            for row in col + 1..n {
                let f = a[(row, col)].clone() * r.clone();
                for c in col..n {
                    a[(row, c)] = a[(row, c)].clone() - f.clone() * a[(col, c)].clone();
                }
            }
        }
        det
    }
}

impl Mat<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Mat<f64> {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Inverse of a symmetric positive-definite matrix via Cholesky; `None`
/// when the factorization fails.
pub fn spd_inverse(m: &Mat<f64>) -> Option<Mat<f64>> {
    let c = m.to_nalgebra().cholesky()?;
    Some(Mat::from_nalgebra(&c.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det_agree_with_nalgebra() {
        let m = Mat::from_fn(3, 3, |i, j| {
            [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]][i][j]
        });
        let inv = m.inverse();
        let want = m.to_nalgebra().try_inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv[(i, j)] - want[(i, j)]).abs() < 1e-14);
            }
        }
        assert!((m.det() - m.to_nalgebra().determinant()).abs() < 1e-12);
        let chol = spd_inverse(&m).unwrap();
        assert!(chol.sub(&inv).max_abs() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = Mat::from_fn(2, 2, |i, j| [[0.0, 1.0], [1.0, 0.0]][i][j]);
        assert_eq!(m.inverse(), m);
        assert_eq!(m.det(), -1.0);
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = Mat::from_fn(2, 2, |i, j| [[2.0, 1.0], [1.0, 2.0]][i][j]);
        let e = symmetric_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }
}
