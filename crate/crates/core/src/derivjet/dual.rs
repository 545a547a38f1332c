use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;

/// First-order dual number over any [`Scalar`]: `re + Σ_k eps_k ε_k` with
/// `ε_j ε_k = 0`.
///
/// `Dual<Jet>` carries exact first derivatives in the base-point coordinates
/// `x` whose coefficients are themselves Taylor jets in the fiber `y`. An
/// empty `eps` means every tangent component is zero.
#[derive(Clone, Debug)]
pub struct Dual<T> {
    pub re: T,
    pub eps: Vec<T>,
}

impl<T: Scalar> Dual<T> {
    pub fn constant(re: T) -> Self {
        Dual {
            re,
            eps: Vec::new(),
        }
    }

    /// `re + ε_var` with `n` tangent slots.
    pub fn seed(re: T, var: usize, n: usize) -> Self {
        let eps = (0..n)
            .map(|k| if k == var { T::cst(1.0) } else { T::zero() })
            .collect();
        Dual { re, eps }
    }

    /// Tangent component `k` (zero if absent).
    pub fn tangent(&self, k: usize) -> T {
        self.eps.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Chain rule: `f(re) + f'(re) · eps`.
    fn chain(&self, f: T, fp: T) -> Self {
        Dual {
            re: f,
            eps: self.eps.iter().map(|e| fp.clone() * e.clone()).collect(),
        }
    }
}

fn zip_eps<T: Scalar>(a: &[T], b: &[T], op: impl Fn(T, T) -> T) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(T::zero);
            let y = b.get(k).cloned().unwrap_or_else(T::zero);
            op(x, y)
        })
        .collect()
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Dual::constant(T::cst(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn recip(&self) -> Self {
        let r = self.re.recip();
        let fp = -(r.clone() * r.clone());
        self.chain(r, fp)
    }

    fn sqrt(&self) -> Self {
        let s = self.re.sqrt();
        let fp = s.recip() * 0.5;
        self.chain(s, fp)
    }

    fn powf(&self, p: f64) -> Self {
        let f = self.re.powf(p);
        let fp = self.re.powf(p - 1.0) * p;
        self.chain(f, fp)
    }

    fn powi(&self, k: i32) -> Self {
        let f = self.re.powi(k);
        let fp = if k == 0 {
            T::zero()
        } else {
            self.re.powi(k - 1) * k as f64
        };
        self.chain(f, fp)
    }

    fn exp(&self) -> Self {
        let e = self.re.exp();
        self.chain(e.clone(), e)
    }

    fn ln(&self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }

    fn sin(&self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(&self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.eps.iter().all(|e| e.is_finite())
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            re: self.re + rhs.re,
            eps: zip_eps(&self.eps, &rhs.eps, |a, b| a + b),
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            re: self.re - rhs.re,
            eps: zip_eps(&self.eps, &rhs.eps, |a, b| a - b),
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let eps = match (self.eps.is_empty(), rhs.eps.is_empty()) {
            (true, true) => Vec::new(),
            (true, false) => rhs
                .eps
                .iter()
                .map(|e| self.re.clone() * e.clone())
                .collect(),
            (false, true) => self
                .eps
                .iter()
                .map(|e| e.clone() * rhs.re.clone())
                .collect(),
            (false, false) => zip_eps(&self.eps, &rhs.eps, |a, b| {
                self.re.clone() * b + a * rhs.re.clone()
            }),
        };
        Dual {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if rhs.eps.is_empty() {
            let r = rhs.re.recip();
            return Dual {
                re: self.re * r.clone(),
                eps: self.eps.into_iter().map(|e| e * r.clone()).collect(),
            };
        }
        self * rhs.recip()
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            eps: self.eps.into_iter().map(|e| -e).collect(),
        }
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.re = self.re + rhs;
        self
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.re = self.re - rhs;
        self
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Dual {
            re: self.re * rhs,
            eps: self.eps.into_iter().map(|e| e * rhs).collect(),
        }
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Dual {
            re: self.re / rhs,
            eps: self.eps.into_iter().map(|e| e / rhs).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivjet::jet::{shape, Jet};

    #[test]
    fn dual_over_f64_gives_gradient() {
        let x = Dual::seed(2.0f64, 0, 2);
        let y = Dual::seed(3.0f64, 1, 2);
        let f = x.clone() * x * y.clone() + y.exp();
        assert_eq!(f.re, 12.0 + 3f64.exp());
        assert_eq!(f.tangent(0), 12.0);
        assert!((f.tangent(1) - (4.0 + 3f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn dual_over_jet_gives_mixed_partials() {
        // f = x * y^3 ; d/dx d^3/dy^3 = 6
        let s = shape(1, 3);
        let y = Dual::constant(Jet::variable(s, 7.0, 0));
        let x = Dual::seed(Jet::constant(2.0), 0, 1);
        let f = x * y.powi(3);
        assert!((f.tangent(0).partial(&[3]) - 6.0).abs() < 1e-12);
        assert!((f.re.partial(&[1]) - 2.0 * 3.0 * 49.0).abs() < 1e-10);
    }
}
