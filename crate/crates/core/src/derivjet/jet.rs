//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] in `k` variables of degree `D` holds the Taylor coefficients of a
//! smooth function around a base point, for every monomial of total degree at
//! most `D`. Arithmetic is exact on that quotient ring, so any composition of
//! `+ - * /`, powers, `sqrt`, `exp`, `ln` and trig functions yields partial
//! derivatives up to order `D` that are exact up to rounding.
//!
//! Monomials are enumerated by degree and the enumeration within one degree
//! does not depend on `D`, so a degree-`d` shape is a prefix of every
//! higher-degree shape with the same variable count.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use super::scalar::Scalar;

#[derive(Debug)]
pub struct JetShape {
    nvars: usize,
    degree: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, target)` for every pair of monomials whose product survives
    /// truncation. Iterated in a fixed order, so products are reproducible
    /// bit-for-bit.
    products: Vec<(u32, u32, u32)>,
}

impl JetShape {
    fn build(nvars: usize, degree: usize) -> JetShape {
        let mut monomials = Vec::new();
        for d in 0..=degree {
            let mut cur = vec![0u8; nvars];
            exact_degree(nvars, d, 0, &mut cur, &mut monomials);
        }
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let degs: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .collect();
        let mut products = Vec::new();
        let mut buf = vec![0u8; nvars];
        for (i, mi) in monomials.iter().enumerate() {
            for (j, mj) in monomials.iter().enumerate() {
                if degs[i] + degs[j] > degree {
                    continue;
                }
                for v in 0..nvars {
                    buf[v] = mi[v] + mj[v];
                }
                let t = index[&buf];
                products.push((i as u32, j as u32, t as u32));
            }
        }
        JetShape {
            nvars,
            degree,
            monomials,
            index,
            products,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn exact_degree(n: usize, d: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = d as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for e in (0..=d).rev() {
        cur[pos] = e as u8;
        exact_degree(n, d - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Shared, immutable shape for `nvars` variables truncated at `degree`.
pub fn shape(nvars: usize, degree: usize) -> Arc<JetShape> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet shape cache poisoned");
    guard
        .entry((nvars, degree))
        .or_insert_with(|| Arc::new(JetShape::build(nvars, degree)))
        .clone()
}

#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.shape.nvars)
            .field("degree", &self.shape.degree)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        Jet {
            shape: shape(0, 0),
            coeffs: vec![v],
        }
    }

    pub fn zeros(shape: Arc<JetShape>) -> Jet {
        let coeffs = vec![0.0; shape.len()];
        Jet { shape, coeffs }
    }

    /// Constant `v` expressed in `shape` (no broadcasting needed later).
    pub fn constant_in(shape: Arc<JetShape>, v: f64) -> Jet {
        let mut j = Jet::zeros(shape);
        j.coeffs[0] = v;
        j
    }

    /// The coordinate function `value + t_var` seeded in `shape`.
    pub fn variable(shape: Arc<JetShape>, value: f64, var: usize) -> Jet {
        assert!(var < shape.nvars, "variable index out of range");
        let mut j = Jet::constant_in(shape.clone(), value);
        if shape.degree >= 1 {
            let mut e = vec![0u8; shape.nvars];
            e[var] = 1;
            let idx = shape.index[&e];
            j.coeffs[idx] = 1.0;
        }
        j
    }

    pub fn from_coeffs(shape: Arc<JetShape>, coeffs: Vec<f64>) -> Jet {
        assert_eq!(shape.len(), coeffs.len());
        Jet { shape, coeffs }
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.shape.nvars == 0
    }

    /// Taylor coefficient of the monomial `exps`; zero when it was truncated.
    pub fn coefficient(&self, exps: &[u8]) -> f64 {
        if self.is_constant() {
            return if exps.iter().all(|&e| e == 0) {
                self.coeffs[0]
            } else {
                0.0
            };
        }
        self.shape
            .index_of(exps)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Partial derivative `∂^|exps| / ∂t^exps` at the base point.
    ///
    /// Panics if the requested order exceeds the jet degree.
    pub fn partial(&self, exps: &[u8]) -> f64 {
        let total: usize = exps.iter().map(|&e| e as usize).sum();
        if !self.is_constant() {
            assert!(
                total <= self.shape.degree,
                "order {total} exceeds jet degree {}",
                self.shape.degree
            );
        }
        let fact: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
        self.coefficient(exps) * fact
    }

    /// First `degree` orders only.
    pub fn truncate(&self, degree: usize) -> Jet {
        if self.is_constant() || degree >= self.shape.degree {
            return self.clone();
        }
        let s = shape(self.shape.nvars, degree);
        let coeffs = self.coeffs[..s.len()].to_vec();
        Jet { shape: s, coeffs }
    }

    /// `∂/∂t_var`; the result loses one order of validity and is returned in
    /// the shape of degree `D - 1`.
    pub fn derivative(&self, var: usize) -> Jet {
        if self.is_constant() {
            return Jet::constant(0.0);
        }
        let n = self.shape.nvars;
        let d = self.shape.degree;
        if d == 0 {
            return Jet::zeros(self.shape.clone());
        }
        let s = shape(n, d - 1);
        let mut out = vec![0.0; s.len()];
        let mut up = vec![0u8; n];
        for (i, m) in s.monomials.iter().enumerate() {
            up.copy_from_slice(m);
            up[var] += 1;
            let src = self.shape.index[&up];
            out[i] = (m[var] as f64 + 1.0) * self.coeffs[src];
        }
        Jet {
            shape: s,
            coeffs: out,
        }
    }

    /// Coefficients with the constant term replaced by zero.
    fn increment(&self) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        h
    }

    /// `f(self)` given the Taylor coefficients `c[m] = f^(m)(a0) / m!` of `f`
    /// at the constant term `a0`. Horner evaluation in the nilpotent increment.
    pub fn compose(&self, c: &[f64]) -> Jet {
        let d = self.shape.degree;
        if self.is_constant() || d == 0 {
            let mut j = self.clone();
            j.coeffs[0] = c[0];
            return j;
        }
        let h = self.increment();
        let mut r = Jet::constant_in(self.shape.clone(), c[d]);
        for m in (0..d).rev() {
            r = mul_same(&r, &h);
            r.coeffs[0] += c[m];
        }
        r
    }

    fn degree(&self) -> usize {
        if self.is_constant() {
            0
        } else {
            self.shape.degree
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            shape: self.shape.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Bring two jets to a common shape. Constants broadcast; jets over the same
/// variables but different degrees are truncated to the smaller degree.
fn unify(a: &Jet, b: &Jet) -> (Jet, Jet) {
    if Arc::ptr_eq(&a.shape, &b.shape) {
        return (a.clone(), b.clone());
    }
    if a.is_constant() {
        return (Jet::constant_in(b.shape.clone(), a.coeffs[0]), b.clone());
    }
    if b.is_constant() {
        return (a.clone(), Jet::constant_in(a.shape.clone(), b.coeffs[0]));
    }
    assert_eq!(
        a.shape.nvars, b.shape.nvars,
        "jets over different variable sets cannot be combined"
    );
    let d = a.shape.degree.min(b.shape.degree);
    (a.truncate(d), b.truncate(d))
}

fn mul_same(a: &Jet, b: &Jet) -> Jet {
    let mut out = vec![0.0; a.shape.len()];
    for &(i, j, t) in &a.shape.products {
        out[t as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
    }
    Jet {
        shape: a.shape.clone(),
        coeffs: out,
    }
}

fn series_powf(a0: f64, p: f64, d: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(d + 1);
    c.push(a0.powf(p));
    for m in 1..=d {
        // binom(p, m) a0^(p-m)
        let mut b = 1.0;
        for k in 0..m {
            b *= (p - k as f64) / (k as f64 + 1.0);
        }
        c.push(b * a0.powf(p - m as f64));
    }
    c
}

fn series_powi(a0: f64, k: i32, d: usize) -> Vec<f64> {
    if k < 0 {
        return series_powf(a0, k as f64, d);
    }
    let mut c = Vec::with_capacity(d + 1);
    for m in 0..=d {
        if m as i32 > k {
            c.push(0.0);
            continue;
        }
        let mut b = 1.0;
        for j in 0..m {
            b *= (k - j as i32) as f64 / (j as f64 + 1.0);
        }
        c.push(b * a0.powi(k - m as i32));
    }
    c
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn recip(&self) -> Self {
        let a0 = self.coeffs[0];
        let d = self.degree();
        let c: Vec<f64> = (0..=d)
            .map(|m| {
                let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                s / a0.powi(m as i32 + 1)
            })
            .collect();
        self.compose(&c)
    }

    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            return self.powi(p as i32);
        }
        self.compose(&series_powf(self.coeffs[0], p, self.degree()))
    }

    fn powi(&self, k: i32) -> Self {
        self.compose(&series_powi(self.coeffs[0], k, self.degree()))
    }

    fn exp(&self) -> Self {
        let e = self.coeffs[0].exp();
        let c: Vec<f64> = (0..=self.degree()).map(|m| e / factorial(m)).collect();
        self.compose(&c)
    }

    fn ln(&self) -> Self {
        let a0 = self.coeffs[0];
        let c: Vec<f64> = (0..=self.degree())
            .map(|m| {
                if m == 0 {
                    a0.ln()
                } else {
                    let s = if m % 2 == 1 { 1.0 } else { -1.0 };
                    s / (m as f64 * a0.powi(m as i32))
                }
            })
            .collect();
        self.compose(&c)
    }

    fn sin(&self) -> Self {
        let (s, co) = self.coeffs[0].sin_cos();
        let cyc = [s, co, -s, -co];
        let c: Vec<f64> = (0..=self.degree())
            .map(|m| cyc[m % 4] / factorial(m))
            .collect();
        self.compose(&c)
    }

    fn cos(&self) -> Self {
        let (s, co) = self.coeffs[0].sin_cos();
        let cyc = [co, -s, -co, s];
        let c: Vec<f64> = (0..=self.degree())
            .map(|m| cyc[m % 4] / factorial(m))
            .collect();
        self.compose(&c)
    }

    fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        if rhs.is_constant() {
            return self + rhs.coeffs[0];
        }
        if self.is_constant() {
            return rhs + self.coeffs[0];
        }
        let (mut a, b) = unify(&self, &rhs);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        if rhs.is_constant() {
            return self - rhs.coeffs[0];
        }
        let (mut a, b) = unify(&self, &rhs);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        a
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        if rhs.is_constant() {
            return self * rhs.coeffs[0];
        }
        if self.is_constant() {
            return rhs * self.coeffs[0];
        }
        let (a, b) = unify(&self, &rhs);
        mul_same(&a, &b)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        if rhs.is_constant() {
            return self / rhs.coeffs[0];
        }
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|c| -c)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map(|c| c * rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.map(|c| c / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(n: usize, d: usize, at: &[f64]) -> Vec<Jet> {
        let s = shape(n, d);
        (0..n).map(|i| Jet::variable(s.clone(), at[i], i)).collect()
    }

    #[test]
    fn shape_sizes_are_binomial() {
        assert_eq!(shape(2, 3).len(), 10);
        assert_eq!(shape(3, 5).len(), 56);
        assert_eq!(shape(6, 6).len(), 924);
    }

    #[test]
    fn lower_degree_shape_is_prefix() {
        let a = shape(3, 5);
        let b = shape(3, 2);
        for i in 0..b.len() {
            assert_eq!(a.monomial(i), b.monomial(i));
        }
    }

    #[test]
    fn mixed_monomial_partial() {
        // (y1)^2 y2 at (3, 5): d^2/dy1 dy2 = 2 y1 = 6
        let y = vars(2, 3, &[3.0, 5.0]);
        let f = y[0].clone() * y[0].clone() * y[1].clone();
        assert_eq!(f.partial(&[1, 1]), 6.0);
        assert_eq!(f.partial(&[2, 1]), 2.0);
        assert_eq!(f.partial(&[0, 0]), 45.0);
    }

    #[test]
    fn elementary_functions_match_known_derivatives() {
        let x = vars(1, 4, &[0.7])[0].clone();
        let e = x.exp();
        for k in 0..=4 {
            assert!((e.partial(&[k]) - 0.7f64.exp()).abs() < 1e-14);
        }
        let s = x.sin();
        let want = [
            0.7f64.sin(),
            0.7f64.cos(),
            -0.7f64.sin(),
            -0.7f64.cos(),
            0.7f64.sin(),
        ];
        for k in 0..=4 {
            assert!((s.partial(&[k as u8]) - want[k]).abs() < 1e-14);
        }
        let l = x.ln();
        // d^3 ln x = 2 / x^3
        assert!((l.partial(&[3]) - 2.0 / 0.7f64.powi(3)).abs() < 1e-12);
        let r = x.sqrt();
        // d^2 sqrt x = -1/4 x^-3/2
        assert!((r.partial(&[2]) + 0.25 * 0.7f64.powf(-1.5)).abs() < 1e-13);
    }

    #[test]
    fn division_inverts_multiplication() {
        let y = vars(2, 4, &[1.3, -0.4]);
        let a = y[0].clone() * y[1].clone() + 2.0;
        let b = y[0].clone().exp() + y[1].clone();
        let q = (a.clone() * b.clone()) / b;
        for (u, v) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let y = vars(2, 4, &[1.0, 2.0]);
        let f = y[0].powi(3) * y[1].clone();
        let d = f.derivative(0);
        assert_eq!(d.shape().degree(), 3);
        // d/dy1 (y1^3 y2) = 3 y1^2 y2 ; its d/dy1 d/dy2 = 6 y1 = 6
        assert!((d.partial(&[1, 1]) - 6.0).abs() < 1e-14);
        assert!((d.partial(&[0, 0]) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn nan_propagates_for_sqrt_of_negative() {
        let x = vars(1, 2, &[-1.0])[0].clone();
        assert!(!x.sqrt().is_finite());
    }
}
