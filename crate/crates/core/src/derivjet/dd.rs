use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`, about 32 significant
/// digits. Used to evaluate finite-difference stencils, where plain `f64`
/// loses high orders to cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
const FRAC_PI_2: Dd = Dd {
    hi: std::f64::consts::FRAC_PI_2,
    lo: 6.123_233_995_736_766e-17,
};
const EPS: f64 = 1e-33;

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let v = s - a;
    Dd {
        hi: s,
        lo: (a - (s - v)) + (b - v),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    pub const fn new(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    fn nan() -> Dd {
        Dd::new(f64::NAN)
    }

    fn scale2(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// `exp(r) - 1` for small `r`, by Taylor series.
    fn expm1_small(r: Dd) -> Dd {
        let mut term = r;
        let mut sum = r;
        let mut k = 1.0;
        while term.hi.abs() > EPS * sum.hi.abs().max(EPS) {
            k += 1.0;
            term = term * r / k;
            sum = sum + term;
        }
        sum
    }

    /// `(sin r, cos r)` for `|r| <= π/4`.
    fn sin_cos_small(r: Dd) -> (Dd, Dd) {
        let r2 = r * r;
        let (mut s, mut term) = (r, r);
        let mut k = 1.0;
        while term.hi.abs() > EPS {
            term = -(term * r2) / ((k + 1.0) * (k + 2.0));
            s = s + term;
            k += 2.0;
        }
        let (mut c, mut term) = (Dd::new(1.0), Dd::new(1.0));
        let mut k = 0.0;
        while term.hi.abs() > EPS {
            term = -(term * r2) / ((k + 1.0) * (k + 2.0));
            c = c + term;
            k += 2.0;
        }
        (s, c)
    }

    fn sin_cos(self) -> (Dd, Dd) {
        if !self.hi.is_finite() {
            return (Dd::nan(), Dd::nan());
        }
        let k = (self.hi / FRAC_PI_2.hi).round();
        let (s, c) = Dd::sin_cos_small(self - FRAC_PI_2 * k);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Dd {
        Dd::new(v)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.hi, b.hi);
        let t = two_sum(self.lo, b.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + -b
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = two_prod(self.hi, b.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2) + Dd::new(q3)
    }
}

macro_rules! with_f64 {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<f64> for Dd {
            type Output = Dd;
            fn $f(self, b: f64) -> Dd {
                self.$f(Dd::new(b))
            }
        }
    )*};
}

with_f64!(Add add, Sub sub, Mul mul, Div div);

impl Scalar for Dd {
    fn cst(v: f64) -> Self {
        Dd::new(v)
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }

    fn recip(&self) -> Self {
        Dd::new(1.0) / *self
    }

    fn sqrt(&self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(self.hi.sqrt());
        }
        let y = Dd::new(self.hi.sqrt());
        y + (*self - y * y) / (y * 2.0)
    }

    fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < 1024.0 {
            return self.powi(p as i32);
        }
        if self.hi == 0.0 && p > 0.0 {
            return Dd::new(0.0);
        }
        (self.ln() * p).exp()
    }

    fn powi(&self, k: i32) -> Self {
        let mut base = *self;
        let mut acc = Dd::new(1.0);
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if k < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    fn exp(&self) -> Self {
        if !self.hi.is_finite() || self.hi.abs() > 700.0 {
            return Dd::new(self.hi.exp());
        }
        let k = (self.hi / LN_2.hi).round();
        // e^x = 2^k (1 + m)^(2^10), with m = expm1(r / 2^10)
        let mut m = Dd::expm1_small((*self - LN_2 * k).scale2(-10));
        for _ in 0..10 {
            m = m * (m + 2.0);
        }
        (m + 1.0).scale2(k as i32)
    }

    fn ln(&self) -> Self {
        if !(self.hi > 0.0) || !self.hi.is_finite() {
            return Dd::new(self.hi.ln());
        }
        let x = Dd::new(self.hi.ln());
        x + *self * (-x).exp() - 1.0
    }

    fn sin(&self) -> Self {
        self.sin_cos().0
    }

    fn cos(&self) -> Self {
        self.sin_cos().1
    }

    fn is_finite(&self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}
