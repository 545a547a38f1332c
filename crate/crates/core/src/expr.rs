//! Small arithmetic-expression language: `+ - * / ^`, unary minus,
//! parentheses, numeric literals, named variables and the functions
//! `sqrt exp ln sin cos`. Expressions evaluate over any [`Scalar`] and can be
//! differentiated symbolically.

use std::fmt;

use crate::derivjet::{Scalar, ScalarField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

use Expr::*;

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

// Constructors with light constant folding so symbolic derivatives stay small.
fn add(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Const(a), Const(c)) => Const(a + c),
        (Const(a), _) if *a == 0.0 => r,
        (_, Const(c)) if *c == 0.0 => l,
        _ => Add(b(l), b(r)),
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Const(a), Const(c)) => Const(a - c),
        (_, Const(c)) if *c == 0.0 => l,
        (Const(a), _) if *a == 0.0 => neg(r),
        _ => Sub(b(l), b(r)),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Const(a), Const(c)) => Const(a * c),
        (Const(a), _) | (_, Const(a)) if *a == 0.0 => Const(0.0),
        (Const(a), _) if *a == 1.0 => r,
        (_, Const(c)) if *c == 1.0 => l,
        _ => Mul(b(l), b(r)),
    }
}

fn div(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Const(a), _) if *a == 0.0 => Const(0.0),
        (_, Const(c)) if *c == 1.0 => l,
        _ => Div(b(l), b(r)),
    }
}

fn neg(e: Expr) -> Expr {
    match e {
        Const(a) => Const(-a),
        Neg(inner) => *inner,
        e => Neg(b(e)),
    }
}

fn pow(l: Expr, r: Expr) -> Expr {
    match &r {
        Const(c) if *c == 0.0 => Const(1.0),
        Const(c) if *c == 1.0 => l,
        _ => Pow(b(l), b(r)),
    }
}

impl Expr {
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            vars,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e.fold())
    }

    /// Evaluate variable-free subtrees once.
    fn fold(self) -> Expr {
        let e = match self {
            Add(l, r) => Add(b(l.fold()), b(r.fold())),
            Sub(l, r) => Sub(b(l.fold()), b(r.fold())),
            Mul(l, r) => Mul(b(l.fold()), b(r.fold())),
            Div(l, r) => Div(b(l.fold()), b(r.fold())),
            Neg(e) => Neg(b(e.fold())),
            Pow(l, r) => Pow(b(l.fold()), b(r.fold())),
            Call(f, e) => Call(f, b(e.fold())),
            e => return e,
        };
        if e.is_constant() {
            Const(e.eval::<f64>(&[]))
        } else {
            e
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Const(_) => true,
            Var(_) => false,
            Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r) | Pow(l, r) => {
                l.is_constant() && r.is_constant()
            }
            Neg(e) | Call(_, e) => e.is_constant(),
        }
    }

    pub fn eval<T: Scalar>(&self, vars: &[T]) -> T {
        match self {
            Const(c) => T::cst(*c),
            Var(i) => vars[*i].clone(),
            Add(l, r) => l.eval(vars) + r.eval(vars),
            Sub(l, r) => l.eval(vars) - r.eval(vars),
            Mul(l, r) => l.eval(vars) * r.eval(vars),
            Div(l, r) => l.eval(vars) / r.eval(vars),
            Neg(e) => -e.eval(vars),
            Pow(base, ex) => {
                let bv = base.eval(vars);
                match ex.as_ref() {
                    Const(c) if c.fract() == 0.0 && c.abs() <= 64.0 => bv.powi(*c as i32),
                    Const(c) => bv.powf(*c),
                    e => (e.eval(vars) * bv.ln()).exp(),
                }
            }
            Call(f, e) => {
                let v = e.eval(vars);
                match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }

    /// Symbolic partial derivative in variable `var`.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Add(l, r) => add(l.derivative(var), r.derivative(var)),
            Sub(l, r) => sub(l.derivative(var), r.derivative(var)),
            Mul(l, r) => add(
                mul(l.derivative(var), (**r).clone()),
                mul((**l).clone(), r.derivative(var)),
            ),
            Div(l, r) => sub(
                div(l.derivative(var), (**r).clone()),
                div(
                    mul((**l).clone(), r.derivative(var)),
                    pow((**r).clone(), Const(2.0)),
                ),
            ),
            Neg(e) => neg(e.derivative(var)),
            Pow(base, ex) => {
                if let Const(c) = ex.as_ref() {
                    mul(
                        mul(Const(*c), pow((**base).clone(), Const(c - 1.0))),
                        base.derivative(var),
                    )
                } else {
                    // d(b^e) = b^e (e' ln b + e b'/b)
                    let t = add(
                        mul(ex.derivative(var), Call(Func::Ln, base.clone())),
                        div(mul((**ex).clone(), base.derivative(var)), (**base).clone()),
                    );
                    mul(self.clone(), t)
                }
            }
            Call(f, e) => {
                let inner = (**e).clone();
                let outer = match f {
                    Func::Sqrt => div(Const(0.5), Call(Func::Sqrt, b(inner))),
                    Func::Exp => Call(Func::Exp, b(inner)),
                    Func::Ln => div(Const(1.0), inner),
                    Func::Sin => Call(Func::Cos, b(inner)),
                    Func::Cos => neg(Call(Func::Sin, b(inner))),
                };
                mul(outer, e.derivative(var))
            }
        }
    }

    /// Whether the expression mentions variable `var`.
    pub fn uses(&self, var: usize) -> bool {
        match self {
            Const(_) => false,
            Var(i) => *i == var,
            Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r) | Pow(l, r) => l.uses(var) || r.uses(var),
            Neg(e) | Call(_, e) => e.uses(var),
        }
    }

    /// Render with the given variable names.
    pub fn display<'a>(&'a self, vars: &'a [&'a str]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, vars }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a [&'a str],
}

impl<'a> ExprDisplay<'a> {
    fn sub(&self, e: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: e,
            vars: self.vars,
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = |e| self.sub(e);
        match self.expr {
            Const(c) => write!(f, "{c}"),
            Var(i) => write!(f, "{}", self.vars[*i]),
            Add(l, r) => write!(f, "({} + {})", d(l), d(r)),
            Sub(l, r) => write!(f, "({} - {})", d(l), d(r)),
            Mul(l, r) => write!(f, "({} * {})", d(l), d(r)),
            Div(l, r) => write!(f, "({} / {})", d(l), d(r)),
            Neg(e) => write!(f, "(-{})", d(e)),
            Pow(l, r) => write!(f, "({} ^ {})", d(l), d(r)),
            Call(func, e) => write!(f, "{}({})", func.name(), d(e)),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Add(b(lhs), b(self.term()?));
            } else if self.eat(b'-') {
                lhs = Sub(b(lhs), b(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Mul(b(lhs), b(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Div(b(lhs), b(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Neg(b(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let ex = self.unary()?;
            return Ok(Pow(b(base), b(ex)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                text.parse::<f64>().map(Const).map_err(|_| Error::Parse {
                    column: start + 1,
                    message: format!("invalid number '{text}'"),
                })
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if self.peek() == Some(b'(') {
                    let func = Func::from_name(name).ok_or_else(|| Error::Parse {
                        column: start + 1,
                        message: format!("unknown function '{name}'"),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.error("expected ')'"));
                    }
                    return Ok(Call(func, b(arg)));
                }
                if name == "pi" {
                    return Ok(Const(std::f64::consts::PI));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Var(i)),
                    None => Err(Error::Parse {
                        column: start + 1,
                        message: format!("unknown variable '{name}'"),
                    }),
                }
            }
            Some(c) => Err(self.error(&format!("unexpected character '{}'", c as char))),
        }
    }
}

/// Variable names `x1..xn, y1..yn` used by chart-level expressions.
pub fn chart_variables(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("y{i}")))
        .collect()
}

/// A scalar field `f(x, y)` given as an expression in `x1..xn, y1..yn`.
#[derive(Clone, Debug)]
pub struct ExprField {
    n: usize,
    expr: Expr,
}

impl ExprField {
    pub fn parse(src: &str, n: usize) -> Result<ExprField> {
        let names = chart_variables(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(ExprField {
            n,
            expr: Expr::parse(src, &refs)?,
        })
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        let vars: Vec<T> = x.iter().chain(y).cloned().collect();
        self.expr.eval(&vars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vals: &[f64]) -> f64 {
        Expr::parse(src, &["s", "t"]).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1+2*3", &[0.0, 0.0]), 7.0);
        assert_eq!(ev("2^3^2", &[0.0, 0.0]), 512.0);
        assert_eq!(ev("-2^2", &[0.0, 0.0]), -4.0);
        assert_eq!(ev("8/4/2", &[0.0, 0.0]), 1.0);
        assert_eq!(ev("s+t+0.2*s*t/(s+t)", &[0.36, 0.64]), 1.0 + 0.2 * 0.2304);
        assert_eq!(ev("sqrt(s)*1e-1", &[4.0, 0.0]), 0.2);
    }

    #[test]
    fn parse_errors_carry_columns() {
        let e = Expr::parse("s + * t", &["s", "t"]).unwrap_err();
        assert!(matches!(e, Error::Parse { column: 5, .. }), "{e:?}");
        let e = Expr::parse("s + u", &["s", "t"]).unwrap_err();
        assert!(matches!(e, Error::Parse { column: 5, .. }), "{e:?}");
        let e = Expr::parse("(s + t", &["s", "t"]).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    #[test]
    fn symbolic_derivative_matches_hand_result() {
        let e = Expr::parse("s*t^2 + sqrt(s) + exp(t)/s", &["s", "t"]).unwrap();
        let (s, t): (f64, f64) = (1.3, 0.7);
        let ds = e.derivative(0).eval(&[s, t]);
        let dt = e.derivative(1).eval(&[s, t]);
        let want_ds = t * t + 0.5 / s.sqrt() - t.exp() / (s * s);
        let want_dt = 2.0 * s * t + t.exp() / s;
        assert!((ds - want_ds).abs() < 1e-14);
        assert!((dt - want_dt).abs() < 1e-14);
    }

    #[test]
    fn display_round_trips() {
        let vars = ["s", "t"];
        let e = Expr::parse("s+t+0.2*s*t/(s+t) - s^1.5", &vars).unwrap();
        let text = e.display(&vars).to_string();
        let again = Expr::parse(&text, &vars).unwrap();
        assert_eq!(e.eval(&[0.3, 0.8]), again.eval(&[0.3, 0.8]));
    }
}
