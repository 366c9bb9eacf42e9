//! Small infix expression reader, close to how formulas are typeset:
//! `x2(3x1^3 - 2x1)`, `h[x4(4x1 - x1^3) + 2h x2]`, `9/2 x1^6`.
//!
//! Juxtaposition is multiplication and factor order is preserved, so the
//! same syntax tree can be evaluated in a commutative or a free algebra.

use crate::coeffpoly::{Poly, PolyError, Scalar, Variable};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Scalar),
    Var(Variable),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
}

/// The operations an expression needs from its target ring.
pub trait ExprRing: Sized {
    fn from_scalar(c: &Scalar) -> Self;
    fn from_var(v: Variable) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Expr {
    pub fn eval<R: ExprRing>(&self) -> R {
        match self {
            Expr::Num(c) => R::from_scalar(c),
            Expr::Var(v) => R::from_var(*v),
            Expr::Neg(e) => e.eval::<R>().neg(),
            Expr::Sum(es) => {
                let mut acc = R::from_scalar(&Scalar::zero());
                for e in es {
                    acc = acc.add(&e.eval());
                }
                acc
            }
            Expr::Product(es) => {
                let mut acc = R::from_scalar(&Scalar::from_integer(1.into()));
                for e in es {
                    acc = acc.mul(&e.eval());
                }
                acc
            }
            Expr::Pow(e, k) => {
                let base: R = e.eval();
                let mut acc = R::from_scalar(&Scalar::from_integer(1.into()));
                for _ in 0..*k {
                    acc = acc.mul(&base);
                }
                acc
            }
        }
    }
}

impl ExprRing for Poly {
    fn from_scalar(c: &Scalar) -> Self {
        Poly::constant(c.clone())
    }
    fn from_var(v: Variable) -> Self {
        Poly::var(v)
    }
    fn add(&self, other: &Self) -> Self {
        self.add_ref(other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_ref(other)
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Parses and evaluates as a commutative polynomial.
pub fn poly(s: &str) -> Result<Poly, PolyError> {
    Ok(parse_expr(s)?.eval())
}

struct Reader<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&mut self) -> Option<u8> {
        let b = self.s.as_bytes();
        while self.pos < b.len() && b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        b.get(self.pos).copied()
    }

    fn digits(&mut self) -> &'a str {
        let b = self.s.as_bytes();
        let start = self.pos;
        while self.pos < b.len() && b[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    fn sum(&mut self) -> Result<Expr, PolyError> {
        let mut terms = Vec::new();
        loop {
            let neg = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                _ if terms.is_empty() => false,
                _ => break,
            };
            let t = self.product()?;
            terms.push(if neg { Expr::Neg(Box::new(t)) } else { t });
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn product(&mut self) -> Result<Expr, PolyError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' || c == b'[' => {
                    factors.push(self.factor()?);
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) })
    }

    fn factor(&mut self) -> Result<Expr, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.peek();
            let e = self.digits();
            let k: u32 = e.parse().map_err(|_| self.err("bad exponent"))?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, PolyError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(c) if c.is_ascii_digit() => {
                let num: BigInt = self.digits().parse().map_err(|_| self.err("bad integer"))?;
                let mut val = BigRational::from_integer(num);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.peek();
                    let den: BigInt = self.digits().parse().map_err(|_| self.err("bad denominator"))?;
                    if den.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    val /= BigRational::from_integer(den);
                }
                Ok(Expr::Num(val))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let b = self.s.as_bytes();
                let start = self.pos;
                while self.pos < b.len() && b[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                self.digits();
                if self.pos + 1 < b.len() && b[self.pos] == b'_' && b[self.pos + 1].is_ascii_digit() {
                    self.pos += 1;
                    self.digits();
                }
                let name = &self.s[start..self.pos];
                Variable::from_name(name)
                    .map(Expr::Var)
                    .ok_or_else(|| PolyError::Parse { pos: start, msg: format!("unknown variable '{}'", name) })
            }
            Some(open @ (b'(' | b'[')) => {
                self.pos += 1;
                let inner = self.sum()?;
                let close = if open == b'(' { b')' } else { b']' };
                if self.peek() != Some(close) {
                    return Err(self.err("unbalanced bracket"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.err("expected number, variable or bracket")),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr, PolyError> {
    let mut r = Reader { s, pos: 0 };
    if r.peek().is_none() {
        return Err(r.err("empty expression"));
    }
    let e = r.sum()?;
    if r.peek().is_some() {
        return Err(r.err("unexpected character"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffpoly::p;

    fn ev(s: &str) -> Poly {
        parse_expr(s).unwrap().eval()
    }

    #[test]
    fn typeset_forms() {
        assert_eq!(ev("x2(3x1^3-2x1)"), p("3*x1^3*x2 - 2*x1*x2"));
        assert_eq!(ev("x4(4x1-x1^3)+x3x2(3x1^2-6)"), p("4*x1*x4 - 1*x1^3*x4 + 3*x1^2*x2*x3 - 6*x2*x3"));
        assert_eq!(ev("h^2(-6x1^4 + 9/2 x1^6 + 3/2 x1^2)"), p("-6*h^2*x1^4 + 9/2*h^2*x1^6 + 3/2*h^2*x1^2"));
        assert_eq!(ev("h[x2 - (x1)^2] - 0"), p("h*x2 - h*x1^2"));
        assert_eq!(ev("h x2[-(6+2C)x1+3C x1^7]"), p("-6*h*x1*x2 - 2*C*h*x1*x2 + 3*C*h*x1^7*x2"));
        assert_eq!(ev("l1_4^2 - lam"), p("l1_4^2 - lam"));
    }

    #[test]
    fn errors() {
        assert!(parse_expr("").is_err());
        assert!(parse_expr("x1 +").is_err());
        assert!(parse_expr("(x1").is_err());
        assert!(parse_expr("x1 ) ").is_err());
        assert!(parse_expr("q3").is_err());
        assert!(parse_expr("1/0").is_err());
    }
}
