//! Truncated power series in up to three formal variables `u, v, w`, with
//! polynomial coefficients.
//!
//! Each variable carries its own exponent bound. Coefficients up to the
//! bounds are exact; everything above is unknown, so products take the
//! smaller bound.

use crate::coeffpoly::{int, is_nilpotent_var, Poly, Scalar};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),
    #[error("inner series has a constant term outside the nilpotent ideal")]
    NonNilpotentConstantTerm,
    #[error("outer series bound {have} too small, need {need}")]
    InsufficientBound { have: u32, need: u32 },
    #[error("leading coefficient is not invertible")]
    NotInvertible,
    #[error("series has a nonzero constant term")]
    NonZeroConstant,
    #[error("derivative of a series truncated at order 0")]
    BoundExhausted,
}

pub const VAR_NAMES: [&str; 3] = ["u", "v", "w"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    bounds: Vec<u32>,
    coeffs: BTreeMap<Vec<u32>, Poly>,
}

impl TruncSeries {
    pub fn zero(bounds: Vec<u32>) -> Self {
        assert!((1..=3).contains(&bounds.len()), "1 to 3 series variables");
        TruncSeries { bounds, coeffs: BTreeMap::new() }
    }

    pub fn constant(c: Poly, bounds: Vec<u32>) -> Self {
        let n = bounds.len();
        let mut s = Self::zero(bounds);
        s.add_coeff(vec![0; n], c);
        s
    }

    pub fn one(bounds: Vec<u32>) -> Self {
        Self::constant(Poly::one(), bounds)
    }

    /// The series variable with the given position.
    pub fn var(i: usize, bounds: Vec<u32>) -> Self {
        let mut e = vec![0; bounds.len()];
        e[i] = 1;
        let mut s = Self::zero(bounds);
        s.add_coeff(e, Poly::one());
        s
    }

    /// `sum_k coeffs[k] u^k`, dropping terms above `bound`.
    pub fn univariate(coeffs: &[Poly], bound: u32) -> Self {
        let mut s = Self::zero(vec![bound]);
        for (k, c) in coeffs.iter().enumerate() {
            s.add_coeff(vec![k as u32], c.clone());
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Poly)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> Poly {
        self.coeffs.get(e).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn constant_term(&self) -> Poly {
        self.coeff(&vec![0; self.nvars()])
    }

    fn in_bounds(&self, e: &[u32]) -> bool {
        e.iter().zip(&self.bounds).all(|(a, b)| a <= b)
    }

    /// Adds `c` to the coefficient at `e`; ignored above the bounds.
    pub fn add_coeff(&mut self, e: Vec<u32>, c: Poly) {
        assert_eq!(e.len(), self.nvars());
        if c.is_zero() || !self.in_bounds(&e) {
            return;
        }
        let entry = self.coeffs.entry(e.clone()).or_insert_with(Poly::zero);
        entry.add_assign_ref(&c);
        if entry.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn map_coeffs<F: Fn(&Poly) -> Poly>(&self, f: F) -> Self {
        let mut out = Self::zero(self.bounds.clone());
        for (e, c) in &self.coeffs {
            out.add_coeff(e.clone(), f(c));
        }
        out
    }

    pub fn with_bounds(&self, bounds: Vec<u32>) -> Self {
        assert_eq!(bounds.len(), self.nvars());
        let mut out = Self::zero(bounds);
        for (e, c) in &self.coeffs {
            out.add_coeff(e.clone(), c.clone());
        }
        out
    }

    /// Drops terms of total degree above `d`.
    pub fn truncate_total(&self, d: u32) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|e, _| e.iter().sum::<u32>() <= d);
        out
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.nvars() != other.nvars() {
            return Err(SeriesError::VarMismatch(self.nvars(), other.nvars()));
        }
        Ok(())
    }

    fn min_bounds(&self, other: &Self) -> Vec<u32> {
        self.bounds.iter().zip(&other.bounds).map(|(a, b)| *a.min(b)).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let mut out = self.with_bounds(self.min_bounds(other));
        for (e, c) in &other.coeffs {
            out.add_coeff(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, k: &Poly) -> Self {
        self.map_coeffs(|c| c * k)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.mul_inner(other, None, None)
    }

    /// Product dropping terms of total degree above `d`.
    pub fn mul_total(&self, other: &Self, d: u32) -> Result<Self, SeriesError> {
        self.mul_inner(other, Some(d), None)
    }

    /// Product with coefficients reduced modulo the nilpotent ideal.
    pub fn mul_nil(&self, other: &Self, nil: Option<u32>) -> Result<Self, SeriesError> {
        self.mul_inner(other, None, nil)
    }

    fn mul_inner(&self, other: &Self, total: Option<u32>, nil: Option<u32>) -> Result<Self, SeriesError> {
        self.check(other)?;
        let bounds = self.min_bounds(other);
        let mut acc: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            if ea.iter().zip(&bounds).any(|(a, b)| a > b) {
                continue;
            }
            for (eb, cb) in &other.coeffs {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if e.iter().zip(&bounds).any(|(a, b)| a > b) {
                    continue;
                }
                if let Some(d) = total {
                    if e.iter().sum::<u32>() > d {
                        continue;
                    }
                }
                let prod = match nil {
                    Some(m) => ca.mul_filtered(cb, |mono| {
                        mono.degree_where(is_nilpotent_var) <= m as i32
                    }),
                    None => ca * cb,
                };
                acc.entry(e).or_insert_with(Poly::zero).add_assign_ref(&prod);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(TruncSeries { bounds, coeffs: acc })
    }

    pub fn pow(&self, e: u32, nil: Option<u32>) -> Result<Self, SeriesError> {
        let mut out = Self::one(self.bounds.clone());
        for _ in 0..e {
            out = out.mul_nil(self, nil)?;
        }
        Ok(out)
    }

    /// Formal derivative in variable `i`; that bound drops by one.
    pub fn derivative(&self, i: usize) -> Result<Self, SeriesError> {
        if self.bounds[i] == 0 {
            return Err(SeriesError::BoundExhausted);
        }
        let mut bounds = self.bounds.clone();
        bounds[i] -= 1;
        let mut out = Self::zero(bounds);
        for (e, c) in &self.coeffs {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.add_coeff(f, c.scale(&int(e[i] as i64)));
        }
        Ok(out)
    }

    /// Composition `self(inners[0], inners[1], ...)`.
    ///
    /// Inner series must have zero constant term unless `nil` is set; then
    /// a constant term in the nilpotent ideal is allowed, provided the outer
    /// bound leaves room for the `m` extra orders it can pull down.
    pub fn compose(&self, inners: &[TruncSeries], nil: Option<u32>) -> Result<Self, SeriesError> {
        if inners.len() != self.nvars() {
            return Err(SeriesError::VarMismatch(self.nvars(), inners.len()));
        }
        let target_n = inners[0].nvars();
        for s in inners {
            if s.nvars() != target_n {
                return Err(SeriesError::VarMismatch(target_n, s.nvars()));
            }
        }
        let mut bounds = inners[0].bounds.clone();
        for s in &inners[1..] {
            bounds = bounds.iter().zip(&s.bounds).map(|(a, b)| *a.min(b)).collect();
        }
        let target_total: u32 = bounds.iter().sum();
        for (k, s) in inners.iter().enumerate() {
            let c = s.constant_term();
            if c.is_zero() {
                // Unknown outer terms start at total order bound + 1.
                if self.bounds[k] < target_total {
                    if target_n > 1 {
                        return Err(SeriesError::InsufficientBound { have: self.bounds[k], need: target_total });
                    }
                    bounds[0] = bounds[0].min(self.bounds[k]);
                }
                continue;
            }
            let m = nil.ok_or(SeriesError::NonNilpotentConstantTerm)?;
            if c.terms().any(|(mono, _)| mono.degree_where(is_nilpotent_var) == 0) {
                return Err(SeriesError::NonNilpotentConstantTerm);
            }
            if self.bounds[k] < target_total + m {
                return Err(SeriesError::InsufficientBound { have: self.bounds[k], need: target_total + m });
            }
        }
        let inners: Vec<TruncSeries> = inners.iter().map(|s| s.with_bounds(bounds.clone())).collect();
        let mut powers: Vec<Vec<TruncSeries>> = inners.iter().map(|s| vec![Self::one(s.bounds.clone())]).collect();
        let mut out = Self::zero(bounds.clone());
        for (e, c) in &self.coeffs {
            let mut term = Self::constant(c.clone(), bounds.clone());
            if let Some(m) = nil {
                term = term.map_coeffs(|p| p.truncate_nilpotent(m));
            }
            for (k, &ek) in e.iter().enumerate() {
                while powers[k].len() <= ek as usize {
                    let next = powers[k].last().unwrap().mul_nil(&inners[k], nil)?;
                    powers[k].push(next);
                }
                term = term.mul_nil(&powers[k][ek as usize], nil)?;
                if term.coeffs.is_empty() {
                    break;
                }
            }
            for (f, p) in term.coeffs {
                out.add_coeff(f, p);
            }
        }
        Ok(out)
    }

    /// Compositional inverse of a univariate series `x_1 u + x_2 u^2 + ...`
    /// with invertible `x_1`.
    pub fn comp_inverse(&self) -> Result<Self, SeriesError> {
        if self.nvars() != 1 {
            return Err(SeriesError::VarMismatch(1, self.nvars()));
        }
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonZeroConstant);
        }
        let n = self.bounds[0];
        let lead = self.coeff(&[1]);
        let inv = match lead.as_constant() {
            Some(c) if !c.is_zero() => Poly::constant(c.recip()),
            _ => lead.monomial_inverse().ok_or(SeriesError::NotInvertible)?,
        };
        let mut bar = vec![Poly::zero(), inv.clone()];
        for k in 2..=n {
            let partial = Self::univariate(&bar, k);
            let comp = self.with_bounds(vec![k]).compose(&[partial], None)?;
            bar.push(-&(&inv * &comp.coeff(&[k])));
        }
        Ok(Self::univariate(&bar, n))
    }

    /// `exp(self)` for a series with zero constant term.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonZeroConstant);
        }
        let top: u32 = self.bounds.iter().sum();
        let mut out = Self::one(self.bounds.clone());
        let mut pw = Self::one(self.bounds.clone());
        let mut fact = Scalar::one();
        for k in 1..=top {
            pw = pw.mul(self)?;
            fact *= int(k as i64);
            out = out.add(&pw.scale(&Poly::constant(fact.recip())))?;
        }
        Ok(out)
    }

    /// `self^e` for a series with constant term 1 and a polynomial exponent.
    pub fn binomial_power(&self, e: &Poly) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::NonZeroConstant);
        }
        let w = self.sub(&Self::one(self.bounds.clone()))?;
        let top: u32 = self.bounds.iter().sum();
        let mut out = Self::one(self.bounds.clone());
        let mut pw = Self::one(self.bounds.clone());
        let mut binom = Poly::one();
        for k in 1..=top {
            pw = pw.mul(&w)?;
            if pw.coeffs.is_empty() {
                break;
            }
            // binom(e, k) = binom(e, k-1) * (e - k + 1) / k
            binom = (&binom * &(e - &Poly::int(k as i64 - 1))).scale(&Scalar::new(1.into(), (k as i64).into()));
            out = out.add(&pw.scale(&binom))?;
        }
        Ok(out)
    }

    /// Re-expresses the series in a space with more variables: variable `i`
    /// becomes target variable `slots[i]`.
    pub fn embed(&self, slots: &[usize], bounds: Vec<u32>) -> Self {
        assert_eq!(slots.len(), self.nvars());
        let mut out = Self::zero(bounds.clone());
        for (e, c) in &self.coeffs {
            let mut f = vec![0; bounds.len()];
            for (i, s) in slots.iter().enumerate() {
                f[*s] += e[i];
            }
            out.add_coeff(f, c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            f.write_str("0")?;
        }
        for (k, (e, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, a)| **a > 0)
                .map(|(i, a)| if *a == 1 { VAR_NAMES[i].to_string() } else { format!("{}^{}", VAR_NAMES[i], a) })
                .collect();
            if mono.is_empty() {
                write!(f, "({})", c)?;
            } else {
                write!(f, "({})*{}", c, mono.join("*"))?;
            }
        }
        let b: Vec<String> = self.bounds.iter().enumerate().map(|(i, b)| format!("{}^{}", VAR_NAMES[i], b + 1)).collect();
        write!(f, " + O({})", b.join(", "))
    }
}

/// Coefficient polynomials as a series in `u` with the given kind of
/// coordinate: `sum_{i=start}^{n} v_i u^i`.
pub fn coordinate_series(coords: &[(u32, Poly)], bound: u32) -> TruncSeries {
    let mut s = TruncSeries::zero(vec![bound]);
    for (i, c) in coords {
        s.add_coeff(vec![*i], c.clone());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffpoly::{p, rat, Variable};
    use proptest::prelude::*;

    fn x_series(n: u32) -> TruncSeries {
        let mut c = vec![Poly::zero()];
        for i in 1..=n {
            c.push(Poly::var(Variable::x(i as i32)));
        }
        TruncSeries::univariate(&c, n)
    }

    #[test]
    fn inverse_first_terms() {
        let inv = x_series(3).comp_inverse().unwrap();
        assert_eq!(inv.coeff(&[1]), p("x1^-1"));
        assert_eq!(inv.coeff(&[2]), p("-1*x1^-3*x2"));
        assert_eq!(inv.coeff(&[3]), p("2*x1^-5*x2^2 - x1^-4*x3"));
    }

    #[test]
    fn exp_and_binomial_agree() {
        // (1+u)^2 through binomial_power, and exp(u) coefficients 1/k!
        let one_plus_u = TruncSeries::univariate(&[Poly::one(), Poly::one()], 4);
        let sq = one_plus_u.binomial_power(&Poly::int(2)).unwrap();
        assert_eq!(sq, TruncSeries::univariate(&[Poly::int(1), Poly::int(2), Poly::int(1)], 4));
        let e = TruncSeries::var(0, vec![4]).exp().unwrap();
        assert_eq!(e.coeff(&[4]), Poly::constant(rat(1, 24)));
    }

    #[test]
    fn symbolic_binomial() {
        let one_plus_u = TruncSeries::univariate(&[Poly::one(), Poly::one()], 2);
        let s = one_plus_u.binomial_power(&p("lam")).unwrap();
        assert_eq!(s.coeff(&[2]), p("1/2*lam^2 - 1/2*lam"));
    }

    #[test]
    fn compose_rejects_constant_term() {
        let outer = x_series(3);
        let inner = TruncSeries::univariate(&[Poly::one(), Poly::one()], 3);
        assert_eq!(outer.compose(&[inner], None), Err(SeriesError::NonNilpotentConstantTerm));
        let inner = TruncSeries::univariate(&[p("x0"), Poly::one()], 3);
        assert!(matches!(outer.compose(&[inner], Some(1)), Err(SeriesError::InsufficientBound { .. })));
    }

    #[test]
    fn nilpotent_shift() {
        // (u + y0)^2 with y0^2 = 0 is u^2 + 2 y0 u
        let outer = TruncSeries::univariate(&[Poly::zero(), Poly::zero(), Poly::one()], 5);
        let inner = TruncSeries::univariate(&[p("y0"), Poly::one()], 3);
        let r = outer.compose(&[inner], Some(1)).unwrap();
        assert_eq!(r, TruncSeries::univariate(&[Poly::zero(), p("2*y0"), Poly::one()], 3));
    }

    #[test]
    fn derivative_lowers_bound() {
        let s = x_series(3);
        let d = s.derivative(0).unwrap();
        assert_eq!(d.bounds(), &[2]);
        assert_eq!(d.coeff(&[2]), p("3*x3"));
    }

    fn arb_series() -> impl Strategy<Value = TruncSeries> {
        prop::collection::vec((-3i64..4, 1i64..3), 1..5).prop_map(|cs| {
            let mut c = vec![Poly::zero()];
            for (a, b) in cs {
                c.push(Poly::constant(rat(a, b)));
            }
            TruncSeries::univariate(&c, 5)
        })
    }

    proptest! {
        #[test]
        fn compose_associative(a in arb_series(), b in arb_series(), c in arb_series()) {
            let l = a.compose(&[b.compose(std::slice::from_ref(&c), None).unwrap()], None).unwrap();
            let r = a.compose(&[b], None).unwrap().compose(&[c], None).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn chain_rule(a in arb_series(), b in arb_series()) {
            let lhs = a.compose(std::slice::from_ref(&b), None).unwrap().derivative(0).unwrap();
            let rhs = a.derivative(0).unwrap()
                .compose(std::slice::from_ref(&b), None).unwrap()
                .mul(&b.derivative(0).unwrap()).unwrap();
            prop_assert_eq!(lhs.with_bounds(vec![4]), rhs.with_bounds(vec![4]));
        }

        #[test]
        fn inverse_composes_to_identity(a in arb_series(), lead in 1i64..4) {
            let mut a = a;
            a.add_coeff(vec![1], Poly::int(lead) - a.coeff(&[1]));
            let inv = a.comp_inverse().unwrap();
            let id = TruncSeries::var(0, vec![5]);
            prop_assert_eq!(a.compose(std::slice::from_ref(&inv), None).unwrap(), id.clone());
            prop_assert_eq!(inv.compose(&[a], None).unwrap(), id);
        }

        #[test]
        fn exp_is_multiplicative(a in arb_series(), b in arb_series()) {
            let lhs = a.add(&b).unwrap().exp().unwrap();
            let rhs = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
