//! Exact sparse multivariate Laurent polynomials over the rationals.
//!
//! Every verifier in the crate bottoms out in [`Poly`]. Values are immutable;
//! operations return fresh polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

/// Exact rational scalar used everywhere.
pub type Scalar = BigRational;

/// `n/d` as a scalar.
pub fn rat(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer scalar.
pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("substitution would divide by a non-monomial value for {0}")]
    SubstituteSingular(String),
    #[error("negative exponent on non-invertible variable {0}")]
    NotInvertible(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    GroupX,
    GroupY,
    GroupZ,
    DensityX,
    Param,
    AuxT,
}

/// Reserved parameter indices.
pub mod params {
    pub const H: i32 = 0;
    pub const LAMBDA: i32 = 1;
    pub const C: i32 = 2;
    /// Weight of a density.
    pub const WEIGHT: i32 = 3;
    /// `C1..C5` live at `10 + k`.
    pub const C_BASE: i32 = 10;
    /// Symbolic structure constants `l{m}_{n}`.
    pub const TABLE_BASE: i32 = 10_000;

    pub fn c_k(k: i32) -> i32 {
        C_BASE + k
    }

    pub fn table_entry(m: i32, n: i32) -> i32 {
        assert!((0..1000).contains(&m) && (0..1000).contains(&n));
        TABLE_BASE + 1000 * m + n
    }
}

/// A polynomial indeterminate. Equality and order ignore `invertible`.
#[derive(Clone, Copy, Debug)]
pub struct Variable {
    pub kind: VarKind,
    pub index: i32,
    pub invertible: bool,
}

impl PartialEq for Variable {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.index == other.index
    }
}
impl Eq for Variable {}
impl Hash for Variable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.index.hash(state);
    }
}
impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Variable {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.kind, self.index).cmp(&(other.kind, other.index))
    }
}

impl Variable {
    pub fn new(kind: VarKind, index: i32) -> Self {
        Variable { kind, index, invertible: false }
    }
    pub fn invertible(kind: VarKind, index: i32) -> Self {
        Variable { kind, index, invertible: true }
    }
    /// Group coordinate of the given kind; `x_1` is the invertible one.
    pub fn coord(kind: VarKind, index: i32) -> Self {
        Variable { kind, index, invertible: index == 1 }
    }
    pub fn x(i: i32) -> Self {
        Self::coord(VarKind::GroupX, i)
    }
    pub fn y(i: i32) -> Self {
        Self::coord(VarKind::GroupY, i)
    }
    pub fn z(i: i32) -> Self {
        Self::coord(VarKind::GroupZ, i)
    }
    pub fn density(i: i32) -> Self {
        Self::new(VarKind::DensityX, i)
    }
    pub fn param(i: i32) -> Self {
        Self::new(VarKind::Param, i)
    }
    pub fn h() -> Self {
        Self::param(params::H)
    }
    pub fn lambda() -> Self {
        Self::param(params::LAMBDA)
    }
    pub fn c() -> Self {
        Self::param(params::C)
    }
    pub fn weight() -> Self {
        Self::param(params::WEIGHT)
    }
    pub fn c_k(k: i32) -> Self {
        Self::param(params::c_k(k))
    }
    pub fn table(m: i32, n: i32) -> Self {
        Self::param(params::table_entry(m, n))
    }
    /// The Jacobian unit `t`, always invertible.
    pub fn t() -> Self {
        Self::invertible(VarKind::AuxT, 0)
    }
    pub fn with_kind(self, kind: VarKind) -> Self {
        Variable { kind, ..self }
    }

    pub fn is_group(&self) -> bool {
        matches!(self.kind, VarKind::GroupX | VarKind::GroupY | VarKind::GroupZ)
    }

    pub fn name(&self) -> String {
        fn idx(i: i32) -> String {
            if i < 0 {
                format!("m{}", -i)
            } else {
                i.to_string()
            }
        }
        match self.kind {
            VarKind::GroupX => format!("x{}", idx(self.index)),
            VarKind::GroupY => format!("y{}", idx(self.index)),
            VarKind::GroupZ => format!("z{}", idx(self.index)),
            VarKind::DensityX => format!("xd{}", idx(self.index)),
            VarKind::AuxT => {
                if self.index == 0 {
                    "t".into()
                } else {
                    format!("t{}", idx(self.index))
                }
            }
            VarKind::Param => match self.index {
                params::H => "h".into(),
                params::LAMBDA => "lam".into(),
                params::C => "C".into(),
                params::WEIGHT => "wt".into(),
                i if (params::C_BASE + 1..params::C_BASE + 10).contains(&i) => {
                    format!("C{}", i - params::C_BASE)
                }
                i if i >= params::TABLE_BASE => {
                    let r = i - params::TABLE_BASE;
                    format!("l{}_{}", r / 1000, r % 1000)
                }
                i => format!("p{}", idx(i)),
            },
        }
    }

    /// Inverse of [`Variable::name`].
    pub fn from_name(name: &str) -> Option<Variable> {
        fn idx(s: &str) -> Option<i32> {
            if s.is_empty() {
                return None;
            }
            if let Some(r) = s.strip_prefix('m') {
                return r.parse::<i32>().ok().filter(|v| *v > 0).map(|v| -v);
            }
            if !s.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            s.parse().ok()
        }
        match name {
            "h" => return Some(Self::h()),
            "lam" => return Some(Self::lambda()),
            "C" => return Some(Self::c()),
            "wt" => return Some(Self::weight()),
            "t" => return Some(Self::t()),
            _ => {}
        }
        if let Some(r) = name.strip_prefix("xd") {
            return idx(r).map(Self::density);
        }
        if let Some(r) = name.strip_prefix('x') {
            return idx(r).map(Self::x);
        }
        if let Some(r) = name.strip_prefix('y') {
            return idx(r).map(Self::y);
        }
        if let Some(r) = name.strip_prefix('z') {
            return idx(r).map(Self::z);
        }
        if let Some(r) = name.strip_prefix('C') {
            return idx(r).filter(|k| (1..10).contains(k)).map(Self::c_k);
        }
        if let Some(r) = name.strip_prefix('t') {
            return idx(r).map(|i| Self::invertible(VarKind::AuxT, i));
        }
        if let Some(r) = name.strip_prefix('p') {
            return idx(r).map(Self::param);
        }
        if let Some(r) = name.strip_prefix('l') {
            let (a, b) = r.split_once('_')?;
            let (m, n) = (idx(a)?, idx(b)?);
            if (0..1000).contains(&m) && (0..1000).contains(&n) {
                return Some(Self::table(m, n));
            }
        }
        None
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Product of variable powers, ordered by total degree then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: i32,
    factors: Vec<(Variable, i32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { deg: 0, factors: Vec::new() }
    }

    pub fn var(v: Variable, e: i32) -> Self {
        if e == 0 {
            return Self::one();
        }
        Monomial { deg: e, factors: vec![(v, e)] }
    }

    /// Builds a monomial from arbitrary factors, merging repeats.
    pub fn from_factors<I: IntoIterator<Item = (Variable, i32)>>(it: I) -> Self {
        let mut m: BTreeMap<Variable, i32> = BTreeMap::new();
        for (v, e) in it {
            *m.entry(v).or_insert(0) += e;
        }
        let factors: Vec<_> = m.into_iter().filter(|(_, e)| *e != 0).collect();
        let deg = factors.iter().map(|(_, e)| e).sum();
        Monomial { deg, factors }
    }

    pub fn factors(&self) -> &[(Variable, i32)] {
        &self.factors
    }

    pub fn total_degree(&self) -> i32 {
        self.deg
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree_in(&self, v: &Variable) -> i32 {
        self.factors
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|k| self.factors[k].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { deg: self.deg + other.deg, factors: out }
    }

    pub fn pow(&self, e: i32) -> Monomial {
        if e == 0 {
            return Self::one();
        }
        Monomial {
            deg: self.deg * e,
            factors: self.factors.iter().map(|(v, k)| (*v, k * e)).collect(),
        }
    }

    /// Drops the factor of `v`, returning its exponent and the remainder.
    pub fn split_off(&self, v: &Variable) -> (i32, Monomial) {
        let e = self.degree_in(v);
        if e == 0 {
            return (0, self.clone());
        }
        let factors: Vec<_> = self.factors.iter().filter(|(w, _)| w != v).copied().collect();
        (e, Monomial { deg: self.deg - e, factors })
    }

    /// Sum of exponents of the variables selected by `pred`.
    pub fn degree_where<F: Fn(&Variable) -> bool>(&self, pred: F) -> i32 {
        self.factors.iter().filter(|(v, _)| pred(v)).map(|(_, e)| e).sum()
    }

    fn render(&self) -> String {
        self.factors
            .iter()
            .map(|(v, e)| if *e == 1 { v.name() } else { format!("{}^{}", v.name(), e) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Variables that form the nilpotent ideal used for the group of jets fixing
/// a point: the index-0 group coordinates.
pub fn is_nilpotent_var(v: &Variable) -> bool {
    v.is_group() && v.index == 0
}

/// Sparse polynomial with rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(int(n))
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(v: Variable) -> Self {
        Self::term(Monomial::var(v, 1), Scalar::one())
    }

    /// `v^e`; negative `e` needs an invertible variable.
    pub fn var_pow(v: Variable, e: i32) -> Result<Self, PolyError> {
        if e < 0 && !v.invertible {
            return Err(PolyError::NotInvertible(v.name()));
        }
        Ok(Self::term(Monomial::var(v, e), Scalar::one()))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Scalar)>>(it: I) -> Self {
        let mut terms: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (m, c) in it {
            if c.is_zero() {
                continue;
            }
            match terms.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += c;
                    if e.get().is_zero() {
                        e.remove();
                    }
                }
            }
        }
        Poly { terms }
    }

    fn from_hash(acc: HashMap<Monomial, Scalar>) -> Self {
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().map(|(m, c)| m.is_one() && c.is_one()).unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Monomial::one())
    }

    /// The value if this is a constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in m.factors() {
                out.insert(*v);
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }

    pub fn add_ref(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_ref(other);
        out
    }

    pub fn add_assign_ref(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m, c);
        }
    }

    pub fn add_scaled(&mut self, other: &Poly, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m, &(c * s));
        }
    }

    pub fn add_term(&mut self, m: &Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        if let Some(v) = self.terms.get_mut(m) {
            *v += c;
            if v.is_zero() {
                self.terms.remove(m);
            }
        } else {
            self.terms.insert(m.clone(), c.clone());
        }
    }

    pub fn sub_ref(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m, &-c);
        }
        out
    }

    pub fn mul_ref(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut acc: HashMap<Monomial, Scalar> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                *acc.entry(ma.mul(mb)).or_insert_with(Scalar::zero) += c;
            }
        }
        Poly::from_hash(acc)
    }

    /// Product keeping only monomials accepted by `keep`.
    pub fn mul_filtered<F: Fn(&Monomial) -> bool>(&self, other: &Poly, keep: F) -> Poly {
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                if keep(&m) {
                    *acc.entry(m).or_insert_with(Scalar::zero) += ca * cb;
                }
            }
        }
        Poly::from_hash(acc)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        out
    }

    /// Inverse of a single term whose variables are all invertible.
    pub fn monomial_inverse(&self) -> Option<Poly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if m.factors().iter().any(|(v, _)| !v.invertible) {
            return None;
        }
        Some(Poly::term(m.pow(-1), c.recip()))
    }

    /// Partial derivative in `v`.
    pub fn derivative(&self, v: &Variable) -> Poly {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e == 0 {
                continue;
            }
            let nm = rest.mul(&Monomial::var(*v, e - 1));
            out.insert(nm, c * int(e as i64));
        }
        Poly { terms: out }
    }

    /// Partial derivative in `v` where some other variables depend on `v`:
    /// `rules` gives `d w / d v` for each such `w`.
    pub fn derivative_with(&self, v: &Variable, rules: &[(Variable, Poly)]) -> Poly {
        let mut out = self.derivative(v);
        for (w, dw) in rules {
            if w == v || dw.is_zero() {
                continue;
            }
            let dp = self.derivative(w);
            if !dp.is_zero() {
                out.add_assign_ref(&dp.mul_ref(dw));
            }
        }
        out
    }

    /// Simultaneous substitution. Negative powers of a substituted variable
    /// need the replacement to be an invertible single term.
    pub fn substitute(&self, map: &BTreeMap<Variable, Poly>) -> Result<Poly, PolyError> {
        let mut powers: HashMap<(Variable, i32), Poly> = HashMap::new();
        let mut acc = Poly::zero();
        for (m, c) in &self.terms {
            let mut keep = Vec::new();
            let mut value = Poly::constant(c.clone());
            for (v, e) in m.factors() {
                match map.get(v) {
                    None => keep.push((*v, *e)),
                    Some(rep) => {
                        let key = (*v, *e);
                        if let std::collections::hash_map::Entry::Vacant(slot) = powers.entry(key) {
                            let p = if *e >= 0 {
                                rep.pow(*e as u32)
                            } else {
                                rep.monomial_inverse()
                                    .ok_or_else(|| PolyError::SubstituteSingular(v.name()))?
                                    .pow((-e) as u32)
                            };
                            slot.insert(p);
                        }
                        value = value.mul_ref(&powers[&key]);
                        if value.is_zero() {
                            break;
                        }
                    }
                }
            }
            if value.is_zero() {
                continue;
            }
            if !keep.is_empty() {
                value = value.mul_monomial(&Monomial::from_factors(keep), &Scalar::one());
            }
            acc.add_assign_ref(&value);
        }
        Ok(acc)
    }

    /// Substitutes a single variable.
    pub fn substitute_one(&self, v: Variable, rep: &Poly) -> Result<Poly, PolyError> {
        let mut map = BTreeMap::new();
        map.insert(v, rep.clone());
        self.substitute(&map)
    }

    /// Renames variables; `f` must be injective on the variables present.
    pub fn map_vars<F: Fn(Variable) -> Variable>(&self, f: F) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            (Monomial::from_factors(m.factors().iter().map(|(v, e)| (f(*v), *e))), c.clone())
        }))
    }

    pub fn retain<F: Fn(&Monomial) -> bool>(&self, keep: F) -> Poly {
        Poly {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Drops monomials of degree above `m` in the nilpotent ideal.
    pub fn truncate_nilpotent(&self, m: u32) -> Poly {
        self.retain(|mono| mono.degree_where(is_nilpotent_var) <= m as i32)
    }

    /// Drops monomials whose degree in `v` exceeds `max`.
    pub fn truncate_in(&self, v: &Variable, max: i32) -> Poly {
        self.retain(|m| m.degree_in(v) <= max)
    }

    pub fn max_degree_in(&self, v: &Variable) -> Option<i32> {
        self.terms.keys().map(|m| m.degree_in(v)).max()
    }

    pub fn min_degree_in(&self, v: &Variable) -> Option<i32> {
        self.terms.keys().map(|m| m.degree_in(v)).min()
    }

    /// Coefficient of `v^e`, as a polynomial free of `v`.
    pub fn coefficient_in(&self, v: &Variable, e: i32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let (k, rest) = m.split_off(v);
                    (k == e).then(|| (rest, c.clone()))
                })
                .collect(),
        }
    }

    /// Sets every variable in `values` and returns the result.
    pub fn evaluate(&self, values: &BTreeMap<Variable, Scalar>) -> Result<Poly, PolyError> {
        let map = values.iter().map(|(v, c)| (*v, Poly::constant(c.clone()))).collect();
        self.substitute(&map)
    }

    /// Degree for the grading `|x_i| = i - 1`, `|h| = d`, everything else 0.
    /// Returns `None` when the terms disagree.
    pub fn graded_degree(&self, d: i32) -> Option<i32> {
        let mut out = None;
        for m in self.terms.keys() {
            let g = monomial_grade(m, d);
            match out {
                None => out = Some(g),
                Some(h) if h != g => return None,
                _ => {}
            }
        }
        out
    }

    pub fn parse(s: &str) -> Result<Poly, PolyError> {
        let terms = parse_terms(s)?;
        let mut out = Poly::zero();
        for t in terms {
            let mono = Monomial::from_factors(t.factors.iter().map(|(v, e)| (*v, *e)));
            for (v, e) in mono.factors() {
                if *e < 0 && !v.invertible {
                    return Err(PolyError::NotInvertible(v.name()));
                }
            }
            out.add_term(&mono, &t.coeff);
        }
        Ok(out)
    }
}

/// Grade of one monomial, see [`Poly::graded_degree`].
pub fn monomial_grade(m: &Monomial, d: i32) -> i32 {
    m.factors()
        .iter()
        .map(|(v, e)| match v.kind {
            VarKind::GroupX | VarKind::GroupY | VarKind::GroupZ | VarKind::DensityX => (v.index - 1) * e,
            VarKind::Param if v.index == params::H => d * e,
            _ => 0,
        })
        .sum()
}

fn render_scalar(c: &Scalar) -> String {
    c.to_string()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let body = if m.is_one() {
                render_scalar(&c.abs())
            } else {
                format!("{}*{}", render_scalar(&c.abs()), m.render())
            };
            if k == 0 {
                if neg {
                    write!(f, "-{}", body)?;
                } else {
                    f.write_str(&body)?;
                }
            } else {
                write!(f, " {} {}", if neg { "-" } else { "+" }, body)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Poly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Poly::parse(s)
    }
}

/// One parsed term: a coefficient and an ordered list of factors.
/// Factor order is kept so the noncommutative parser can reuse it.
#[derive(Debug, Clone)]
pub struct ParsedTerm {
    pub coeff: Scalar,
    pub factors: Vec<(Variable, i32)>,
}

/// Parses `c*v^e*w + ...` with signs and rational coefficients.
pub fn parse_terms(s: &str) -> Result<Vec<ParsedTerm>, PolyError> {
    let b = s.as_bytes();
    let mut pos = 0;
    let mut out = Vec::new();
    let err = |pos: usize, msg: &str| PolyError::Parse { pos, msg: msg.to_string() };
    let skip = |pos: &mut usize| {
        while *pos < b.len() && b[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip(&mut pos);
    if s.trim() == "0" {
        return Ok(out);
    }
    while pos < b.len() {
        let mut sign = 1i64;
        loop {
            skip(&mut pos);
            if pos < b.len() && (b[pos] == b'+' || b[pos] == b'-') {
                if b[pos] == b'-' {
                    sign = -sign;
                }
                pos += 1;
            } else {
                break;
            }
        }
        let mut coeff = int(sign);
        let mut factors = Vec::new();
        loop {
            skip(&mut pos);
            if pos >= b.len() {
                return Err(err(pos, "unexpected end of input"));
            }
            if b[pos].is_ascii_digit() {
                let start = pos;
                while pos < b.len() && b[pos].is_ascii_digit() {
                    pos += 1;
                }
                let num: BigInt = s[start..pos].parse().map_err(|_| err(start, "bad integer"))?;
                let mut val = BigRational::from_integer(num);
                if pos < b.len() && b[pos] == b'/' {
                    pos += 1;
                    let ds = pos;
                    while pos < b.len() && b[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let den: BigInt = s[ds..pos].parse().map_err(|_| err(ds, "bad denominator"))?;
                    if den.is_zero() {
                        return Err(err(ds, "zero denominator"));
                    }
                    val /= BigRational::from_integer(den);
                }
                coeff *= val;
            } else if b[pos].is_ascii_alphabetic() {
                let start = pos;
                while pos < b.len() && (b[pos].is_ascii_alphanumeric() || b[pos] == b'_') {
                    pos += 1;
                }
                let name = &s[start..pos];
                let v = Variable::from_name(name)
                    .ok_or_else(|| err(start, &format!("unknown variable '{}'", name)))?;
                let mut e = 1i32;
                skip(&mut pos);
                if pos < b.len() && b[pos] == b'^' {
                    pos += 1;
                    skip(&mut pos);
                    let es = pos;
                    if pos < b.len() && b[pos] == b'-' {
                        pos += 1;
                    }
                    while pos < b.len() && b[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    e = s[es..pos].parse().map_err(|_| err(es, "bad exponent"))?;
                }
                factors.push((v, e));
            } else {
                return Err(err(pos, "expected number or variable"));
            }
            skip(&mut pos);
            if pos < b.len() && b[pos] == b'*' {
                pos += 1;
                continue;
            }
            break;
        }
        out.push(ParsedTerm { coeff, factors });
        skip(&mut pos);
        if pos < b.len() && b[pos] != b'+' && b[pos] != b'-' {
            return Err(err(pos, "unexpected character"));
        }
    }
    Ok(out)
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self.add_assign_ref(&rhs);
        self
    }
}
impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.add_ref(rhs)
    }
}
impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self.sub_ref(&rhs)
    }
}
impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.sub_ref(rhs)
    }
}
impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        self.mul_ref(&rhs)
    }
}
impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_ref(rhs)
    }
}
impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&int(-1))
    }
}
impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&int(-1))
    }
}

/// Shorthand for parsing literals in code and tests. Panics on bad input.
pub fn p(s: &str) -> Poly {
    Poly::parse(s).unwrap_or_else(|e| panic!("bad polynomial literal {:?}: {}", s, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn render_grammar() {
        let f = p("x1^4 - x1^2");
        assert_eq!(f.to_string(), "-1*x1^2 + 1*x1^4");
        assert_eq!(p("3/2*h^2*x2 - 1/3").to_string(), "-1/3 + 3/2*x2*h^2");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn names_round_trip() {
        for v in [
            Variable::x(-1),
            Variable::x(0),
            Variable::y(7),
            Variable::z(3),
            Variable::density(0),
            Variable::h(),
            Variable::lambda(),
            Variable::c(),
            Variable::c_k(4),
            Variable::table(0, 12),
            Variable::table(3, 5),
            Variable::t(),
            Variable::param(5),
        ] {
            assert_eq!(Variable::from_name(&v.name()), Some(v), "{}", v);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(Poly::parse("x1 +").is_err());
        assert!(Poly::parse("q7").is_err());
        assert!(Poly::parse("x2^-1").is_err());
        assert!(Poly::parse("x1^-2").is_ok());
        assert!(Poly::parse("1/0").is_err());
    }

    #[test]
    fn laurent_in_x1() {
        let f = p("x1^-1 * x2");
        let g = p("x1^2");
        assert_eq!(f.mul_ref(&g), p("x1*x2"));
        assert_eq!(p("2*x1^3").monomial_inverse(), Some(p("1/2*x1^-3")));
        assert_eq!(p("x2").monomial_inverse(), None);
    }

    #[test]
    fn substitution_singular() {
        let f = p("x1^-1");
        let mut m = BTreeMap::new();
        m.insert(Variable::x(1), p("1 + x2"));
        assert!(matches!(f.substitute(&m), Err(PolyError::SubstituteSingular(_))));
        m.insert(Variable::x(1), p("2*y1"));
        assert_eq!(f.substitute(&m).unwrap(), p("1/2*y1^-1"));
    }

    #[test]
    fn derivative_with_dependency() {
        // d/dy1 of t*y1 with dt/dy1 = lam*t/y1
        let f = p("t*y1");
        let rule = (Variable::t(), p("lam*t*y1^-1"));
        assert_eq!(f.derivative_with(&Variable::y(1), &[rule]), p("t + lam*t"));
    }

    #[test]
    fn nilpotent_truncation() {
        let f = p("x0 + x0^2*y0 + x0*x1 + y0^3 + x1^5");
        assert_eq!(f.truncate_nilpotent(2), p("x0 + x0*x1 + x1^5"));
    }

    #[test]
    fn grading() {
        assert_eq!(p("x1^3*x3 + h*x2").graded_degree(1), Some(2));
        assert_eq!(p("x1^3*x3 + h*x2").graded_degree(2), None);
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        let term = (-3i64..4, 1i64..3, 0i32..3, 0i32..3, 0i32..2);
        prop::collection::vec(term, 0..5).prop_map(|ts| {
            Poly::from_terms(ts.into_iter().map(|(n, d, a, b, c)| {
                (
                    Monomial::from_factors([
                        (Variable::x(1), a - 1),
                        (Variable::x(2), b),
                        (Variable::h(), c),
                    ]),
                    rat(n, d),
                )
            }))
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn parse_render_round_trip(a in arb_poly()) {
            prop_assert_eq!(Poly::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn leibniz(a in arb_poly(), b in arb_poly()) {
            let v = Variable::x(1);
            let lhs = (&a * &b).derivative(&v);
            let rhs = &(&a.derivative(&v) * &b) + &(&a * &b.derivative(&v));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitution_is_ring_hom(a in arb_poly(), b in arb_poly(), r in arb_poly()) {
            let mut m = BTreeMap::new();
            m.insert(Variable::x(2), r);
            let s = |f: &Poly| f.substitute(&m).unwrap();
            prop_assert_eq!(s(&(&a * &b)), &s(&a) * &s(&b));
            prop_assert_eq!(s(&(&a + &b)), &s(&a) + &s(&b));
        }

        #[test]
        fn pow_matches_repeated_product(a in arb_poly(), e in 0u32..4) {
            let mut r = Poly::one();
            for _ in 0..e { r = &r * &a; }
            prop_assert_eq!(a.pow(e), r);
        }
    }
}
