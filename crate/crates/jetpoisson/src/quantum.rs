//! Quantum semigroups: the free algebra `k[[h]]<x_1..x_n>` modulo
//! relations `x_i x_j = x_j x_i + f_ij` (`i < j`), truncated at `h^K`.
//!
//! A word is canonical when its indices never increase left to right.
//! Reduction rewrites the leftmost ascending adjacent pair. Every term of
//! `f_ij` carries at least one power of `h`, so the `h`-budget bounds the
//! recursion and the swapped word has fewer inversions.

use crate::coeffpoly::{monomial_grade, Poly, PolyError, Scalar, VarKind, Variable};
use crate::expr::{parse_expr, ExprRing};
use crate::poissonlie::PoissonStructure;
use crate::report::{Record, Tally};
use num_traits::One;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

/// Generator indices, left to right.
pub type Word = Vec<u8>;

/// No truncation.
pub const UNTRUNCATED: u32 = u32::MAX / 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error("unknown parameters: {0:?}")]
    UnknownParameters(Vec<String>),
    #[error("elements have different generator counts or h-orders")]
    ShapeMismatch,
    #[error("rule ({0},{1}) has a term without h")]
    NotDeformation(u8, u8),
    #[error("bad rule line '{0}'")]
    BadRule(String),
    #[error("generator x{0} out of range")]
    BadGenerator(i32),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn h() -> Variable {
    Variable::h()
}

fn h_degree(c: &Poly) -> i32 {
    c.terms().map(|(m, _)| m.degree_in(&h())).min().unwrap_or(0)
}

pub fn is_canonical(w: &[u8]) -> bool {
    w.windows(2).all(|p| p[0] >= p[1])
}

/// Sum of `(i_s - 1)` over the letters.
pub fn word_grade(w: &[u8]) -> i32 {
    w.iter().map(|&i| i as i32 - 1).sum()
}

fn word_name(w: &[u8]) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.iter().map(|i| format!("x{}", i)).collect::<Vec<_>>().join("*")
    }
}

/// Commutative image `x_{i_1} ... x_{i_k}`.
pub fn word_to_poly(w: &[u8]) -> Poly {
    let mut p = Poly::one();
    for &i in w {
        p = &p * &Poly::var(Variable::x(i as i32));
    }
    p
}

/// Element of the truncated free algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCElement {
    pub terms: BTreeMap<Word, Poly>,
    pub h_order: u32,
}

impl NCElement {
    pub fn zero(h_order: u32) -> Self {
        NCElement { terms: BTreeMap::new(), h_order }
    }

    pub fn word(w: &[u8], h_order: u32) -> Self {
        Self::zero(h_order).plus_term(w.to_vec(), Poly::one())
    }

    pub fn scalar(c: Poly, h_order: u32) -> Self {
        Self::zero(h_order).plus_term(Vec::new(), c)
    }

    fn plus_term(mut self, w: Word, c: Poly) -> Self {
        self.add_term(w, &c);
        self
    }

    pub fn add_term(&mut self, w: Word, c: &Poly) {
        let c = c.truncate_in(&h(), self.h_order as i32);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w.clone()).or_default();
        e.add_assign_ref(&c);
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.h_order = self.h_order.min(other.h_order);
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out.retruncate()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NCElement { terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(), h_order: self.h_order }
    }

    pub fn scale(&self, k: &Poly) -> Self {
        let mut out = Self::zero(self.h_order);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), &(c * k));
        }
        out
    }

    /// Concatenation product, not reduced.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.h_order.min(other.h_order));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.add_term(w, &(ca * cb));
            }
        }
        out
    }

    pub fn with_h_order(&self, k: u32) -> Self {
        NCElement { terms: self.terms.clone(), h_order: k }.retruncate()
    }

    fn retruncate(mut self) -> Self {
        let k = self.h_order as i32;
        for c in self.terms.values_mut() {
            *c = c.truncate_in(&h(), k);
        }
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    /// Coefficient of `h^e`, as an element with no `h`.
    pub fn h_coefficient(&self, e: i32) -> NCElement {
        let mut out = Self::zero(UNTRUNCATED);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), &c.coefficient_in(&h(), e));
        }
        out
    }

    /// Image in the commutative polynomial ring.
    pub fn commutative(&self) -> Poly {
        let mut acc = Poly::zero();
        for (w, c) in &self.terms {
            acc.add_assign_ref(&(c * &word_to_poly(w)));
        }
        acc
    }

    pub fn max_generator(&self) -> u8 {
        self.terms.keys().flat_map(|w| w.iter().copied()).max().unwrap_or(0)
    }

    /// Parses the typeset form, e.g. `h x2(3x1^3 - 2x1) + 2h^2 x2 x1`.
    pub fn parse(s: &str) -> Result<Self, QuantumError> {
        let e = parse_expr(s)?;
        let out: NCElement = e.eval();
        if let Some((w, _)) = out.terms.iter().find(|(w, _)| w.contains(&0)) {
            return Err(QuantumError::BadGenerator(w.iter().map(|&i| i as i32).min().unwrap_or(0)));
        }
        Ok(out)
    }
}

impl ExprRing for NCElement {
    fn from_scalar(c: &Scalar) -> Self {
        Self::scalar(Poly::constant(c.clone()), UNTRUNCATED)
    }
    fn from_var(v: Variable) -> Self {
        if v.kind == VarKind::GroupX && (1..=255).contains(&v.index) {
            Self::word(&[v.index as u8], UNTRUNCATED)
        } else if v.kind == VarKind::GroupX {
            // rejected by `parse`
            Self::word(&[0], UNTRUNCATED)
        } else {
            Self::scalar(Poly::var(v), UNTRUNCATED)
        }
    }
    fn add(&self, other: &Self) -> Self {
        NCElement::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        NCElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        NCElement::neg(self)
    }
}

impl fmt::Display for NCElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("({})*{}", c, word_name(w))).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One rewrite term: `coeff * word`, `coeff` homogeneous of degree `h_exp` in `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RuleTerm {
    h_exp: u32,
    word: Word,
    coeff: Poly,
}

/// `x_i x_j -> x_j x_i + f_ij` for every `i < j <= n`; missing rules mean
/// the generators commute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationSet {
    pub name: String,
    /// Degree of `h`.
    pub d: u32,
    pub n: u8,
    pub rules: BTreeMap<(u8, u8), NCElement>,
    pub params: Vec<Variable>,
    pub h_order: u32,
}

impl RelationSet {
    pub fn new(name: &str, d: u32, n: u8, params: Vec<Variable>, h_order: u32) -> Self {
        RelationSet { name: name.into(), d, n, rules: BTreeMap::new(), params, h_order }
    }

    /// Adds the rule for `x_i x_j`; `f` must vanish at `h = 0`.
    pub fn set_rule(&mut self, i: u8, j: u8, f: NCElement) -> Result<(), QuantumError> {
        if i >= j || i == 0 || j > self.n {
            return Err(QuantumError::BadRule(format!("x{} x{}", i, j)));
        }
        if f.max_generator() > self.n {
            return Err(QuantumError::BadGenerator(f.max_generator() as i32));
        }
        if f.terms.values().any(|c| c.terms().any(|(m, _)| m.degree_in(&h()) == 0)) {
            return Err(QuantumError::NotDeformation(i, j));
        }
        self.rules.insert((i, j), f.with_h_order(UNTRUNCATED));
        Ok(())
    }

    pub fn rule(&self, i: u8, j: u8) -> NCElement {
        self.rules.get(&(i, j)).cloned().unwrap_or_else(|| NCElement::zero(UNTRUNCATED))
    }

    pub fn with_h_order(&self, k: u32) -> Self {
        RelationSet { h_order: k, ..self.clone() }
    }

    /// Specializes parameters; every key must be one of `params`.
    pub fn substitute(&self, values: &BTreeMap<Variable, Poly>) -> Result<Self, QuantumError> {
        let unknown: Vec<String> =
            values.keys().filter(|v| !self.params.contains(v)).map(|v| v.name()).collect();
        if !unknown.is_empty() {
            return Err(QuantumError::UnknownParameters(unknown));
        }
        let mut out = self.clone();
        out.params.retain(|v| !values.contains_key(v));
        for f in out.rules.values_mut() {
            let mut g = NCElement::zero(UNTRUNCATED);
            for (w, c) in &f.terms {
                g.add_term(w.clone(), &c.substitute(values)?);
            }
            *f = g;
        }
        Ok(out)
    }

    /// One rule per line: `x_i x_j -> x_j x_i + <polynomial>`.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                let f = self.rule(i, j);
                out.push_str(&format!("x{} x{} -> x{} x{}", i, j, j, i));
                for (w, c) in &f.terms {
                    out.push_str(&format!(" + ({})*{}", c, word_name(w)));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Reads rules in the form written by [`RelationSet::to_dsl`] or typeset
    /// forms such as `x2 x3 -> x3 x2 + h x2(x1^3 - 2x1)`. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_dsl(name: &str, d: u32, n: u8, params: Vec<Variable>, h_order: u32, text: &str) -> Result<Self, QuantumError> {
        let mut set = Self::new(name, d, n, params, h_order);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let bad = || QuantumError::BadRule(line.to_string());
            let (lhs, rhs) = line.split_once("->").ok_or_else(bad)?;
            let lw = NCElement::parse(lhs)?;
            let (word, c) = lw.terms.iter().next().ok_or_else(bad)?;
            if lw.terms.len() != 1 || !c.is_one() || word.len() != 2 || word[0] >= word[1] {
                return Err(bad());
            }
            let (i, j) = (word[0], word[1]);
            let f = NCElement::parse(rhs)?.sub(&NCElement::word(&[j, i], UNTRUNCATED));
            set.set_rule(i, j, f)?;
        }
        Ok(set)
    }

    fn split_rules(&self) -> BTreeMap<(u8, u8), Vec<RuleTerm>> {
        let mut out = BTreeMap::new();
        for (k, f) in &self.rules {
            let mut terms = Vec::new();
            for (w, c) in &f.terms {
                let mut by_h: BTreeMap<i32, Poly> = BTreeMap::new();
                for (m, s) in c.terms() {
                    by_h.entry(m.degree_in(&h())).or_default().add_term(m, s);
                }
                for (e, coeff) in by_h {
                    terms.push(RuleTerm { h_exp: e as u32, word: w.clone(), coeff });
                }
            }
            out.insert(*k, terms);
        }
        out
    }
}

/// Rewriting engine with a cache of normal forms keyed by word and
/// remaining `h` budget.
pub struct Reducer {
    rules: BTreeMap<(u8, u8), Vec<RuleTerm>>,
    h_order: u32,
    cache: HashMap<(Word, u32), BTreeMap<Word, Poly>>,
}

impl Reducer {
    pub fn new(set: &RelationSet) -> Self {
        Reducer { rules: set.split_rules(), h_order: set.h_order, cache: HashMap::new() }
    }

    fn nf_word(&mut self, w: &[u8], budget: u32) -> BTreeMap<Word, Poly> {
        let Some(p) = (0..w.len().saturating_sub(1)).find(|&p| w[p] < w[p + 1]) else {
            return BTreeMap::from([(w.to_vec(), Poly::one())]);
        };
        let key = (w.to_vec(), budget);
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let out = self.rewrite_at(w, p, budget, &mut |r, w, b| r.nf_word(w, b));
        self.cache.insert(key, out.clone());
        out
    }

    fn rewrite_at<F>(&mut self, w: &[u8], p: usize, budget: u32, next: &mut F) -> BTreeMap<Word, Poly>
    where
        F: FnMut(&mut Self, &[u8], u32) -> BTreeMap<Word, Poly>,
    {
        let (i, j) = (w[p], w[p + 1]);
        let mut swapped = w.to_vec();
        swapped.swap(p, p + 1);
        let mut out = next(self, &swapped, budget);
        let terms = self.rules.get(&(i, j)).cloned().unwrap_or_default();
        for t in terms.iter().filter(|t| t.h_exp <= budget) {
            let mut v = w[..p].to_vec();
            v.extend_from_slice(&t.word);
            v.extend_from_slice(&w[p + 2..]);
            for (u, c) in next(self, &v, budget - t.h_exp) {
                let c = (&c * &t.coeff).truncate_in(&h(), budget as i32);
                accumulate(&mut out, u, &c);
            }
        }
        out
    }

    /// Normal form of `a`.
    pub fn reduce(&mut self, a: &NCElement) -> NCElement {
        let k = a.h_order.min(self.h_order);
        let mut out = NCElement::zero(k);
        for (w, c) in &a.terms {
            let budget = (k as i32 - h_degree(c)).max(0) as u32;
            for (u, d) in self.nf_word(w, budget) {
                out.add_term(u, &(c * &d));
            }
        }
        out
    }

    /// Normal form choosing the rewrite site with `choose` among the
    /// ascending pairs of each word; no caching.
    pub fn reduce_with<F: FnMut(usize) -> usize>(&mut self, a: &NCElement, choose: &mut F) -> NCElement {
        let k = a.h_order.min(self.h_order);
        let mut out = NCElement::zero(k);
        for (w, c) in &a.terms {
            let budget = (k as i32 - h_degree(c)).max(0) as u32;
            for (u, d) in self.nf_choosing(w, budget, choose) {
                out.add_term(u, &(c * &d));
            }
        }
        out
    }

    fn nf_choosing<F: FnMut(usize) -> usize>(&mut self, w: &[u8], budget: u32, choose: &mut F) -> BTreeMap<Word, Poly> {
        let sites: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&p| w[p] < w[p + 1]).collect();
        if sites.is_empty() {
            return BTreeMap::from([(w.to_vec(), Poly::one())]);
        }
        let p = sites[choose(sites.len()) % sites.len()];
        self.rewrite_at(w, p, budget, &mut |r, w, b| r.nf_choosing(w, b, choose))
    }

    /// Normal form of `x_i x_j x_k` after first rewriting the pair at `site`.
    fn overlap_branch(&mut self, w: &[u8; 3], site: usize) -> NCElement {
        let budget = self.h_order;
        let mut out = NCElement::zero(budget);
        for (u, c) in self.rewrite_at(w, site, budget, &mut |r, w, b| r.nf_word(w, b)) {
            out.add_term(u, &c);
        }
        out
    }
}

fn accumulate(map: &mut BTreeMap<Word, Poly>, w: Word, c: &Poly) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(w.clone()).or_default();
    e.add_assign_ref(c);
    if e.is_zero() {
        map.remove(&w);
    }
}

/// Normal form of `a` under `set`.
pub fn nc_reduce(a: &NCElement, set: &RelationSet) -> NCElement {
    Reducer::new(set).reduce(a)
}

/// Difference of the two resolutions of `x_i x_j x_k`, `i < j < k`.
pub fn overlap_residual(set: &RelationSet, i: u8, j: u8, k: u8) -> NCElement {
    let mut r = Reducer::new(set);
    overlap_with(&mut r, i, j, k)
}

fn overlap_with(r: &mut Reducer, i: u8, j: u8, k: u8) -> NCElement {
    let w = [i, j, k];
    r.overlap_branch(&w, 0).sub(&r.overlap_branch(&w, 1))
}

/// Diamond-lemma overlap check over all `i < j < k`, repeated at `h`-order
/// `K + 2` to confirm no truncated term mattered. Witness `[i, j, k]`.
pub fn pbw_overlap_check(set: &RelationSet) -> Record {
    let run = |s: &RelationSet| {
        let mut r = Reducer::new(s);
        let mut t = Tally::new();
        for i in 1..=s.n {
            for j in i + 1..=s.n {
                for k in j + 1..=s.n {
                    let res = overlap_with(&mut r, i, j, k);
                    t.observe_text(&[i as i64, j as i64, k as i64], (!res.is_zero()).then(|| res.to_string()));
                }
            }
        }
        t
    };
    let first = run(set);
    let clean = first.is_clean();
    let mut rec = first.record("pbw_overlap").param("set", &set.name).param("h_order", set.h_order);
    if clean {
        let again = run(&set.with_h_order(set.h_order + 2));
        if !again.is_clean() {
            rec = again.record("pbw_overlap").param("set", &set.name).param("h_order", set.h_order + 2);
        }
        rec = rec.param("recheck", set.h_order + 2);
    }
    rec
}

/// `[x_i, x_j]` reduces to `h omega_ij + O(h^2)`. Witness `[i, j]`.
pub fn verify_quasiclassical(set: &RelationSet, omega: &PoissonStructure) -> Record {
    let mut r = Reducer::new(set);
    let mut t = Tally::new();
    for i in 1..=set.n {
        for j in i + 1..=set.n {
            let a = NCElement::word(&[i, j], set.h_order).sub(&NCElement::word(&[j, i], set.h_order));
            let red = r.reduce(&a);
            let mut res = red.h_coefficient(0).commutative();
            res.add_assign_ref(&(&red.h_coefficient(1).commutative() - &omega.bracket(i as u32, j as u32)));
            t.observe(&[i as i64, j as i64], &res);
        }
    }
    t.record("quasiclassical").param("set", &set.name)
}

/// Every term of every `f_ij` has graded degree `i + j - 2` with `|x_k| = k - 1`
/// and `|h| = d`. Witness `[i, j]`.
pub fn verify_grading(set: &RelationSet) -> Record {
    let mut t = Tally::new();
    for ((i, j), f) in &set.rules {
        let want = *i as i32 + *j as i32 - 2;
        let mut bad = Vec::new();
        for (w, c) in &f.terms {
            for (m, _) in c.terms() {
                let g = word_grade(w) + monomial_grade(m, set.d as i32);
                if g != want {
                    bad.push(format!("{}*{} has degree {}", Poly::term(m.clone(), Scalar::one()), word_name(w), g));
                }
            }
        }
        t.observe_text(&[*i as i64, *j as i64], (!bad.is_empty()).then(|| bad.join("; ")));
    }
    t.record("grading").param("set", &set.name)
}

/// Compositions of `n` into `k` positive parts, lexicographic.
fn compositions(n: u8, k: u8) -> Vec<Word> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Element of `A (x) A` as pairs of words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorElement {
    pub terms: BTreeMap<(Word, Word), Poly>,
    pub h_order: u32,
}

impl TensorElement {
    pub fn zero(h_order: u32) -> Self {
        TensorElement { terms: BTreeMap::new(), h_order }
    }

    pub fn add_term(&mut self, a: Word, b: Word, c: &Poly) {
        let c = c.truncate_in(&h(), self.h_order as i32);
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        let e = self.terms.entry(key.clone()).or_default();
        e.add_assign_ref(&c);
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, other: &Self, k: &Poly) {
        for ((a, b), c) in &other.terms {
            self.add_term(a.clone(), b.clone(), &(c * k));
        }
    }

    /// Componentwise concatenation.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.h_order.min(other.h_order));
        for ((a, b), c) in &self.terms {
            for ((p, q), d) in &other.terms {
                let mut l = a.clone();
                l.extend_from_slice(p);
                let mut r = b.clone();
                r.extend_from_slice(q);
                out.add_term(l, r, &(c * d));
            }
        }
        out
    }

    /// Reduces both tensor factors.
    pub fn reduce(&self, r: &mut Reducer) -> Self {
        let mut out = Self::zero(self.h_order);
        for ((a, b), c) in &self.terms {
            let ra = r.reduce(&NCElement::word(a, self.h_order));
            let rb = r.reduce(&NCElement::word(b, self.h_order));
            for (u, cu) in &ra.terms {
                for (v, cv) in &rb.terms {
                    out.add_term(u.clone(), v.clone(), &(&(c * cu) * cv));
                }
            }
        }
        out
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|((a, b), c)| format!("({})*{} (x) {}", c, word_name(a), word_name(b))).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `Delta x_i = sum_k x_k (x) sum_{j_1+..+j_k = i} x_{j_1} ... x_{j_k}`, in
/// the order `k` ascending, right words lexicographic.
pub fn delta_generator(i: u8) -> Vec<(Word, Word)> {
    let mut out = Vec::new();
    for k in 1..=i {
        for c in compositions(i, k) {
            out.push((vec![k], c));
        }
    }
    out
}

fn delta_word(w: &[u8], h_order: u32) -> TensorElement {
    let mut acc = TensorElement::zero(h_order);
    acc.add_term(Vec::new(), Vec::new(), &Poly::one());
    for &i in w {
        let mut g = TensorElement::zero(h_order);
        for (a, b) in delta_generator(i) {
            g.add_term(a, b, &Poly::one());
        }
        acc = acc.mul(&g);
    }
    acc
}

/// `Delta` extended multiplicatively to the free algebra.
pub fn delta(a: &NCElement) -> TensorElement {
    let mut out = TensorElement::zero(a.h_order);
    for (w, c) in &a.terms {
        out.add_scaled(&delta_word(w, a.h_order), c);
    }
    out
}

/// `Delta(x_i) Delta(x_j) - Delta(x_j) Delta(x_i) - f_ij(Delta x)` reduces
/// to zero in each tensor factor. Witness `[i, j]`.
pub fn verify_delta_homomorphism(set: &RelationSet) -> Record {
    let k = set.h_order;
    let mut r = Reducer::new(set);
    let mut t = Tally::new();
    for i in 1..=set.n {
        for j in i + 1..=set.n {
            let (di, dj) = (delta_word(&[i], k), delta_word(&[j], k));
            let mut lhs = di.mul(&dj);
            lhs.add_scaled(&dj.mul(&di), &Poly::int(-1));
            lhs.add_scaled(&delta(&set.rule(i, j).with_h_order(k)), &Poly::int(-1));
            let res = lhs.reduce(&mut r);
            t.observe_text(&[i as i64, j as i64], (!res.is_zero()).then(|| res.to_string()));
        }
    }
    t.record("delta_homomorphism").param("set", &set.name)
}

/// `c(x_1) = 1`, `c(x_k) = 0` otherwise.
pub fn counit(a: &NCElement) -> Poly {
    let mut acc = Poly::zero();
    for (w, c) in &a.terms {
        if w.iter().all(|&i| i == 1) {
            acc.add_assign_ref(c);
        }
    }
    acc
}

/// The counit kills every relation; `(c (x) id) Delta = id = (id (x) c) Delta`
/// and `Delta` is coassociative on generators. Witness `[kind, i, j]` with
/// kind 1 relation, 2 left counit, 3 right counit, 4 coassociativity.
pub fn verify_counit_coassoc(set: &RelationSet) -> Record {
    let mut t = Tally::new();
    for i in 1..=set.n {
        for j in i + 1..=set.n {
            t.observe(&[1, i as i64, j as i64], &counit(&set.rule(i, j)));
        }
    }
    for i in 1..=set.n {
        let gen = NCElement::word(&[i], UNTRUNCATED);
        let d = delta(&gen);
        let (mut left, mut right) = (NCElement::zero(UNTRUNCATED), NCElement::zero(UNTRUNCATED));
        for ((a, b), c) in &d.terms {
            let ca = counit(&NCElement::word(a, UNTRUNCATED));
            let cb = counit(&NCElement::word(b, UNTRUNCATED));
            left.add_term(b.clone(), &(c * &ca));
            right.add_term(a.clone(), &(c * &cb));
        }
        let show = |e: NCElement| (!e.is_zero()).then(|| e.to_string());
        t.observe_text(&[2, i as i64, 0], show(left.sub(&gen)));
        t.observe_text(&[3, i as i64, 0], show(right.sub(&gen)));
        let mut l3: BTreeMap<(Word, Word, Word), Poly> = BTreeMap::new();
        let mut r3: BTreeMap<(Word, Word, Word), Poly> = BTreeMap::new();
        for ((a, b), c) in &d.terms {
            for ((p, q), e) in &delta_word(a, UNTRUNCATED).terms {
                l3.entry((p.clone(), q.clone(), b.clone())).or_default().add_assign_ref(&(c * e));
            }
            for ((p, q), e) in &delta_word(b, UNTRUNCATED).terms {
                r3.entry((a.clone(), p.clone(), q.clone())).or_default().add_assign_ref(&(c * e));
            }
        }
        l3.retain(|_, c| !c.is_zero());
        r3.retain(|_, c| !c.is_zero());
        t.observe_text(&[4, i as i64, 0], (l3 != r3).then(|| "coassociativity fails".to_string()));
    }
    t.record("counit_coassoc").param("set", &set.name)
}

/// The shipped relation sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    R1,
    R2,
    R3,
    R2Ansatz,
}

impl SetKind {
    pub fn name(&self) -> &'static str {
        match self {
            SetKind::R1 => "R1",
            SetKind::R2 => "R2",
            SetKind::R3 => "R3",
            SetKind::R2Ansatz => "R2-ansatz",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "R1" => Some(SetKind::R1),
            "R2" => Some(SetKind::R2),
            "R3" => Some(SetKind::R3),
            "R2-ansatz" | "R2_ansatz" => Some(SetKind::R2Ansatz),
            _ => None,
        }
    }

    /// `(d, n, default h-order, parameters)`.
    pub fn shape(&self) -> (u32, u8, u32, Vec<Variable>) {
        match self {
            SetKind::R1 => (1, 4, 10, (3..=5).map(Variable::c_k).collect()),
            SetKind::R2 => (2, 5, 8, vec![Variable::c()]),
            SetKind::R3 => (3, 5, 4, Vec::new()),
            SetKind::R2Ansatz => (2, 5, 8, (1..=3).map(Variable::c_k).collect()),
        }
    }
}

/// Relations for `d = 1`, `n = 4` with parameters `C3, C4, C5`.
pub const R1_RULES: &str = "
x1 x2 -> x2 x1 + h(x1^3-x1^2)
x1 x3 -> x3 x1 + h(2x2x1^2-2x2x1) + h^2(2x1^4-3x1^3+x1^2)
x2 x3 -> x3 x2 + h(3x3x1-x3x1^2+2x2^2x1-4x2^2) + h^2(3x2x1^2-3x2x1) + h^3(2-2C3)(x1^5-x1^2)
x1 x4 -> x4 x1 + h(-3x3x1+2x3x1^2+x2^2x1) + h^2x2(3x1-8x1^2+5x1^3) + h^3[(5x1^5-12x1^4+7x1^3)+C3(x1^5-x1^2)]
x2 x4 -> x4 x2 + h(4x4x1-x4x1^2+2x3x2x1-6x3x2+x2^3) + h^2(3x2^2x1^2-10x2^2x1+12x2^2+12x3x1^2-2x3x1^3-15x3x1) + h^3x2[(9+2C3)x1-17x1^2+6x1^3+(5-5C3)x1^4] + h^4[(22-22C3)x1^2+(-4+4C3)x1^3+(-18+18C3)x1^5+C4(x1^6-x1^2)]
x3 x4 -> x4 x3 + h(8x4x2-2x4x2x1+x3x2^2-9x3^2+2x3^2x1) + h^2[x3x2(-x1^2+16x1-24)+x4(-7x1^2+16x1)] + h^3[(10-10C3)x2^2x1^3+(-9+8C3)x2^2] + h^3[(-5+5C3)x3x1^4+16x3x1^2-(6+9C3)x3x1] + h^4[(8-9C3-2C4)x2x1+(-8C3+9)x2x1^2+(10-10C3)x2x1^4] + h^4(2C4-18+18C3)x2x1^5 + h^5[(C4+2C3-2)x1^2+(4-4C3-C4)x1^6] + h^5[(2C3-2)x1^5+C5(x1^7-x1^2)]
";

/// Relations for `d = 2`, `n = 5` with parameter `C`.
pub const R2_RULES: &str = "
x1 x2 -> x2 x1
x1 x3 -> x3 x1 + h(-x1^2+x1^4)
x2 x3 -> x3 x2 + h x2(x1^3-2x1)
x1 x4 -> x4 x1 + h x2(3x1^3-2x1)
x2 x4 -> x4 x2 + h x2^2(3x1^2-4)
x3 x4 -> x4 x3 + h[x4(4x1-x1^3)+x3x2(3x1^2-6)] + 2h^2x2x1
x1 x5 -> x5 x1 + h[x3(3x1^3-3x1)+3x2^2x1^2] + h^2(-6x1^4+9/2 x1^6+3/2 x1^2)
x2 x5 -> x5 x2 + h[3x2^3x1+x3x2(3x1^2-6)] + h^2x2(6x1-9x1^3+9/2 x1^5)
x3 x5 -> x5 x3 + h[x5(5x1-x1^3)+x3^2(3x1^2-9)+3x3x2^2x1] + h^2x3(-15/2 x1+6x1^3+3/2 x1^5) + h^3C(x1^8-x1^2)
x4 x5 -> x5 x4 + h[x5x2(10-3x1^2)+x4x3(3x1^2-12)+3x4x2^2x1] + h^2[x4(-24x1+9x1^3+3/2 x1^5)+6x3x2] + h^3x2[-(6+2C)x1+3C x1^7]
";

/// Relations for `d = 3`, `n = 5`.
pub const R3_RULES: &str = "
x1 x2 -> x2 x1
x1 x3 -> x3 x1
x2 x3 -> x3 x2
x1 x4 -> x4 x1 + h(x1^5-x1^2)
x2 x4 -> x4 x2 + h x2(x1^4-2x1)
x3 x4 -> x4 x3 + h x3(x1^4-3x1)
x1 x5 -> x5 x1 + h x2(4x1^4-2x1)
x2 x5 -> x5 x2 + h x2^2(4x1^3-4)
x3 x5 -> x5 x3 + h x3x2(4x1^3-6)
x4 x5 -> x5 x4 + h[x4x2(4x1^3-8)+x5(5x1-x1^4)] + 3h^2x2x1
";

/// The general `d = 2` ansatz with the solved `f_k`, leaving `C1, C2, C3`.
pub const R2_ANSATZ_RULES: &str = "
x1 x2 -> x2 x1
x1 x3 -> x3 x1 + h(-x1^2+x1^4)
x2 x3 -> x3 x2 + h x2(x1^3-2x1)
x1 x4 -> x4 x1 + h x2(3x1^3-2x1)
x2 x4 -> x4 x2 + h x2^2(3x1^2-4) + h^2 C1(x1^6-x1^2)
x3 x4 -> x4 x3 + h[x4(4x1-x1^3)+x3x2(3x1^2-6)] + h^2x2((2-2C1)x1+2C1x1^5)
x1 x5 -> x5 x1 + h[x3(3x1^3-3x1)+3x2^2x1^2] + h^2(6x1^2-6x1^4+C2(x1^6-x1^2))
x2 x5 -> x5 x2 + h[x3x2(3x1^2-6)+3x2^3x1] + h^2x2((15-2C2)x1-9x1^3+C2x1^5)
x3 x5 -> x5 x3 + h[x5(5x1-x1^3)+x3^2(3x1^2-9)+3x3x2^2x1] + h^2x3((6-3C2)x1+6x1^3+(-3+C2)x1^5) + h^3C3(x1^8-x1^2)
x4 x5 -> x5 x4 + h[x5x2(10-3x1^2)+x4x3(3x1^2-12)+3x4x2^2x1] + h^2[x4((-6-4C2)x1+9x1^3+(-3+C2)x1^5)+6x3x2] + h^3x2((3-2C2-2C3)x1+3C3x1^7)
";

/// Printed coefficients that differ from the shipped ones:
/// `(set, i, j, printed h-term, shipped h-term)`.
pub const RELATION_ERRATA: &[(&str, u8, u8, &str, &str)] = &[
    ("R2", 2, 4, "h x2^2(3x1^3-4)", "h x2^2(3x1^2-4)"),
    ("R3", 2, 5, "h x2^2(4x1^4-4)", "h x2^2(4x1^3-4)"),
];

/// A shipped relation set with some parameters fixed. `h_order` defaults
/// per set.
pub fn relation_set_catalog(kind: SetKind, params: &BTreeMap<Variable, Poly>, h_order: Option<u32>) -> Result<RelationSet, QuantumError> {
    let (d, n, k, names) = kind.shape();
    let text = match kind {
        SetKind::R1 => R1_RULES,
        SetKind::R2 => R2_RULES,
        SetKind::R3 => R3_RULES,
        SetKind::R2Ansatz => R2_ANSATZ_RULES,
    };
    let set = RelationSet::from_dsl(kind.name(), d, n, names, h_order.unwrap_or(k), text)?;
    set.substitute(params)
}

/// The set with one rule's `h`-linear part replaced by its printed form.
pub fn with_printed_erratum(set: &RelationSet, i: u8, j: u8) -> Result<RelationSet, QuantumError> {
    let (_, _, _, printed, shipped) = RELATION_ERRATA
        .iter()
        .find(|(s, a, b, _, _)| *s == set.name && *a == i && *b == j)
        .ok_or_else(|| QuantumError::BadRule(format!("no erratum for ({}, {})", i, j)))?;
    let delta = NCElement::parse(printed)?.sub(&NCElement::parse(shipped)?);
    let mut out = set.clone();
    let f = out.rule(i, j).add(&delta);
    out.set_rule(i, j, f)?;
    Ok(out)
}
