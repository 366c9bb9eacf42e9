//! Jet groups: `G_inf` (jets `x_1 u + x_2 u^2 + ...` of diffeomorphisms
//! fixing 0) and `G_0` (jets `x_0 + x_1 u + ...` under composition).
//!
//! `G_0` is not finite dimensional in a truncation-compatible way, so its
//! index-0 coordinates are treated as nilpotent of order `m`: composition
//! then only determines `min(n_x - m, n_y)` output coordinates.

use crate::coeffpoly::{Poly, PolyError, VarKind, Variable};
use crate::report::{Record, Tally};
use crate::series::{SeriesError, TruncSeries};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("start index mismatch: {0} vs {1}")]
    StartMismatch(u32, u32),
    #[error("nilpotency order mismatch")]
    NilpotencyMismatch,
    #[error("G_0 elements need a nilpotency order")]
    MissingNilpotency,
    #[error("truncation order too small: {0}")]
    TooShort(i32),
    #[error("inverse needs start index 1")]
    NoInverse,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A truncated jet. `coords[k]` is the coordinate of index `start + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetElement {
    pub start: u32,
    pub coords: Vec<Poly>,
    pub nilpotency: Option<u32>,
}

impl JetElement {
    /// Generic element with coordinates of the given kind up to `n`.
    pub fn symbolic(kind: VarKind, n: u32, start: u32, nilpotency: Option<u32>) -> Self {
        let coords = (start..=n).map(|i| Poly::var(Variable::coord(kind, i as i32))).collect();
        JetElement { start, coords, nilpotency }
    }

    pub fn identity(n: u32, start: u32, nilpotency: Option<u32>) -> Self {
        let coords = (start..=n).map(|i| if i == 1 { Poly::one() } else { Poly::zero() }).collect();
        JetElement { start, coords, nilpotency }
    }

    /// Highest coordinate index.
    pub fn n(&self) -> u32 {
        self.start + self.coords.len() as u32 - 1
    }

    pub fn coord(&self, i: u32) -> &Poly {
        &self.coords[(i - self.start) as usize]
    }

    pub fn to_series(&self) -> TruncSeries {
        let mut s = TruncSeries::zero(vec![self.n()]);
        for (k, c) in self.coords.iter().enumerate() {
            s.add_coeff(vec![self.start + k as u32], c.clone());
        }
        s
    }

    fn from_series(s: &TruncSeries, start: u32, n: u32, nilpotency: Option<u32>) -> Self {
        let coords = (start..=n)
            .map(|i| {
                let c = s.coeff(&[i]);
                match nilpotency {
                    Some(m) => c.truncate_nilpotent(m),
                    None => c,
                }
            })
            .collect();
        JetElement { start, coords, nilpotency }
    }

    /// Forgets coordinates above `m`.
    pub fn project(&self, m: u32) -> Self {
        let keep = (m + 1).saturating_sub(self.start) as usize;
        JetElement { start: self.start, coords: self.coords[..keep.min(self.coords.len())].to_vec(), nilpotency: self.nilpotency }
    }
}

/// Group law `z(u) = x(y(u))`.
pub fn jet_compose(x: &JetElement, y: &JetElement) -> Result<JetElement, JetError> {
    if x.start != y.start {
        return Err(JetError::StartMismatch(x.start, y.start));
    }
    if x.nilpotency != y.nilpotency {
        return Err(JetError::NilpotencyMismatch);
    }
    match x.start {
        1 => {
            let n = x.n().min(y.n());
            let z = x.to_series().compose(&[y.to_series().with_bounds(vec![n])], None)?;
            Ok(JetElement::from_series(&z, 1, n, None))
        }
        _ => {
            let m = x.nilpotency.ok_or(JetError::MissingNilpotency)?;
            let n = (x.n() as i32 - m as i32).min(y.n() as i32);
            if n < 0 {
                return Err(JetError::TooShort(n));
            }
            let n = n as u32;
            let z = x.to_series().compose(&[y.to_series().with_bounds(vec![n])], Some(m))?;
            Ok(JetElement::from_series(&z, 0, n, Some(m)))
        }
    }
}

/// Group inverse in `G_inf`; needs `x_1` invertible.
pub fn jet_inverse(x: &JetElement) -> Result<JetElement, JetError> {
    if x.start != 1 {
        return Err(JetError::NoInverse);
    }
    let inv = x.to_series().comp_inverse()?;
    Ok(JetElement::from_series(&inv, 1, x.n(), None))
}

/// Vector field `sum_i c_i d/dx_i` on the jet group.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VectorField {
    pub comps: BTreeMap<i32, Poly>,
}

impl VectorField {
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (i, c) in &self.comps {
            let d = f.derivative(&Variable::x(*i));
            if !d.is_zero() {
                out.add_assign_ref(&(c * &d));
            }
        }
        out
    }

    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let mut comps = BTreeMap::new();
        let keys: std::collections::BTreeSet<i32> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        for j in keys {
            let a = other.comps.get(&j).map(|c| self.apply(c)).unwrap_or_default();
            let b = self.comps.get(&j).map(|c| other.apply(c)).unwrap_or_default();
            let r = &a - &b;
            if !r.is_zero() {
                comps.insert(j, r);
            }
        }
        VectorField { comps }
    }

    pub fn scale(&self, k: i64) -> VectorField {
        let k = crate::coeffpoly::int(k);
        VectorField { comps: self.comps.iter().map(|(i, c)| (*i, c.scale(&k))).filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let mut comps = self.comps.clone();
        for (i, c) in &other.comps {
            let e = comps.entry(*i).or_default();
            *e = &*e - c;
        }
        comps.retain(|_, c| !c.is_zero());
        VectorField { comps }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(Poly::is_zero)
    }
}

/// `X_k = sum_{i=1}^{n-k+1} i x_i d/dx_{i+k-1}` for `k = 1..=n`;
/// index 0 of the result is unused.
pub fn left_invariant_fields(n: u32) -> Vec<VectorField> {
    let mut out = vec![VectorField::default()];
    for k in 1..=n as i32 {
        let mut comps = BTreeMap::new();
        for i in 1..=(n as i32 - k + 1) {
            comps.insert(i + k - 1, Poly::var(Variable::x(i)).scale(&crate::coeffpoly::int(i as i64)));
        }
        out.push(VectorField { comps });
    }
    out
}

/// The group law through `z_4` as printed.
pub const PRINTED_GROUP_LAW: [&str; 4] = [
    "x1*y1",
    "x1*y2 + x2*y1^2",
    "x1*y3 + 2*x2*y1*y2 + x3*y1^3",
    "x1*y4 + x2*y2^2 + 2*x2*y1*y3 + 3*x3*y1^2*y2 + x4*y1^4",
];

/// `z = x(y)` on generic elements against [`PRINTED_GROUP_LAW`]. Witness `[i]`.
pub fn verify_printed_group_law() -> Result<Record, JetError> {
    let x = JetElement::symbolic(VarKind::GroupX, 4, 1, None);
    let y = JetElement::symbolic(VarKind::GroupY, 4, 1, None);
    let z = jet_compose(&x, &y)?;
    let mut t = Tally::new();
    for (i, s) in PRINTED_GROUP_LAW.iter().enumerate() {
        let printed: Poly = s.parse().map_err(JetError::from)?;
        t.observe(&[i as i64 + 1], &(z.coord(i as u32 + 1) - &printed));
    }
    Ok(t.record("group_law_printed"))
}

/// Associativity of the group law on generic elements, compared through
/// coordinate `n`. For `G_0` the inputs carry `2m` extra orders.
pub fn verify_associativity(n: u32, start: u32, nilpotency: Option<u32>) -> Result<Record, JetError> {
    let len = n + 2 * nilpotency.unwrap_or(0);
    let a = JetElement::symbolic(VarKind::GroupX, len, start, nilpotency);
    let b = JetElement::symbolic(VarKind::GroupY, len, start, nilpotency);
    let c = JetElement::symbolic(VarKind::GroupZ, len, start, nilpotency);
    let lhs = jet_compose(&a, &jet_compose(&b, &c)?)?;
    let rhs = jet_compose(&jet_compose(&a, &b)?, &c)?;
    let top = lhs.n().min(rhs.n());
    let mut t = Tally::new();
    for i in start..=top {
        let r = lhs.coord(i) - rhs.coord(i);
        t.observe(&[i as i64], &r);
    }
    let mut rec = t.record("associativity").param("n", n).param("start", start);
    if let Some(m) = nilpotency {
        rec = rec.param("nilpotency", m);
    }
    Ok(rec)
}

/// Identity and inverse laws in `G_inf`.
pub fn verify_group_axioms(n: u32) -> Result<Record, JetError> {
    let x = JetElement::symbolic(VarKind::GroupX, n, 1, None);
    let e = JetElement::identity(n, 1, None);
    let inv = jet_inverse(&x)?;
    let mut t = Tally::new();
    for (tag, lhs, rhs) in [
        (0, jet_compose(&x, &e)?, x.clone()),
        (1, jet_compose(&e, &x)?, x.clone()),
        (2, jet_compose(&x, &inv)?, e.clone()),
        (3, jet_compose(&inv, &x)?, e.clone()),
    ] {
        for i in 1..=n {
            t.observe(&[tag, i as i64], &(lhs.coord(i) - rhs.coord(i)));
        }
    }
    Ok(t.record("group_axioms").param("n", n))
}

/// `[X_a, X_b] = (a - b) X_{a+b-1}` for `a, b <= kmax` on jets of order `n`.
pub fn verify_witt_brackets(kmax: u32, n: u32) -> Record {
    let x = left_invariant_fields(n);
    let field = |k: u32| x.get(k as usize).cloned().unwrap_or_default();
    let mut t = Tally::new();
    for a in 1..=kmax {
        for b in 1..=kmax {
            let lhs = field(a).bracket(&field(b));
            let rhs = field(a + b - 1).scale(a as i64 - b as i64);
            let diff = lhs.sub(&rhs);
            match diff.comps.iter().next() {
                None => t.observe(&[a as i64, b as i64], &Poly::zero()),
                Some((j, c)) => t.observe(&[a as i64, b as i64, *j as i64], c),
            }
        }
    }
    t.record("witt_brackets").param("kmax", kmax).param("n", n)
}

/// Differentiating the group law in the second argument at the identity
/// gives `dz_p/dy_q = (p - q + 1) x_{p-q+1}`, i.e. the fields `X_q`.
pub fn verify_left_invariance(n: u32) -> Result<Record, JetError> {
    let x = JetElement::symbolic(VarKind::GroupX, n, 1, None);
    let y = JetElement::symbolic(VarKind::GroupY, n, 1, None);
    let z = jet_compose(&x, &y)?;
    let at_e: BTreeMap<Variable, Poly> = (1..=n as i32)
        .map(|i| (Variable::y(i), if i == 1 { Poly::one() } else { Poly::zero() }))
        .collect();
    let fields = left_invariant_fields(n);
    let mut t = Tally::new();
    for p in 1..=n as i32 {
        for q in 1..=n as i32 {
            let d = z.coord(p as u32).derivative(&Variable::y(q)).substitute(&at_e)?;
            let expected = fields[q as usize].comps.get(&p).cloned().unwrap_or_default();
            t.observe(&[p as i64, q as i64], &(&d - &expected));
        }
    }
    Ok(t.record("left_invariance").param("n", n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffpoly::p;
    use proptest::prelude::*;

    #[test]
    fn low_order_group_law() {
        let x = JetElement::symbolic(VarKind::GroupX, 4, 1, None);
        let y = JetElement::symbolic(VarKind::GroupY, 4, 1, None);
        let z = jet_compose(&x, &y).unwrap();
        assert_eq!(z.coord(1), &p("x1*y1"));
        assert_eq!(z.coord(2), &p("x1*y2 + x2*y1^2"));
        assert_eq!(z.coord(3), &p("x1*y3 + 2*x2*y1*y2 + x3*y1^3"));
        assert_eq!(z.coord(4), &p("x1*y4 + x2*y2^2 + 2*x2*y1*y3 + 3*x3*y1^2*y2 + x4*y1^4"));
        assert!(verify_printed_group_law().unwrap().passed());
    }

    #[test]
    fn g0_law_low_order() {
        // x(y(u)) with x0, y0 nilpotent of order 1
        let x = JetElement::symbolic(VarKind::GroupX, 3, 0, Some(1));
        let y = JetElement::symbolic(VarKind::GroupY, 3, 0, Some(1));
        let z = jet_compose(&x, &y).unwrap();
        assert_eq!(z.n(), 2);
        assert_eq!(z.coord(0), &p("x0 + x1*y0"));
        assert_eq!(z.coord(1), &p("x1*y1 + 2*x2*y0*y1"));
    }

    #[test]
    fn associativity_and_axioms() {
        assert!(verify_associativity(6, 1, None).unwrap().passed());
        assert!(verify_associativity(4, 0, Some(2)).unwrap().passed());
        assert!(verify_group_axioms(5).unwrap().passed());
    }

    #[test]
    fn witt_and_left_invariance() {
        assert!(verify_witt_brackets(6, 8).passed());
        assert!(verify_left_invariance(5).unwrap().passed());
    }

    #[test]
    fn mismatched_start_is_rejected() {
        let a = JetElement::identity(3, 1, None);
        let b = JetElement::identity(3, 0, Some(1));
        assert_eq!(jet_compose(&a, &b), Err(JetError::StartMismatch(1, 0)));
    }

    fn arb_jet() -> impl Strategy<Value = JetElement> {
        (1i64..4, prop::collection::vec(-3i64..4, 3)).prop_map(|(a, rest)| {
            let mut coords = vec![Poly::int(a)];
            coords.extend(rest.into_iter().map(Poly::int));
            JetElement { start: 1, coords, nilpotency: None }
        })
    }

    proptest! {
        #[test]
        fn numeric_associativity_and_inverse(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            let l = jet_compose(&a, &jet_compose(&b, &c).unwrap()).unwrap();
            let r = jet_compose(&jet_compose(&a, &b).unwrap(), &c).unwrap();
            prop_assert_eq!(l, r);
            let inv = jet_inverse(&a).unwrap();
            prop_assert_eq!(jet_compose(&a, &inv).unwrap(), JetElement::identity(4, 1, None));
        }

        #[test]
        fn projection_is_homomorphism(a in arb_jet(), b in arb_jet(), m in 1u32..4) {
            let lhs = jet_compose(&a, &b).unwrap().project(m);
            let rhs = jet_compose(&a.project(m), &b.project(m)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
