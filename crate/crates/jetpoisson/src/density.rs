//! Densities `x(u) (du)^wt` with `x(u) = sum_{i>=0} x_i u^i`, the action
//! `x -> x(y(u)) y'(u)^wt` of `G_inf`, and the Poisson structures
//! `Omega = phi x'(u) x'(v) + wt phi_u x(u) x'(v) + wt phi_v x'(u) x(v) + wt^2 phi_uv x(u) x(v)`
//! that make the action Poisson.
//!
//! `y'(u)^wt` is written `t (1 + w)^wt` with `w = sum_{i>=2} i (y_i / y_1) u^{i-1}`
//! and `t` an opaque invertible unit standing for `y_1^wt`.

use crate::coeffpoly::{int, Poly, PolyError, VarKind, Variable};
use crate::jetgroup::JetElement;
use crate::poissonlie::{build_omega, verify_jacobi, PhiFunction, PoissonError, PoissonStructure};
use crate::report::{Record, Tally};
use crate::series::{SeriesError, TruncSeries};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("the leading group coordinate is not invertible")]
    NotInvertible,
    #[error("the group element must start at index 1")]
    WrongStart,
    #[error("phi must be divisible by uv")]
    NotDivisible,
    #[error("phi known through degree {have}, need {need}")]
    InsufficientDegree { have: u32, need: u32 },
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Truncated density: `coords[k]` is `x_k` for `k = 0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityElement {
    pub coords: Vec<Poly>,
    pub weight: Poly,
}

impl DensityElement {
    /// Generic density with coordinates `x_0..x_n`.
    pub fn symbolic(n: u32, weight: &Poly) -> Self {
        let coords = (0..=n).map(|k| Poly::var(Variable::x(k as i32))).collect();
        DensityElement { coords, weight: weight.clone() }
    }

    pub fn n(&self) -> u32 {
        self.coords.len() as u32 - 1
    }

    pub fn to_series(&self) -> TruncSeries {
        TruncSeries::univariate(&self.coords, self.n())
    }
}

/// The symbolic density weight `wt`.
pub fn weight() -> Poly {
    Poly::var(Variable::weight())
}

/// `y'(u)^e = unit * (1 + w)^(e - k)` with `unit` standing for `y_1^e`
/// and an extra `y_1^{-k}`: returns `unit y_1^{-k} (1 + w)^{e - k}`,
/// through `u^{y.n() - 1}`.
fn jacobian_power(y: &JetElement, e: &Poly, k: i32, unit: &Poly) -> Result<TruncSeries, DensityError> {
    if y.start != 1 {
        return Err(DensityError::WrongStart);
    }
    let y1 = y.coord(1);
    let y1_inv = match y1.as_constant() {
        Some(c) if c == int(1) => Poly::one(),
        _ => y1.monomial_inverse().ok_or(DensityError::NotInvertible)?,
    };
    let ratio = y.to_series().derivative(0)?.scale(&y1_inv);
    let exp = e - &Poly::int(k as i64);
    Ok(ratio.binomial_power(&exp)?.scale(&(unit * &y1_inv.pow(k as u32))))
}

/// `z(u) = x(y(u)) y'(u)^wt` with `unit` in place of `y_1^wt`. The result
/// is known through `min(x.n, y.n - 1)`.
pub fn density_act_with_unit(y: &JetElement, x: &DensityElement, unit: &Poly) -> Result<DensityElement, DensityError> {
    let n = x.n().min(y.n().saturating_sub(1));
    let comp = x.to_series().with_bounds(vec![n]).compose(&[y.to_series().with_bounds(vec![n])], None)?;
    let jac = jacobian_power(y, &x.weight, 0, unit)?;
    let z = comp.mul(&jac)?;
    Ok(DensityElement { coords: (0..=n).map(|k| z.coeff(&[k])).collect(), weight: x.weight.clone() })
}

/// [`density_act_with_unit`] with the unit `t`.
pub fn density_act(y: &JetElement, x: &DensityElement) -> Result<DensityElement, DensityError> {
    density_act_with_unit(y, x, &Poly::var(Variable::t()))
}

fn phi_series(phi: &PhiFunction, bound: u32) -> TruncSeries {
    let mut s = TruncSeries::zero(vec![bound, bound]);
    for ((m, n), c) in &phi.entries {
        if *m <= bound && *n <= bound {
            s.add_coeff(vec![*m, *n], c.clone());
            s.add_coeff(vec![*n, *m], -c);
        }
    }
    s
}

/// Series in `(u, v)` of a function of `u` alone (`slot` 0) or `v` alone.
fn in_slot(s: &TruncSeries, slot: usize, bound: u32) -> TruncSeries {
    s.embed(&[slot], vec![bound, bound])
}

/// `phi X'(u) X'(v) + e phi_u X(u) X'(v) + e phi_v X'(u) X(v) + e^2 phi_uv X(u) X(v)`
/// through `u^b v^b`, for `X` known through `u^{b+1}`.
fn weighted_series(phi: &TruncSeries, e: &Poly, x: &TruncSeries, b: u32) -> Result<TruncSeries, DensityError> {
    let xd = x.derivative(0)?;
    let (xu, xv) = (in_slot(x, 0, b + 1), in_slot(x, 1, b + 1));
    let (dxu, dxv) = (in_slot(&xd, 0, b + 1), in_slot(&xd, 1, b + 1));
    let pu = phi.derivative(0)?;
    let pv = phi.derivative(1)?;
    let puv = pu.derivative(1)?;
    let mut out = phi.mul(&dxu)?.mul(&dxv)?;
    out = out.add(&pu.mul(&xu)?.mul(&dxv)?.scale(e))?;
    out = out.add(&pv.mul(&dxu)?.mul(&xv)?.scale(e))?;
    out = out.add(&puv.mul(&xu)?.mul(&xv)?.scale(&(e * e)))?;
    Ok(out.with_bounds(vec![b, b]))
}

fn check_phi(phi: &PhiFunction, n: u32) -> Result<(), DensityError> {
    if phi.min_index != 1 {
        return Err(DensityError::NotDivisible);
    }
    let need = 2 * n + 2;
    if !phi.exact && phi.degree_bound < need {
        return Err(DensityError::InsufficientDegree { have: phi.degree_bound, need });
    }
    Ok(())
}

/// `omega_ij = [u^i v^j] Omega(u, v; x)` for `0 <= i < j <= n`.
pub fn build_omega_density(phi: &PhiFunction, weight: &Poly, n: u32) -> Result<PoissonStructure, DensityError> {
    check_phi(phi, n)?;
    let coords: Vec<Poly> = (0..=n + 1).map(|k| Poly::var(Variable::x(k as i32))).collect();
    let x = TruncSeries::univariate(&coords, n + 1);
    let big = weighted_series(&phi_series(phi, n + 1), weight, &x, n)?;
    let mut omega = BTreeMap::new();
    for i in 0..=n {
        for j in i + 1..=n {
            let c = big.coeff(&[i, j]);
            if !c.is_zero() {
                omega.insert((i, j), c);
            }
        }
    }
    Ok(PoissonStructure { start: 0, n, nilpotency: None, omega })
}

/// Checks the action of `G_inf` on densities is Poisson:
/// `Omega(u,v; z) = Omega(y(u), y(v); x) J^wt(u) J^wt(v) + Obar z'(u) z'(v) J^{wt-1}(u) J^{wt-1}(v)
/// + wt Obar_u z(u) z'(v) (..) + wt Obar_v z'(u) z(v) (..) + wt^2 Obar_uv z(u) z(v) (..)`
/// with `z(u) = x(y(u))`, `J = y'` and `Obar` the group structure of `phi`.
/// Records `density_action` (witness `[i, j]`) and `density_unit_balance`
/// (both sides homogeneous of degree 2 in `t`).
pub fn verify_density_action(phi: &PhiFunction, weight: &Poly, n: u32) -> Result<Vec<Record>, DensityError> {
    let omega = build_omega_density(phi, weight, n)?;
    verify_density_action_of(&omega, phi, weight)
}

/// [`verify_density_action`] for a given bracket table on `x_0..x_n`.
pub fn verify_density_action_of(omega: &PoissonStructure, phi: &PhiFunction, weight: &Poly) -> Result<Vec<Record>, DensityError> {
    let n = omega.n;
    check_phi(phi, n)?;
    let y = JetElement::symbolic(VarKind::GroupY, n + 1, 1, None);
    let x = DensityElement::symbolic(n, weight);
    let t = Poly::var(Variable::t());

    // left side: omega_ij evaluated at the transformed density
    let z = density_act(&y, &x)?;
    let subst: BTreeMap<Variable, Poly> =
        z.coords.iter().enumerate().map(|(k, c)| (Variable::x(k as i32), c.clone())).collect();
    let mut lhs = BTreeMap::new();
    for ((i, j), w) in &omega.omega {
        lhs.insert((*i, *j), w.substitute(&subst)?);
    }

    // right side
    let b = n + 1;
    let ys = y.to_series();
    let jw = jacobian_power(&y, weight, 0, &t)?;
    let jw1 = jacobian_power(&y, weight, 1, &t)?;
    let mut first = TruncSeries::zero(vec![b, b]);
    let mut ypow = vec![TruncSeries::one(vec![b])];
    for k in 1..=n as usize {
        let next = ypow[k - 1].mul(&ys)?;
        ypow.push(next);
    }
    for k in 0..=n {
        for l in 0..=n {
            let w = omega.bracket(k, l);
            if w.is_zero() {
                continue;
            }
            let term = in_slot(&ypow[k as usize], 0, b).mul(&in_slot(&ypow[l as usize], 1, b))?;
            first = first.add(&term.scale(&w))?;
        }
    }
    first = first.mul(&in_slot(&jw, 0, b))?.mul(&in_slot(&jw, 1, b))?;

    let group = build_omega(phi, n + 1, None)?;
    let mut obar = TruncSeries::zero(vec![b, b]);
    for ((k, l), w) in &group.omega {
        let w = w.map_vars(|v| if v.kind == VarKind::GroupX { v.with_kind(VarKind::GroupY) } else { v });
        obar.add_coeff(vec![*k, *l], w.clone());
        obar.add_coeff(vec![*l, *k], -&w);
    }
    let xs: Vec<Poly> = (0..=b).map(|k| Poly::var(Variable::x(k as i32))).collect();
    let comp = TruncSeries::univariate(&xs, b).compose(&[ys.with_bounds(vec![b])], None)?;
    let zj = comp.mul(&jw1)?;
    let dzj = comp.derivative(0)?.mul(&jw1)?;
    let pu = obar.derivative(0)?;
    let pv = obar.derivative(1)?;
    let puv = pu.derivative(1)?;
    let (zu, zv) = (in_slot(&zj, 0, b), in_slot(&zj, 1, b));
    let (dzu, dzv) = (in_slot(&dzj, 0, b), in_slot(&dzj, 1, b));
    let mut rhs = first;
    rhs = rhs.add(&obar.mul(&dzu)?.mul(&dzv)?)?;
    rhs = rhs.add(&pu.mul(&zu)?.mul(&dzv)?.scale(weight))?;
    rhs = rhs.add(&pv.mul(&dzu)?.mul(&zv)?.scale(weight))?;
    rhs = rhs.add(&puv.mul(&zu)?.mul(&zv)?.scale(&(weight * weight)))?;

    let mut action = Tally::new();
    let mut units = Tally::new();
    let tv = Variable::t();
    for i in 0..=n {
        for j in 0..=n {
            let l = if i < j {
                lhs.get(&(i, j)).cloned().unwrap_or_default()
            } else if i > j {
                lhs.get(&(j, i)).map(|c| -c).unwrap_or_default()
            } else {
                Poly::zero()
            };
            let r = rhs.coeff(&[i, j]);
            action.observe(&[i as i64, j as i64], &(&l - &r));
            for side in [&l, &r] {
                let off = side.retain(|m| m.degree_in(&tv) != 2);
                units.observe(&[i as i64, j as i64], &off);
            }
        }
    }
    let tag = |rec: Record| rec.param("phi", &phi.family).param("weight", weight).param("n", n);
    Ok(vec![tag(action.record("density_action")), tag(units.record("density_unit_balance"))])
}

/// Jacobi identity for the density structure, plus `density_invariants`:
/// every bracket vanishes at `x = 0` and has degree at most 2 in `wt`.
pub fn verify_density_jacobi(phi: &PhiFunction, weight: &Poly, n: u32) -> Result<Vec<Record>, DensityError> {
    let omega = build_omega_density(phi, weight, n)?;
    let tag = |rec: Record| rec.param("phi", &phi.family).param("weight", weight).param("n", n);
    let zero: BTreeMap<Variable, Poly> = (0..=n).map(|k| (Variable::x(k as i32), Poly::zero())).collect();
    let wt = Variable::weight();
    let mut inv = Tally::new();
    for ((i, j), w) in &omega.omega {
        inv.observe(&[*i as i64, *j as i64], &w.substitute(&zero)?);
        inv.observe(&[*i as i64, *j as i64], &w.retain(|m| m.degree_in(&wt) > 2));
    }
    Ok(vec![tag(verify_jacobi(&omega)), tag(inv.record("density_invariants"))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffpoly::{rat, Scalar};
    use crate::jetgroup::jet_compose;

    /// `omega_ij = sum lambda_pq (i-p+1 + wt p)(j-q+1 + wt q) x_{i-p+1} x_{j-q+1}`.
    fn direct(phi: &PhiFunction, e: &Poly, i: u32, j: u32) -> Poly {
        let mut acc = Poly::zero();
        for p in 1..=i + 1 {
            for q in 1..=j + 1 {
                let l = phi.lambda(p, q);
                if l.is_zero() {
                    continue;
                }
                let (a, b) = (i + 1 - p, j + 1 - q);
                let fa = &Poly::int(a as i64) + &e.scale(&int(p as i64));
                let fb = &Poly::int(b as i64) + &e.scale(&int(q as i64));
                let xx = &Poly::var(Variable::x(a as i32)) * &Poly::var(Variable::x(b as i32));
                acc.add_assign_ref(&(&(&l * &fa) * &(&fb * &xx)));
            }
        }
        acc
    }

    #[test]
    fn structure_matches_direct_expansion() {
        for (phi, e) in [(PhiFunction::power(1), weight()), (PhiFunction::power(2), Poly::constant(rat(1, 2)))] {
            let w = build_omega_density(&phi, &e, 4).unwrap();
            for i in 0..=4 {
                for j in i + 1..=4 {
                    assert_eq!(w.bracket(i, j), direct(&phi, &e, i, j), "({}, {})", i, j);
                }
            }
        }
    }

    #[test]
    fn weight_zero_has_no_inhomogeneous_term() {
        let w = build_omega_density(&PhiFunction::power(1), &Poly::zero(), 3).unwrap();
        // phi x'(u) x'(v) never involves x_0
        for c in w.omega.values() {
            assert!(c.variables().iter().all(|v| v.index != 0));
        }
        let x0_only: BTreeMap<Variable, Poly> =
            (1..=3).map(|k| (Variable::x(k), Poly::zero())).collect();
        for c in w.omega.values() {
            assert!(c.substitute(&x0_only).unwrap().is_zero());
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let x = DensityElement::symbolic(4, &weight());
        let e = JetElement::identity(5, 1, None);
        let z = density_act_with_unit(&e, &x, &Poly::one()).unwrap();
        assert_eq!(z, x);
    }

    #[test]
    fn weight_zero_is_composition() {
        let x = DensityElement::symbolic(3, &Poly::zero());
        let y = JetElement::symbolic(VarKind::GroupY, 4, 1, None);
        let z = density_act_with_unit(&y, &x, &Poly::one()).unwrap();
        let comp = x.to_series().compose(&[y.to_series().with_bounds(vec![3])], None).unwrap();
        for k in 0..=3 {
            assert_eq!(z.coords[k as usize], comp.coeff(&[k]));
        }
    }

    #[test]
    fn action_is_a_right_action() {
        // act(y2, act(y1, x)) = act(y1(y2), x) with units multiplying
        let x = DensityElement::symbolic(3, &weight());
        let y1 = JetElement::symbolic(VarKind::GroupY, 5, 1, None);
        let y2 = JetElement::symbolic(VarKind::GroupZ, 5, 1, None);
        let t1 = Poly::var(Variable::invertible(VarKind::AuxT, 1));
        let t2 = Poly::var(Variable::invertible(VarKind::AuxT, 2));
        let step = density_act_with_unit(&y1, &x, &t1).unwrap();
        let lhs = density_act_with_unit(&y2, &step, &t2).unwrap();
        let rhs = density_act_with_unit(&jet_compose(&y1, &y2).unwrap(), &x, &(&t1 * &t2)).unwrap();
        assert_eq!(lhs.coords, rhs.coords);
    }

    #[test]
    fn action_is_poisson() {
        for rec in verify_density_action(&PhiFunction::power(1), &weight(), 3).unwrap() {
            assert!(rec.passed(), "{}", rec);
        }
        for rec in verify_density_action(&PhiFunction::power(2), &Poly::constant(rat(1, 2)), 3).unwrap() {
            assert!(rec.passed(), "{}", rec);
        }
    }

    #[test]
    fn jacobi_holds() {
        for rec in verify_density_jacobi(&PhiFunction::power(1), &weight(), 3).unwrap() {
            assert!(rec.passed(), "{}", rec);
        }
        for d in 1..=3 {
            for rec in verify_density_jacobi(&PhiFunction::power(d), &Poly::zero(), 4).unwrap() {
                assert!(rec.passed(), "d={} {}", d, rec);
            }
        }
        let half = Poly::constant(Scalar::new(1.into(), 2.into()));
        for rec in verify_density_jacobi(&PhiFunction::power(2), &half, 4).unwrap() {
            assert!(rec.passed(), "{}", rec);
        }
    }

    #[test]
    fn perturbed_structure_fails_jacobi() {
        let w = build_omega_density(&PhiFunction::power(1), &weight(), 3).unwrap();
        let bad = w.clone().with_bracket(0, 1, &w.bracket(0, 1) + &Poly::var(Variable::x(2)));
        let rec = verify_jacobi(&bad);
        assert!(!rec.passed());
    }

    #[test]
    fn perturbed_structure_breaks_action() {
        let phi = PhiFunction::power(1);
        let w = build_omega_density(&phi, &weight(), 3).unwrap();
        let bad = w.clone().with_bracket(1, 2, &w.bracket(1, 2) + &Poly::var(Variable::x(0)));
        let recs = verify_density_action_of(&bad, &phi, &weight()).unwrap();
        assert!(!recs[0].passed());
        assert_eq!(recs[0].witness.indices, vec![1, 2]);
    }

    #[test]
    fn errors() {
        assert_eq!(build_omega_density(&PhiFunction::linear(), &weight(), 3), Err(DensityError::NotDivisible));
        let phi = PhiFunction::extended(2, &crate::poissonlie::lam(), 6);
        assert!(matches!(build_omega_density(&phi, &weight(), 3), Err(DensityError::InsufficientDegree { .. })));
        let mut y = JetElement::symbolic(VarKind::GroupY, 3, 1, None);
        y.coords[0] = &Poly::var(Variable::y(1)) + &Poly::one();
        let x = DensityElement::symbolic(2, &weight());
        assert_eq!(density_act(&y, &x), Err(DensityError::NotInvertible));
    }
}
