//! Constructive side of the classification: every solution of the
//! phi-equation is fixed by a few free coefficients through explicit
//! recursions. Branch `d` on `G_inf` is normalized by `lambda_{1,d+1} = 1`,
//! the `G_0` branch by `lambda_01 = 1`.

use crate::coeffpoly::{int, Poly, Scalar, Variable};
use crate::expr::poly;
use crate::poissonlie::{lam, verify_phi_equation, PhiFunction, PoissonError};
use crate::report::{Record, Tally};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("no value given for free coefficient with index {0}")]
    MissingFree(u32),
    #[error("branch needs d >= 1")]
    BadBranch,
    #[error(transparent)]
    Poisson(#[from] PoissonError),
}

/// Indices `n` of the free coefficients `lambda_1n` on branch `d` when the
/// table is wanted through total degree `nmax + 1`.
pub fn branch_d_free_indices(d: u32, nmax: u32) -> Vec<u32> {
    (d + 2..=nmax + d).filter(|&n| n != 2 * d + 1).collect()
}

/// Free coefficients as symbols `l1_{n}`.
pub fn symbolic_free_branch_d(d: u32, nmax: u32) -> BTreeMap<u32, Poly> {
    branch_d_free_indices(d, nmax)
        .into_iter()
        .map(|n| (n, Poly::var(Variable::table(1, n as i32))))
        .collect()
}

/// `lambda_1n = lam^{n-d-1}`, the specialization behind the extended family.
pub fn geometric_free_branch_d(d: u32, lam: &Poly, nmax: u32) -> BTreeMap<u32, Poly> {
    branch_d_free_indices(d, nmax).into_iter().map(|n| (n, lam.pow(n - d - 1))).collect()
}

fn fetch(free: &BTreeMap<u32, Poly>, n: u32) -> Result<Poly, ClassifyError> {
    free.get(&n).cloned().ok_or(ClassifyError::MissingFree(n))
}

/// Solution on branch `d` through total degree `nmax + 1`.
///
/// `lambda_{d+1,n}` follows from the recursion
/// `(d-n+1) lambda_{d+1,n} = sum_{s<n} (n+d-2s+1) lambda_{1,n+d-s+1} lambda_{s,d+1} - d lambda_{1,n+d}`,
/// the coefficient `lambda_{1,2d+1}` is forced by the previous ones, and
/// `lambda_mn = lambda_1m lambda_{d+1,n} - lambda_1n lambda_{d+1,m}`.
pub fn classify_branch_d(d: u32, free: &BTreeMap<u32, Poly>, nmax: u32) -> Result<PhiFunction, ClassifyError> {
    if d == 0 {
        return Err(ClassifyError::BadBranch);
    }
    let top = (nmax + d) as usize;
    // l1[n] = lambda_1n, ld[n] = lambda_{d+1,n}
    let mut l1 = vec![Poly::zero(); top + 1];
    l1[d as usize + 1] = Poly::one();
    for n in d + 2..=nmax + d {
        if n != 2 * d + 1 {
            l1[n as usize] = fetch(free, n)?;
        }
    }
    let mut ld = vec![Poly::zero(); nmax.max(d + 1) as usize + 1];
    let step = |n: u32, l1: &[Poly], ld: &[Poly]| -> Poly {
        let mut acc = l1[(n + d) as usize].scale(&int(d as i64));
        for s in 1..n {
            let c = int((n + d + 1) as i64 - 2 * s as i64);
            // lambda_{s,d+1} = -lambda_{d+1,s}
            acc.add_assign_ref(&(&l1[(n + d - s + 1) as usize] * &ld[s as usize]).scale(&c));
        }
        acc.scale(&Scalar::new((-1).into(), (d as i64 - n as i64 + 1).into()))
    };
    for n in 1..=d.min(nmax) {
        ld[n as usize] = step(n, &l1, &ld);
    }
    if 2 * d < nmax + d {
        let mut acc = Poly::zero();
        for s in 2..=d {
            let c = int(2 * (d + 1 - s) as i64);
            acc.add_assign_ref(&(&l1[(2 * d + 2 - s) as usize] * &ld[s as usize]).scale(&c));
        }
        // lambda_{s,d+1} = -lambda_{d+1,s} flips the sign of the printed relation
        l1[2 * d as usize + 1] = acc.scale(&Scalar::new(1.into(), (d as i64).into()));
    }
    for n in d + 2..=nmax {
        ld[n as usize] = step(n, &l1, &ld);
    }
    let bound = nmax + 1;
    let mut it = Vec::new();
    for m in 1..=bound {
        for n in m + 1..=bound - m {
            let e = &(&l1[m as usize] * &ld[n as usize]) - &(&l1[n as usize] * &ld[m as usize]);
            it.push(((m, n), e));
        }
    }
    Ok(PhiFunction::from_entries(&format!("branch(d={})", d), 1, it, bound, false))
}

/// Free coefficients `lambda_0n`, `2 <= n <= nmax + 1`, as symbols `l0_{n}`.
pub fn symbolic_free_g0(nmax: u32) -> BTreeMap<u32, Poly> {
    (2..=nmax + 1).map(|n| (n, Poly::var(Variable::table(0, n as i32)))).collect()
}

/// Solution on `G_0` through total degree `nmax + 1`, with `lambda_01 = 1`:
/// `r lambda_1r = sum_{s<r} (r-2s+1) lambda_{0,r-s+1} lambda_1s + 2 lambda_02 lambda_0r`
/// and `lambda_nr = lambda_0n lambda_1r - lambda_1n lambda_0r`.
pub fn classify_g0_branch(free: &BTreeMap<u32, Poly>, nmax: u32) -> Result<PhiFunction, ClassifyError> {
    let bound = nmax + 1;
    let mut l0 = vec![Poly::zero(); bound as usize + 1];
    l0[1] = Poly::one();
    for n in 2..=bound {
        l0[n as usize] = fetch(free, n)?;
    }
    let mut l1 = vec![Poly::zero(); bound as usize + 1];
    l1[0] = Poly::int(-1);
    for r in 2..=nmax {
        let mut acc = (&l0[2] * &l0[r as usize]).scale(&int(2));
        for s in 0..r {
            let c = int((r + 1) as i64 - 2 * s as i64);
            acc.add_assign_ref(&(&l0[(r - s + 1) as usize] * &l1[s as usize]).scale(&c));
        }
        l1[r as usize] = acc.scale(&Scalar::new(1.into(), (r as i64).into()));
    }
    let mut it = Vec::new();
    for m in 0..=bound {
        for n in m + 1..=bound - m {
            let e = &(&l0[m as usize] * &l1[n as usize]) - &(&l1[m as usize] * &l0[n as usize]);
            it.push(((m, n), e));
        }
    }
    Ok(PhiFunction::from_entries("g0_branch", 0, it, bound, false))
}

/// Branch `d` with symbolic free coefficients through total degree
/// `nmax + 1`: the phi-equation holds, `lambda_{2,d+1} = -lambda_{1,d+2}/(d-1)`,
/// for `d = 2` also `lambda_15 = lambda_14^2`, and the specialization
/// `lambda_1n = lam^{n-d-1}` is the extended family.
pub fn verify_branch_d(d: u32, nmax: u32) -> Result<Vec<Record>, ClassifyError> {
    let t = classify_branch_d(d, &symbolic_free_branch_d(d, nmax), nmax)?;
    let mut out = vec![verify_phi_equation(&t, nmax + 1)?.param("branch", d)];
    if d >= 2 && nmax > d {
        let l = |m: u32, n: u32| Poly::var(Variable::table(m as i32, n as i32));
        let mut rel = Tally::new();
        let want = l(1, d + 2).scale(&Scalar::new((-1).into(), (d as i64 - 1).into()));
        rel.observe(&[2, d as i64 + 1], &(&t.lambda(2, d + 1) - &want));
        if d == 2 && nmax >= 4 {
            rel.observe(&[1, 5], &(&t.lambda(1, 5) - &l(1, 4).pow(2)));
        }
        out.push(rel.record("branch_relations").param("d", d));
        let g = classify_branch_d(d, &geometric_free_branch_d(d, &lam(), nmax), nmax)?;
        let e = PhiFunction::extended(d, &lam(), nmax + 1);
        let mut geo = Tally::new();
        for m in 1..=nmax + 1 {
            for n in m + 1..=nmax + 1 - m {
                geo.observe(&[m as i64, n as i64], &(&g.lambda(m, n) - &e.lambda(m, n)));
            }
        }
        out.push(geo.record("branch_geometric").param("d", d).param("degree", nmax + 1));
    }
    Ok(out)
}

/// Low coefficients of the `G_0` solution with symbolic `lambda_0n`, and
/// the phi-equation through total degree `nmax + 1`.
pub fn verify_g0_branch(nmax: u32) -> Result<Vec<Record>, ClassifyError> {
    let t = classify_g0_branch(&symbolic_free_g0(nmax), nmax)?;
    let mut low = Tally::new();
    let printed = [
        (2, "l0_2^2 - 3/2 l0_3"),
        (3, "1/3(2l0_2 l0_3 - 4l0_4)"),
        (4, "1/24(2l0_2^2 l0_3 - 9l0_3^2 + 20l0_2 l0_4 - 30l0_5)"),
    ];
    for (n, s) in printed.into_iter().filter(|(n, _)| *n <= nmax) {
        let want = poly(s).map_err(PoissonError::from)?;
        low.observe(&[1, n as i64], &(&t.lambda(1, n) - &want));
    }
    Ok(vec![low.record("g0_coefficients"), verify_phi_equation(&t, nmax + 1)?.param("branch", 0)])
}
