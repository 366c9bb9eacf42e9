//! One line per acceptance criterion. Two criteria compare against printed
//! values that the computation cannot reproduce (a printed arithmetic slip
//! and a relation set that only resolves modulo h^6); a third compares
//! against tables with three printed typos. Those lines print FAIL, and the
//! test asserts that the failure is exactly the known one, so any other
//! regression still breaks the build.

mod common;

use jetpoisson::bialgebra::{
    beta_correspondence, coboundary, compare_cochains, explicit_family, verify_cocycle, verify_cojacobi, verify_cybe,
    verify_sl2_pair, verify_witt_a_sequence, Family, RMatrix,
};
use jetpoisson::classify::{verify_branch_d, verify_g0_branch};
use jetpoisson::coeffpoly::{rat, Poly, Variable};
use jetpoisson::density::{verify_density_action, verify_density_jacobi, weight};
use jetpoisson::expr::poly;
use jetpoisson::jetgroup::{verify_associativity, verify_printed_group_law, verify_witt_brackets};
use jetpoisson::poissonlie::{
    build_omega, lam, printed_table, table_mismatches, verify_inversion_antipoisson, verify_jacobi,
    verify_multiplicativity, verify_phi_equation, verify_quadric_list, verify_table_errata, PhiFunction, TABLE_ERRATA,
};
use jetpoisson::quantum::{
    overlap_residual, pbw_overlap_check, relation_set_catalog, verify_counit_coassoc, verify_delta_homomorphism,
    verify_grading, verify_quasiclassical, NCElement, SetKind,
};
use jetpoisson::report::Record;
use std::collections::BTreeMap;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
    /// For a criterion that cannot pass: whether the failure is exactly the
    /// documented one.
    known_deviation: Option<bool>,
}

fn all(records: &[Record]) -> (bool, String) {
    match records.iter().find(|r| !r.passed()) {
        None => (true, format!("{} records pass", records.len())),
        Some(r) => (false, r.to_string()),
    }
}

fn ok(records: Vec<Record>) -> Outcome {
    let (pass, detail) = all(&records);
    Outcome { pass, detail, known_deviation: None }
}

fn criterion_1() -> Outcome {
    ok(vec![verify_associativity(6, 1, None).unwrap(), verify_printed_group_law().unwrap()])
}

fn criterion_2() -> Outcome {
    ok(vec![verify_witt_brackets(6, 8)])
}

fn criterion_3() -> Outcome {
    let mut verbatim = 0;
    let mut total = 0;
    let mut mismatched = Vec::new();
    let mut records = Vec::new();
    for (d, n) in [(2, 5), (1, 4), (3, 5)] {
        let omega = build_omega(&PhiFunction::power(d), n, None).unwrap();
        let table = printed_table(d).unwrap();
        total += table.len();
        let bad = table_mismatches(&omega, &table).unwrap();
        verbatim += table.len() - bad.len();
        mismatched.extend(bad.into_iter().map(|p| (d, p)));
        records.push(verify_table_errata(d, n).unwrap());
    }
    let listed: Vec<_> = TABLE_ERRATA.iter().map(|(d, p, _)| (*d, *p)).collect();
    let mut found = mismatched.clone();
    found.sort();
    let mut want = listed.clone();
    want.sort();
    let (errata_ok, errata) = all(&records);
    Outcome {
        pass: mismatched.is_empty(),
        detail: format!(
            "{}/{} printed brackets match verbatim; differing entries {:?} are printed typos (errata check: {})",
            verbatim, total, mismatched, errata
        ),
        known_deviation: Some(found == want && errata_ok),
    }
}

fn criterion_4() -> Outcome {
    let mut records = Vec::new();
    for d in 1..=5 {
        records.push(verify_phi_equation(&PhiFunction::power(d), 12).unwrap());
    }
    for d in 2..=3 {
        records.push(verify_phi_equation(&PhiFunction::extended(d, &lam(), 12), 12).unwrap());
    }
    records.push(verify_quadric_list(12).unwrap());
    let invalid = PhiFunction::from_entries("invalid", 1, [((1, 2), Poly::one()), ((1, 3), Poly::one())], 4, true);
    let rejected = verify_phi_equation(&invalid, 6).unwrap();
    let mut out = ok(records);
    if rejected.passed() {
        out.pass = false;
        out.detail = "a table with lambda_12 lambda_13 != 0 passed".into();
    }
    out
}

fn criterion_5() -> Outcome {
    let mut records = Vec::new();
    for (d, n) in [(2, 5), (1, 4), (3, 5)] {
        let omega = build_omega(&PhiFunction::power(d), n, None).unwrap();
        records.push(verify_jacobi(&omega));
        records.push(verify_multiplicativity(&omega).unwrap());
    }
    let linear = build_omega(&PhiFunction::linear(), 6, Some(2)).unwrap();
    records.push(verify_jacobi(&linear));
    records.push(verify_multiplicativity(&linear).unwrap());
    for d in 1..=2 {
        for n in 2..=4 {
            let omega = build_omega(&PhiFunction::power(d), n, None).unwrap();
            records.push(verify_inversion_antipoisson(&omega).unwrap());
        }
    }
    ok(records)
}

fn criterion_6() -> Outcome {
    let rec = verify_witt_a_sequence();
    let only_a7 = rec.witness.indices == vec![7] && rec.witness.residual == "49/30";
    Outcome {
        pass: rec.passed(),
        detail: format!("{}; a_2..a_6 agree, the recursion gives a_7 = 1049/90 against the printed 451/45", rec),
        known_deviation: Some(only_a7),
    }
}

fn criterion_7() -> Outcome {
    let mut records = verify_branch_d(2, 11).unwrap();
    records.extend(verify_branch_d(3, 11).unwrap());
    records.extend(verify_g0_branch(7).unwrap());
    ok(records)
}

fn criterion_8() -> Outcome {
    let mut records = Vec::new();
    for d in 1..=5 {
        let r = RMatrix::from_phi(&PhiFunction::power(d), 8).unwrap();
        let a = coboundary(&r);
        records.push(verify_cocycle(&a));
        records.push(verify_cojacobi(&a));
        records.push(verify_cybe(&r));
        let flipped = coboundary(&RMatrix::from_phi(&PhiFunction::power(d).neg(), 8).unwrap());
        let fam = explicit_family(&Family::Power { d: d as i32 }, 8);
        records.push(compare_cochains("power_family", &flipped, &fam, true));
    }
    for d in 1..=3 {
        for n in 2..=6 {
            let phi = PhiFunction::power(d);
            records.extend(beta_correspondence(&build_omega(&phi, n, None).unwrap(), &phi).unwrap());
        }
    }
    for d in 2..=3 {
        let r = RMatrix::from_phi(&PhiFunction::extended(d, &lam(), 20), 8).unwrap();
        let fam = explicit_family(&Family::Extended { d: d as i32, lam: lam() }, 8);
        records.push(compare_cochains("extended_family", &coboundary(&r), &fam, false));
    }
    let witt = coboundary(&RMatrix::from_phi(&PhiFunction::linear(), 9).unwrap());
    records.push(compare_cochains("witt_family", &witt, &explicit_family(&Family::Witt, 8), false));
    records.extend(verify_sl2_pair(6));
    ok(records)
}

fn criterion_9() -> Outcome {
    let mut records = verify_density_action(&PhiFunction::power(1), &weight(), 3).unwrap();
    records.extend(verify_density_jacobi(&PhiFunction::power(1), &weight(), 3).unwrap());
    let half = Poly::constant(rat(1, 2));
    records.extend(verify_density_action(&PhiFunction::power(2), &half, 3).unwrap());
    records.extend(verify_density_jacobi(&PhiFunction::power(2), &half, 3).unwrap());
    ok(records)
}

fn criterion_10() -> Outcome {
    let none = BTreeMap::new();
    let mut records = Vec::new();
    let mut r1_pbw = None;
    for (kind, d, n) in [(SetKind::R2, 2, 5), (SetKind::R1, 1, 4), (SetKind::R3, 3, 5)] {
        let set = relation_set_catalog(kind, &none, None).unwrap();
        let pbw = pbw_overlap_check(&set);
        if kind == SetKind::R1 {
            r1_pbw = Some(pbw.clone());
        }
        records.push(pbw);
        records.push(verify_delta_homomorphism(&set));
        records.push(verify_counit_coassoc(&set));
        records.push(verify_grading(&set));
        let omega = build_omega(&PhiFunction::power(d), n, None).unwrap();
        records.push(verify_quasiclassical(&set, &omega));
    }
    let ansatz = |c1: i64| {
        let p = BTreeMap::from([(Variable::c_k(1), Poly::int(c1))]);
        overlap_residual(&relation_set_catalog(SetKind::R2Ansatz, &p, None).unwrap(), 2, 3, 4)
    };
    let ansatz_ok = !ansatz(1).is_zero() && ansatz(0).is_zero();
    let (pass, mut detail) = all(&records);
    if !ansatz_ok {
        detail = format!("ansatz at (2,3,4) does not single out C1 = 0; {}", detail);
    }
    // the only failure allowed is R1's overlap, with exactly this residual
    let r1 = relation_set_catalog(SetKind::R1, &none, None).unwrap();
    let q = poly("5h^6(2C3^2 + 36C3 + 4C4 - C5 - 38)").unwrap();
    let want = NCElement::word(&[1; 3], 10).scale(&q).sub(&NCElement::word(&[1; 9], 10).scale(&q));
    let others_pass = records.iter().filter(|r| !r.passed()).count() == 1;
    let known = r1_pbw.is_some_and(|r| !r.passed() && r.witness.indices == vec![2, 3, 4])
        && overlap_residual(&r1, 2, 3, 4) == want
        && others_pass
        && ansatz_ok;
    Outcome {
        pass: pass && ansatz_ok,
        detail: format!(
            "{}; R1 resolves only modulo h^6 or on C5 = 2C3^2 + 36C3 + 4C4 - 38, everything else passes",
            detail
        ),
        known_deviation: Some(known),
    }
}

fn criterion_11() -> Outcome {
    let controls = common::negative_controls();
    let failing_without_witness: Vec<_> =
        controls.iter().filter(|(_, r)| r.passed() || r.witness.residual == "0").map(|(n, _)| *n).collect();
    let golden = common::check_goldens();
    Outcome {
        pass: failing_without_witness.is_empty() && golden.is_empty(),
        detail: format!(
            "{} controls; not failing: {:?}; golden mismatches: {:?}",
            controls.len(),
            failing_without_witness,
            golden
        ),
        known_deviation: None,
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut broken = Vec::new();
    for (k, run) in criteria {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {} ({:.1}s) {}", k, status, start.elapsed().as_secs_f64(), o.detail);
        let acceptable = match o.known_deviation {
            Some(known) => o.pass || known,
            None => o.pass,
        };
        if !acceptable {
            broken.push(k);
        }
    }
    assert!(broken.is_empty(), "criteria failing in an undocumented way: {:?}", broken);
}
