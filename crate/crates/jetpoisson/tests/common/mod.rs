//! Deliberately broken inputs for every verifier, shared by the
//! negative-control and acceptance tests.

use jetpoisson::bialgebra::{
    beta_correspondence, coboundary, compare_cochains, explicit_family, verify_cocycle, verify_cojacobi, verify_cybe,
    verify_rr_invariance, Family, RMatrix,
};
use jetpoisson::coeffpoly::{Poly, Variable};
use jetpoisson::density::{build_omega_density, verify_density_action_of, weight};
use jetpoisson::expr::poly;
use jetpoisson::poissonlie::{
    build_omega, printed_table, verify_jacobi, verify_multiplicativity, verify_phi_equation, verify_printed_table,
    verify_vanishes_at_identity, PhiFunction,
};
use jetpoisson::quantum::{
    pbw_overlap_check, relation_set_catalog, verify_counit_coassoc, verify_delta_homomorphism, verify_grading,
    verify_quasiclassical, with_printed_erratum, NCElement, SetKind,
};
use jetpoisson::report::Record;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn x(i: i32) -> Poly {
    Poly::var(Variable::x(i))
}

/// `(name, record)` for each control; every record must fail.
pub fn negative_controls() -> Vec<(&'static str, Record)> {
    let mut out = Vec::new();
    let phi2 = PhiFunction::power(2);
    let omega = build_omega(&phi2, 5, None).unwrap();
    let bent = omega.clone().with_bracket(1, 3, &omega.bracket(1, 3) + &x(1));
    out.push(("jacobi", verify_jacobi(&bent)));
    out.push(("multiplicativity", verify_multiplicativity(&bent).unwrap()));
    let lifted = omega.clone().with_bracket(1, 2, &omega.bracket(1, 2) + &Poly::one());
    out.push(("vanishes_at_identity", verify_vanishes_at_identity(&lifted).unwrap()));
    out.push(("bracket_table", verify_printed_table(&omega, &printed_table(2).unwrap()).unwrap()));
    let invalid = PhiFunction::from_entries("invalid", 1, [((1, 2), Poly::one()), ((1, 3), Poly::one())], 4, true);
    out.push(("phi_equation", verify_phi_equation(&invalid, 6).unwrap()));
    out.push(("beta_correspondence", beta_correspondence(&bent, &phi2).unwrap().remove(0)));

    let r = RMatrix::from_phi(&phi2, 6).unwrap();
    let mut a = coboundary(&r);
    a.add_wedge(3, 1, 2, &Poly::one());
    out.push(("cocycle", verify_cocycle(&a)));
    out.push(("cojacobi", verify_cojacobi(&a)));
    let flipped = coboundary(&RMatrix::from_phi(&phi2.neg(), 6).unwrap());
    out.push(("explicit_family", compare_cochains("explicit_family", &flipped, &explicit_family(&Family::Power { d: 2 }, 6), false)));
    let bad_r = RMatrix::from_entries(0, 6, [((0, 1), Poly::one()), ((0, 2), Poly::one())]);
    out.push(("cybe", verify_cybe(&bad_r)));
    out.push(("rr_invariance", verify_rr_invariance(&bad_r).pop().unwrap()));

    let w = weight();
    let dens = build_omega_density(&PhiFunction::power(1), &w, 3).unwrap();
    let bent_dens = dens.clone().with_bracket(1, 2, &dens.bracket(1, 2) + &x(0));
    out.push(("density_action", verify_density_action_of(&bent_dens, &PhiFunction::power(1), &w).unwrap().remove(0)));
    let bent_dens = dens.clone().with_bracket(0, 1, &dens.bracket(0, 1) + &x(2));
    out.push(("density_jacobi", verify_jacobi(&bent_dens)));

    let none = BTreeMap::new();
    let fixed = BTreeMap::from([(Variable::c_k(1), Poly::one()), (Variable::c_k(2), poly("9/2").unwrap())]);
    out.push(("pbw_overlap", pbw_overlap_check(&relation_set_catalog(SetKind::R2Ansatz, &fixed, None).unwrap())));
    let r2 = relation_set_catalog(SetKind::R2, &none, None).unwrap();
    let r2_printed = with_printed_erratum(&r2, 2, 4).unwrap();
    out.push(("delta_homomorphism", verify_delta_homomorphism(&r2_printed)));
    out.push(("quasiclassical", verify_quasiclassical(&r2_printed, &omega)));
    let mut r3 = relation_set_catalog(SetKind::R3, &none, None).unwrap();
    r3.set_rule(1, 2, NCElement::parse("h x1^2").unwrap()).unwrap();
    out.push(("counit_coassoc", verify_counit_coassoc(&r3)));
    let mut r3 = relation_set_catalog(SetKind::R3, &none, None).unwrap();
    r3.set_rule(4, 5, NCElement::parse("h x4 + h^2 x2 x1").unwrap()).unwrap();
    out.push(("grading", verify_grading(&r3)));
    out
}

/// Compares each control with its golden file; `JETPOISSON_BLESS=1`
/// rewrites the files instead. Returns the mismatching names.
pub fn check_goldens() -> Vec<String> {
    let bless = std::env::var("JETPOISSON_BLESS").is_ok_and(|v| v == "1");
    let mut bad = Vec::new();
    for (name, rec) in negative_controls() {
        let path = golden_dir().join(format!("{}.json", name));
        let body = serde_json::to_string_pretty(&rec).unwrap() + "\n";
        if bless {
            std::fs::write(&path, &body).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(body.as_str()) || rec.passed() {
            bad.push(name.to_string());
        }
    }
    bad
}
