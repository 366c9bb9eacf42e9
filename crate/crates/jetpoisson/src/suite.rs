//! Named verification suites assembled from the module verifiers.

use crate::bialgebra::{
    beta_correspondence, coboundary, compare_cochains, explicit_family, verify_coboundary_form, verify_cocycle,
    verify_cojacobi, verify_cybe, verify_ginf_corollaries, verify_rr_invariance, verify_sl2_pair,
    verify_witt_a_sequence, verify_witt_corollaries, Family, RMatrix,
};
use crate::classify::{verify_branch_d, verify_g0_branch};
use crate::coeffpoly::{Poly, Scalar, Variable};
use crate::density::{verify_density_action, verify_density_jacobi, weight};
use crate::expr::poly;
use crate::jetgroup::{
    verify_associativity, verify_group_axioms, verify_left_invariance, verify_printed_group_law, verify_witt_brackets,
};
use crate::poissonlie::{
    build_omega, compare_structures, lam, linear_closed_form, power_closed_form, printed_table,
    verify_inversion_antipoisson, verify_jacobi, verify_multiplicativity, verify_phi_equation, verify_quadric_list,
    verify_table_errata, verify_vanishes_at_identity, PhiFunction, TABLE_ERRATA,
};
use crate::quantum::{
    pbw_overlap_check, relation_set_catalog, verify_counit_coassoc, verify_delta_homomorphism, verify_grading,
    verify_quasiclassical, SetKind,
};
use crate::report::{Record, Report};
use std::collections::BTreeMap;
use std::fmt::Display;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Group,
    Poisson,
    Phi,
    Bialgebra,
    Cybe,
    Classify,
    Density,
    Quantum,
    All,
}

/// A parameter kept as a symbol or fixed to a rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamValue {
    Symbolic,
    Value(Scalar),
}

impl ParamValue {
    pub fn as_poly(&self, symbol: &Poly) -> Poly {
        match self {
            ParamValue::Symbolic => symbol.clone(),
            ParamValue::Value(q) => Poly::constant(q.clone()),
        }
    }
}

impl std::str::FromStr for ParamValue {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        if s == "symbolic" {
            return Ok(ParamValue::Symbolic);
        }
        let bad = || ConfigError(format!("'{}' is neither a rational nor 'symbolic'", s));
        let p = poly(s).map_err(|_| bad())?;
        p.as_constant().map(ParamValue::Value).ok_or_else(bad)
    }
}

/// Which `phi` the Poisson-side suites use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhiSpec {
    Power,
    Extended,
    Linear,
    Exp,
    /// Contents of a table file: one `m n <lambda_mn>` per line.
    Table(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub n: Option<u32>,
    pub d: u32,
    pub h_order: Option<u32>,
    pub lambda: ParamValue,
    /// `C`, `C1` .. `C5`.
    pub params: BTreeMap<String, ParamValue>,
    pub set: Option<SetKind>,
    pub phi: PhiSpec,
    pub degree: Option<u32>,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        SuiteConfig {
            suite,
            n: None,
            d: 2,
            h_order: None,
            lambda: ParamValue::Symbolic,
            params: BTreeMap::new(),
            set: None,
            phi: PhiSpec::Power,
            degree: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

/// Nilpotency order used for `G_0` tables that are not exact.
const G0_NILPOTENCY: u32 = 2;

fn surface<E: Display>(check: &str, r: Result<Vec<Record>, E>) -> Vec<Record> {
    r.unwrap_or_else(|e| vec![Record::fail(check, vec![], e.to_string())])
}

fn one<E: Display>(check: &str, r: Result<Record, E>) -> Vec<Record> {
    surface(check, r.map(|x| vec![x]))
}

fn param_variable(name: &str) -> Result<Variable, ConfigError> {
    match name {
        "C" => Ok(Variable::c()),
        _ => name
            .strip_prefix('C')
            .and_then(|k| k.parse::<i32>().ok())
            .filter(|k| (1..=5).contains(k))
            .map(Variable::c_k)
            .ok_or_else(|| ConfigError(format!("unknown parameter {}", name))),
    }
}

fn parse_table(text: &str, degree: Option<u32>) -> Result<PhiFunction, ConfigError> {
    let mut it = Vec::new();
    for (k, line) in text.lines().map(str::trim).enumerate().filter(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
        let bad = |why: &str| ConfigError(format!("table line {}: {}", k + 1, why));
        let mut parts = line.splitn(3, char::is_whitespace);
        let m: u32 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad index m"))?;
        let n: u32 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("bad index n"))?;
        let v = poly(parts.next().ok_or_else(|| bad("missing value"))?).map_err(|e| bad(&e.to_string()))?;
        it.push(((m, n), v));
    }
    let min = if it.iter().any(|((m, n), _)| *m == 0 || *n == 0) { 0 } else { 1 };
    let top = it.iter().map(|((m, n), _)| m + n).max().unwrap_or(0);
    let (bound, exact) = match degree {
        Some(b) => (b, false),
        None => (top, true),
    };
    Ok(PhiFunction::from_entries("table", min, it, bound, exact))
}

fn default_n(cfg: &SuiteConfig, suite: Suite) -> u32 {
    cfg.n.unwrap_or(match suite {
        Suite::Group => 6,
        Suite::Poisson | Suite::Phi | Suite::Classify => {
            if cfg.d == 1 {
                4
            } else {
                5
            }
        }
        Suite::Bialgebra | Suite::Cybe => 8,
        Suite::Density => 3,
        Suite::Quantum | Suite::All => 5,
    })
}

/// The configured `phi`; non-exact families are expanded far enough for
/// coordinates `1..=n` (or cochain indices up to `n`).
pub fn build_phi(cfg: &SuiteConfig, n: u32) -> Result<PhiFunction, ConfigError> {
    let lam = cfg.lambda.as_poly(&lam());
    Ok(match &cfg.phi {
        PhiSpec::Power => PhiFunction::power(cfg.d),
        PhiSpec::Extended => {
            if cfg.d < 2 {
                return Err(ConfigError("the extended family needs --d >= 2".into()));
            }
            PhiFunction::extended(cfg.d, &lam, cfg.degree.unwrap_or(2 * n + 4))
        }
        PhiSpec::Linear => PhiFunction::linear(),
        PhiSpec::Exp => PhiFunction::exponential(&lam, cfg.degree.unwrap_or(2 * n + 2 * G0_NILPOTENCY + 4)),
        PhiSpec::Table(text) => parse_table(text, cfg.degree)?,
    })
}

fn nilpotency(phi: &PhiFunction) -> Option<u32> {
    (phi.min_index == 0).then_some(G0_NILPOTENCY)
}

fn group_suite(cfg: &SuiteConfig) -> Vec<Record> {
    let n = default_n(cfg, Suite::Group);
    let mut out = one("group_law_printed", verify_printed_group_law());
    out.extend(one("associativity", verify_associativity(n, 1, None)));
    out.extend(one("associativity", verify_associativity(n.min(4), 0, Some(G0_NILPOTENCY))));
    out.extend(one("group_axioms", verify_group_axioms(n)));
    out.push(verify_witt_brackets(n, n + 2));
    out.extend(one("left_invariance", verify_left_invariance(n)));
    out
}

fn poisson_suite(cfg: &SuiteConfig) -> Result<Vec<Record>, ConfigError> {
    let n = default_n(cfg, Suite::Poisson);
    let phi = build_phi(cfg, n)?;
    let omega = match build_omega(&phi, n, nilpotency(&phi)) {
        Ok(w) => w,
        Err(e) => return Ok(vec![Record::fail("build_omega", vec![], e.to_string())]),
    };
    let mut out = Vec::new();
    if cfg.phi == PhiSpec::Power {
        if let Some(table) = printed_table(cfg.d) {
            let fixed = |i: u32, j: u32, s: &'static str| {
                TABLE_ERRATA.iter().find(|(e, p, _)| *e == cfg.d && *p == (i, j)).map(|(_, _, c)| *c).unwrap_or(s)
            };
            for ((i, j), s) in table.into_iter().filter(|((_, j), _)| *j <= n) {
                let rec = one("bracket_table", crate::poissonlie::verify_printed_table(&omega, &[((i, j), fixed(i, j, s))]));
                let corrected = fixed(i, j, s) != s;
                out.extend(rec.into_iter().map(|r| r.param("d", cfg.d).param("pair", format!("{},{}", i, j)).param("corrected", corrected)));
            }
            out.extend(one("table_errata", verify_table_errata(cfg.d, n)));
        }
        out.push(compare_structures("closed_form", &omega, &power_closed_form(cfg.d, n)));
    }
    if cfg.phi == PhiSpec::Linear {
        out.push(compare_structures("closed_form", &omega, &linear_closed_form(n)));
    }
    out.extend(one("vanishes_at_identity", verify_vanishes_at_identity(&omega)));
    out.push(verify_jacobi(&omega));
    out.extend(one("multiplicativity", verify_multiplicativity(&omega)));
    if omega.start == 1 && n <= 4 {
        out.extend(one("inversion_antipoisson", verify_inversion_antipoisson(&omega)));
    }
    Ok(out)
}

fn phi_suite(cfg: &SuiteConfig) -> Result<Vec<Record>, ConfigError> {
    let dcheck = cfg.degree.unwrap_or(12);
    let phi = match cfg.phi {
        PhiSpec::Power => PhiFunction::power(cfg.d),
        PhiSpec::Extended | PhiSpec::Exp if cfg.degree.is_none() => {
            build_phi(&SuiteConfig { degree: Some(dcheck), ..cfg.clone() }, 0)?
        }
        _ => build_phi(cfg, 0)?,
    };
    let mut out = one("phi_equation", verify_phi_equation(&phi, dcheck).map(|r| r.param("family", &phi.family)));
    out.extend(one("quadric_list", verify_quadric_list(dcheck.max(12))));
    Ok(out)
}

fn r_matrix(cfg: &SuiteConfig, max: u32) -> Result<(PhiFunction, Result<RMatrix, String>), ConfigError> {
    let phi = build_phi(cfg, max)?;
    let r = RMatrix::from_phi(&phi, max as i32).map_err(|e| e.to_string());
    Ok((phi, r))
}

fn bialgebra_suite(cfg: &SuiteConfig) -> Result<Vec<Record>, ConfigError> {
    let max = default_n(cfg, Suite::Bialgebra);
    let (phi, r) = r_matrix(cfg, max)?;
    let r = match r {
        Ok(r) => r,
        Err(e) => return Ok(vec![Record::fail("r_matrix", vec![], e)]),
    };
    let a = coboundary(&r);
    let mut out = vec![verify_cocycle(&a), verify_cojacobi(&a), verify_coboundary_form(&a)];
    match phi.min_index {
        1 => out.push(verify_ginf_corollaries(&a)),
        _ => out.push(verify_witt_corollaries(&a)),
    }
    let sized = max.min(a.max_index.max(0) as u32) as i32;
    match cfg.phi {
        PhiSpec::Power => {
            let neg = coboundary(&RMatrix::from_phi(&phi.neg(), max as i32).expect("power tables are exact"));
            out.push(compare_cochains("explicit_family", &neg, &explicit_family(&Family::Power { d: cfg.d as i32 }, sized), true));
        }
        PhiSpec::Extended => {
            let fam = Family::Extended { d: cfg.d as i32, lam: cfg.lambda.as_poly(&lam()) };
            out.push(compare_cochains("explicit_family", &a, &explicit_family(&fam, sized), false));
        }
        PhiSpec::Linear => out.push(compare_cochains("explicit_family", &a, &explicit_family(&Family::Witt, sized), false)),
        _ => {}
    }
    if phi.min_index == 1 {
        let n = default_n(cfg, Suite::Poisson).min(6);
        let beta = build_omega(&phi, n, None).map_err(|e| e.to_string()).and_then(|w| beta_correspondence(&w, &phi).map_err(|e| e.to_string()));
        out.extend(surface("beta_correspondence", beta));
    }
    let mut out: Vec<Record> = out.into_iter().map(|r| r.param("phi", &phi.family)).collect();
    out.extend(verify_sl2_pair(max as i32));
    out.push(verify_witt_a_sequence());
    Ok(out)
}

fn cybe_suite(cfg: &SuiteConfig) -> Result<Vec<Record>, ConfigError> {
    let max = default_n(cfg, Suite::Cybe);
    let (phi, r) = r_matrix(cfg, max)?;
    let mut out = match r {
        Ok(r) => {
            let mut v = vec![verify_cybe(&r)];
            v.extend(verify_rr_invariance(&r));
            v
        }
        Err(e) => vec![Record::fail("r_matrix", vec![], e)],
    };
    out = out.into_iter().map(|r| r.param("phi", &phi.family)).collect();
    Ok(out)
}

fn classify_suite(cfg: &SuiteConfig) -> Vec<Record> {
    let nmax = cfg.degree.map(|d| d.saturating_sub(1)).unwrap_or(11);
    let mut out = surface("classify_branch", verify_branch_d(cfg.d, nmax));
    out.extend(surface("classify_g0", verify_g0_branch(nmax.min(7))));
    out
}

fn density_suite(cfg: &SuiteConfig) -> Result<Vec<Record>, ConfigError> {
    let n = default_n(cfg, Suite::Density);
    let phi = match cfg.phi {
        PhiSpec::Power => PhiFunction::power(cfg.d),
        _ => build_phi(&SuiteConfig { degree: Some(cfg.degree.unwrap_or(2 * n + 4)), ..cfg.clone() }, n)?,
    };
    let w = cfg.lambda.as_poly(&weight());
    let mut out = surface("density_action", verify_density_action(&phi, &w, n));
    out.extend(surface("density_jacobi", verify_density_jacobi(&phi, &w, n)));
    Ok(out.into_iter().map(|r| r.param("weight", &w)).collect())
}

fn quantum_suite(cfg: &SuiteConfig) -> Result<Vec<Record>, ConfigError> {
    let mut values = BTreeMap::new();
    for (name, v) in &cfg.params {
        let var = param_variable(name)?;
        if let ParamValue::Value(q) = v {
            values.insert(var, Poly::constant(q.clone()));
        }
    }
    let kinds = match cfg.set {
        Some(k) => vec![k],
        None => vec![SetKind::R1, SetKind::R2, SetKind::R3],
    };
    let mut out = Vec::new();
    for kind in kinds {
        let (d, n, _, names) = kind.shape();
        let mine: BTreeMap<Variable, Poly> = values.iter().filter(|(v, _)| names.contains(v)).map(|(v, p)| (*v, p.clone())).collect();
        if cfg.set.is_some() && mine.len() != values.len() {
            let extra: Vec<String> = values.keys().filter(|v| !names.contains(v)).map(|v| v.name()).collect();
            return Err(ConfigError(format!("set {} has no parameters {:?}", kind.name(), extra)));
        }
        let set = match relation_set_catalog(kind, &mine, cfg.h_order) {
            Ok(s) => s,
            Err(e) => {
                out.push(Record::fail("relation_set", vec![], e.to_string()).param("set", kind.name()));
                continue;
            }
        };
        out.push(pbw_overlap_check(&set));
        out.push(verify_delta_homomorphism(&set));
        out.push(verify_counit_coassoc(&set));
        out.push(verify_grading(&set));
        match build_omega(&PhiFunction::power(d), n as u32, None) {
            Ok(omega) => out.push(verify_quasiclassical(&set, &omega)),
            Err(e) => out.push(Record::fail("quasiclassical", vec![], e.to_string())),
        }
        for (v, p) in &mine {
            out = out.into_iter().map(|r| if r.params.get("set").map(String::as_str) == Some(kind.name()) { r.param(&v.name(), p) } else { r }).collect();
        }
    }
    Ok(out)
}

/// Runs one suite, or all of them in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, ConfigError> {
    if cfg.d < 1 || cfg.n == Some(0) || cfg.h_order == Some(0) {
        return Err(ConfigError("n, d and h-order must be at least 1".into()));
    }
    let suites = match cfg.suite {
        Suite::All => vec![
            Suite::Group,
            Suite::Poisson,
            Suite::Phi,
            Suite::Bialgebra,
            Suite::Cybe,
            Suite::Classify,
            Suite::Density,
            Suite::Quantum,
        ],
        s => vec![s],
    };
    let mut report = Report::new();
    for s in suites {
        let records = match s {
            Suite::Group => group_suite(cfg),
            Suite::Poisson => poisson_suite(cfg)?,
            Suite::Phi => phi_suite(cfg)?,
            Suite::Bialgebra => bialgebra_suite(cfg)?,
            Suite::Cybe => cybe_suite(cfg)?,
            Suite::Classify => classify_suite(cfg),
            Suite::Density => density_suite(cfg)?,
            Suite::Quantum => quantum_suite(cfg)?,
            Suite::All => unreachable!(),
        };
        for r in records {
            report.push(r);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffpoly::rat;

    #[test]
    fn poisson_d2_has_ten_bracket_records() {
        let cfg = SuiteConfig { d: 2, n: Some(5), ..SuiteConfig::new(Suite::Poisson) };
        let rep = run_suite(&cfg).unwrap();
        let brackets: Vec<_> = rep.records.iter().filter(|r| r.check == "bracket_table").collect();
        assert_eq!(brackets.len(), 10);
        assert!(rep.all_pass(), "{}", rep.to_text());
    }

    #[test]
    fn quantum_r2_with_c_zero() {
        let mut cfg = SuiteConfig::new(Suite::Quantum);
        cfg.set = Some(SetKind::R2);
        cfg.params.insert("C".into(), ParamValue::Value(rat(0, 1)));
        let rep = run_suite(&cfg).unwrap();
        assert_eq!(rep.records.len(), 5);
        assert!(rep.all_pass(), "{}", rep.to_text());
        assert_eq!(rep.records[0].params["C"], "0");
    }

    #[test]
    fn group_suite_passes() {
        let rep = run_suite(&SuiteConfig { n: Some(4), ..SuiteConfig::new(Suite::Group) }).unwrap();
        assert!(rep.all_pass(), "{}", rep.to_text());
    }

    #[test]
    fn config_errors() {
        assert!(run_suite(&SuiteConfig { n: Some(0), ..SuiteConfig::new(Suite::Group) }).is_err());
        let mut cfg = SuiteConfig::new(Suite::Quantum);
        cfg.set = Some(SetKind::R3);
        cfg.params.insert("C".into(), ParamValue::Value(rat(1, 1)));
        assert!(run_suite(&cfg).is_err());
        cfg.params = BTreeMap::from([("C9".into(), ParamValue::Symbolic)]);
        assert!(run_suite(&cfg).is_err());
        assert!("x".parse::<ParamValue>().is_err());
        assert_eq!("-3/2".parse::<ParamValue>(), Ok(ParamValue::Value(rat(-3, 2))));
    }

    #[test]
    fn table_files() {
        let phi = parse_table("# phi_2\n3 1 1\n", None).unwrap();
        assert_eq!(phi.entries, PhiFunction::power(2).entries);
        assert!(phi.exact);
        assert!(parse_table("3 x 1", None).is_err());
        assert_eq!(parse_table("1 0 1", None).unwrap().min_index, 0);
    }

    #[test]
    fn module_errors_become_failed_records() {
        let cfg = SuiteConfig { phi: PhiSpec::Exp, degree: Some(3), ..SuiteConfig::new(Suite::Poisson) };
        let rep = run_suite(&cfg).unwrap();
        assert!(!rep.all_pass());
        assert_eq!(rep.records[0].check, "build_omega");
    }
}
