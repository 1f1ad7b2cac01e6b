mod common;

use wce_core::numfield::{rat, CycScalar};
use wce_core::tausolver::virasoro::{self, a1_monomials, solve_virasoro};
use wce_core::tausolver::{self as ts, LogSeries, SolveMode, TauSeries};

#[test]
fn w_operators_match_virasoro_after_calibration() {
    let cal = virasoro::virasoro_compare(common::a1_engine(), 5, 9).unwrap();
    assert!(cal.passed(), "{:?}", cal.mismatches);
    assert!(cal.compared_terms > 0);
    assert_eq!(cal.constant_m1, rat(1, 16));
    assert!(cal.gamma.iter().all(|g| *g == rat(1, 1)));
    assert!(cal.rho.iter().all(|r| *r == rat(1, 1)));
}

#[test]
fn solved_tau_matches_the_independent_recursion() {
    let cal = virasoro::virasoro_compare(common::a1_engine(), 5, 9).unwrap();
    let tau = virasoro::recalibrate(common::a1_tau(), &cal.gamma).unwrap();
    let oracle = solve_virasoro(9).unwrap();
    for m in a1_monomials(9) {
        let got = tau.get(&m).cloned().unwrap_or_default();
        let want = oracle.get(&m).cloned().unwrap_or_default();
        assert_eq!(got, want, "{}", ts::format_monomial(&m));
    }
    assert!(virasoro::virasoro_residuals(&tau, 9, 4).is_empty());
}

#[test]
fn log_coefficients_of_the_kdv_tau_function() {
    let log = ts::log_series(common::a1(), common::a1_tau()).unwrap();
    assert_eq!(log.coeff(&[(0, 0); 3]), common::q(1, 6));
    assert_eq!(log.coeff(&[(0, 1)]), common::q(1, 24));
    assert_eq!(log.coeffs[&vec![(0, 0); 3]].1, 0);
    assert_eq!(log.coeffs[&vec![(0, 1)]].1, 1);
    let oracle = virasoro::log_rational(&solve_virasoro(9).unwrap());
    assert_eq!(oracle[&vec![(0, 0); 3]], rat(1, 6));
    assert_eq!(oracle[&vec![(0, 1)]], rat(1, 24));
    for (m, (c, _)) in &log.coeffs {
        assert_eq!(c, &CycScalar::from_rational(&oracle.get(m).cloned().unwrap_or_default()));
    }
}

#[test]
fn overdetermined_system_is_consistent() {
    let e = common::a1_engine();
    let tau = common::a1_tau();
    let report = ts::consistency_check(e, tau, &ts::constraint_pairs(e.datum(), 9)).unwrap();
    assert!(report.equations > 0);
    assert!(report.passed(), "{:?}", report.nonzero);
}

#[test]
fn every_coefficient_is_pinned_by_some_constraint() {
    let e = common::a1_engine();
    let tau = common::a1_tau();
    let pairs = ts::constraint_pairs(e.datum(), 9);
    assert!(ts::undetected_perturbations(e, tau, &pairs).is_empty());
    for m in tau.coeffs.keys().filter(|m| !m.is_empty()) {
        let mut bumped = tau.clone();
        let c = bumped.coeffs.get_mut(m).unwrap();
        *c += &CycScalar::one();
        let report = ts::consistency_check(e, &bumped, &pairs).unwrap();
        assert!(!report.passed(), "perturbing {} went unnoticed", ts::format_monomial(m));
    }
}

#[test]
fn frontier_and_goal_directed_agree() {
    let e = common::a1_engine();
    let targets = vec![vec![(0, 0), (0, 0), (0, 2)], vec![(0, 1), (0, 1)], vec![(0, 4)]];
    let goal = ts::solve_tau(e, 9, SolveMode::GoalDirected, &targets).unwrap();
    assert!(!goal.complete);
    for m in &targets {
        assert_eq!(goal.coeff(m).unwrap(), common::a1_tau().coeff(m).unwrap());
    }
}

#[test]
fn genus_rule_examples() {
    let d = common::a1();
    assert_eq!(ts::genus_of(d, &[(0, 0); 3]).unwrap(), 0);
    assert_eq!(ts::genus_of(d, &[(0, 1)]).unwrap(), 1);
    assert_eq!(ts::genus_of(d, &[(0, 4)]).unwrap(), 2);
    assert!(ts::genus_of(d, &[(0, 0)]).is_err());
    assert!(ts::genus_of(d, &[(0, 0), (0, 0)]).is_err());
}

#[test]
fn exp_of_log_recovers_tau() {
    let d = common::a1();
    let tau = common::a1_tau();
    let log = ts::log_series(d, tau).unwrap();
    let keys: Vec<_> = tau.coeffs.keys().cloned().collect();
    let back = ts::exp_series(d, &log, &keys);
    for (m, c) in &tau.coeffs {
        assert_eq!(back.get(m).cloned().unwrap_or_default(), *c);
    }
}

#[test]
fn series_json_round_trip() {
    let d = common::a1();
    let tau = common::a1_tau();
    let text = tau.to_json(d);
    assert_eq!(&TauSeries::from_json(&text).unwrap(), tau);
    assert_eq!(TauSeries::from_json(&text).unwrap().to_json(d), text);
    let log = ts::log_series(d, tau).unwrap();
    let ltext = log.to_json(d);
    assert_eq!(LogSeries::from_json(&ltext).unwrap(), log);
    assert!(TauSeries::from_json(&ltext).is_err());
}

#[test]
fn monomial_syntax_round_trip() {
    let m = ts::parse_monomial("(1,0)^3 (1,2)", 1).unwrap();
    assert_eq!(m, vec![(0, 0), (0, 0), (0, 0), (0, 2)]);
    assert_eq!(ts::format_monomial(&m), "(1,0)^3 (1,2)");
    assert!(ts::parse_monomial("(2,0)", 1).is_err());
    assert!(ts::parse_monomial("1,0", 1).is_err());
}
