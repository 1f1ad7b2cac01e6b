#![allow(dead_code)]

use std::sync::OnceLock;

use wce_core::fock::{self, GeneratorSet, Strategy};
use wce_core::numfield::{rat, CycScalar};
use wce_core::rootdata::RootDatum;
use wce_core::tausolver::{self as ts, TauSeries};
use wce_core::twist::OperatorEngine;

pub fn datum(name: &str) -> RootDatum {
    RootDatum::build(name.parse().unwrap()).unwrap()
}

pub fn q(p: i64, r: i64) -> CycScalar {
    CycScalar::from_rational(&rat(p, r))
}

pub fn a1() -> &'static RootDatum {
    static D: OnceLock<RootDatum> = OnceLock::new();
    D.get_or_init(|| datum("A1"))
}

pub fn d4() -> &'static RootDatum {
    static D: OnceLock<RootDatum> = OnceLock::new();
    D.get_or_init(|| datum("D4"))
}

pub fn a1_engine() -> &'static OperatorEngine {
    static E: OnceLock<OperatorEngine> = OnceLock::new();
    E.get_or_init(|| {
        let g = fock::resolve_generators(a1(), Strategy::Builtin).unwrap();
        OperatorEngine::new(a1(), &g.generators)
    })
}

/// The builtin D4 set after screening, with failures replaced.
pub fn d4_generators() -> &'static GeneratorSet {
    static G: OnceLock<GeneratorSet> = OnceLock::new();
    G.get_or_init(|| fock::resolve_generators(d4(), Strategy::Builtin).unwrap())
}

pub fn d4_engine() -> &'static OperatorEngine {
    static E: OnceLock<OperatorEngine> = OnceLock::new();
    E.get_or_init(|| OperatorEngine::new(d4(), &d4_generators().generators))
}

/// A1 τ through degree 9/2.
pub fn a1_tau() -> &'static TauSeries {
    static T: OnceLock<TauSeries> = OnceLock::new();
    T.get_or_init(|| ts::solve_frontier(a1_engine(), 9).unwrap())
}

/// D4 τ through degree 3.
pub fn d4_tau() -> &'static TauSeries {
    static T: OnceLock<TauSeries> = OnceLock::new();
    T.get_or_init(|| ts::solve_frontier(d4_engine(), 18).unwrap())
}

/// Every small-phase-space monomial of D4 up to degree 35/6.
pub fn d4_small_phase_targets() -> Vec<Vec<(u16, u16)>> {
    ts::monomials_by_degree(d4(), 35)
        .into_iter()
        .flatten()
        .filter(|m| !m.is_empty() && m.iter().all(|v| v.1 == 0))
        .collect()
}
