//! Three small computations exposed to the browser through wasm-bindgen.
//!
//! The D4 potential here is built from the mode-construction generators,
//! which take a fraction of a second, rather than the kernel solve used by
//! the command-line default. Both give the same τ.

use wasm_bindgen::prelude::*;
use wce_core::fock::{self, Strategy};
use wce_core::numfield::CycScalar;
use wce_core::rootdata::{DynkinType, RootDatum};
use wce_core::tausolver::{self as ts, PotentialForm, SolveMode};
use wce_core::twist::{monomial_degree, OperatorEngine};

fn approx(c: &CycScalar) -> String {
    let (re, im) = c.to_complex();
    if im.abs() > 1e-12 * re.abs().max(1.0) {
        format!("{re:.6e}{im:+.6e}i")
    } else {
        format!("{re:.6e}")
    }
}

fn degree(h: u32, n: i64) -> String {
    let h = h as i64;
    if n % h == 0 { (n / h).to_string() } else { format!("{n}/{h}") }
}

/// τ and log τ of the A1 (Witten–Kontsevich) case up to degree `max_num`/2.
pub fn a1_series_text(max_num: i64) -> Result<String, String> {
    if !(0..=13).contains(&max_num) {
        return Err("choose a degree numerator between 0 and 13".into());
    }
    let d = RootDatum::build(DynkinType::new(wce_core::rootdata::Family::A, 1).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let gens = fock::resolve_generators(&d, Strategy::Builtin).map_err(|e| e.to_string())?;
    let engine = OperatorEngine::new(&d, &gens.generators);
    let tau = ts::solve_frontier(&engine, max_num).map_err(|e| e.to_string())?;
    let log = ts::log_series(&d, &tau).map_err(|e| e.to_string())?;
    let mut rows: Vec<_> = log.coeffs.iter().collect();
    rows.sort_by_key(|(m, _)| (monomial_degree(&d, m), (*m).clone()));
    let mut out = format!("log τ for A1 up to degree {}\n", degree(d.h, max_num));
    for (m, (c, g)) in rows {
        out.push_str(&format!(
            "{:>5}  {:<22} {:<12} ≈ {}  genus {g}\n",
            degree(d.h, monomial_degree(&d, m)),
            ts::format_monomial(m),
            c.to_string(),
            approx(c)
        ));
    }
    Ok(out)
}

/// The D4 genus-0 small-phase potential in the requested coordinate form,
/// with the WDVV check and the comparison against the stored reference.
pub fn d4_potential_text(form: &str) -> Result<String, String> {
    let form: PotentialForm = form.parse().map_err(|e: wce_core::Error| e.to_string())?;
    let d = RootDatum::build("D4".parse().map_err(|e: wce_core::Error| e.to_string())?).map_err(|e| e.to_string())?;
    let gens = fock::resolve_generators(&d, Strategy::ModeConstruction).map_err(|e| e.to_string())?;
    let engine = OperatorEngine::new(&d, &gens.generators);
    let bound = (d.h * d.h - 1) as i64;
    let targets: Vec<_> = ts::monomials_by_degree(&d, bound)
        .into_iter()
        .flatten()
        .filter(|m| !m.is_empty() && m.iter().all(|v| v.1 == 0))
        .collect();
    let tau = ts::solve_tau(&engine, bound, SolveMode::GoalDirected, &targets).map_err(|e| e.to_string())?;
    let f = ts::frobenius_potential(&d, &ts::log_series(&d, &tau).map_err(|e| e.to_string())?);
    let g = ts::transform_potential(&d, &f, form).map_err(|e| e.to_string())?;
    let names = form.variable_names(d.rank());
    let mut out = format!("D4 potential, {} form, from {} small-phase coefficients\n", form.name(), targets.len());
    for (e, c) in g.terms() {
        let mono: Vec<String> = e
            .iter()
            .zip(&names)
            .filter(|(&k, _)| k > 0)
            .map(|(&k, n)| if k == 1 { n.clone() } else { format!("{n}^{k}") })
            .collect();
        out.push_str(&format!("  {:<12} {}  ≈ {}\n", mono.join("*"), c, approx(c)));
    }
    let wdvv = ts::wdvv_check(&g).map_err(|e| e.to_string())?;
    let reference = ts::d4_reference(&d, form).map_err(|e| e.to_string())?;
    out.push_str(&format!("WDVV: {wdvv}\nmatches the reference exactly: {}\n", g == reference));
    Ok(out)
}

/// Screens each generator of the chosen construction, without substitution.
pub fn generator_report_text(kind: &str, strategy: &str) -> Result<String, String> {
    let kind: DynkinType = kind.parse().map_err(|e: wce_core::Error| e.to_string())?;
    let strategy: Strategy = strategy.parse().map_err(|e: wce_core::Error| e.to_string())?;
    if kind.rank > 4 {
        return Err("the demo is limited to rank 4".into());
    }
    let d = RootDatum::build(kind).map_err(|e| e.to_string())?;
    let gens = fock::w_generators(&d, strategy).map_err(|e| e.to_string())?;
    let mut out = format!("{kind}, {} generators\n", strategy.name());
    for (i, w) in gens.iter().enumerate() {
        let v = fock::verify_in_w(&d, w).map_err(|e| e.to_string())?;
        let sizes: Vec<String> = v.residuals.iter().map(|r| r.len().to_string()).collect();
        out.push_str(&format!(
            "w_{}  degree {}  {} terms  residual terms [{}]  {}\n",
            i + 1,
            w.homogeneous_degree().map_or("-".into(), |x| x.to_string()),
            w.len(),
            sizes.join(", "),
            if v.passed() { "in W" } else { "fails the screening check" }
        ));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn a1_series(max_num: i32) -> Result<String, JsError> {
    a1_series_text(max_num as i64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn d4_potential(form: &str) -> Result<String, JsError> {
    d4_potential_text(form).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn generator_report(kind: &str, strategy: &str) -> Result<String, JsError> {
    generator_report_text(kind, strategy).map_err(|e| JsError::new(&e))
}
