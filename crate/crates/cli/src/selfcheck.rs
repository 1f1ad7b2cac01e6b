//! The invariant suites behind `wce selfcheck`.
//!
//! Each suite prints one PASS or FAIL line on stdout; timings go to stderr so
//! the report itself is reproducible.

use std::time::Instant;

use num_traits::{One, Zero};
use wce_core::fock::{self, FockElement};
use wce_core::numfield::{rat, rat_int, CycScalar, Rational};
use wce_core::rootdata::{Family, LatticeVector, RootDatum};
use wce_core::tausolver::{self as ts, virasoro, PotentialForm, SolveMode, TauSeries};
use wce_core::twist::{self, OperatorEngine, DILATON};

use crate::commands::{degree_text, Ctx};
use crate::Failure;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn roots_suite(d: &RootDatum) -> Outcome {
    let roots = d.roots();
    let l = d.rank();
    for r in &roots {
        let a = LatticeVector::root(r);
        let n: i64 = (0..l).flat_map(|i| (0..l).map(move |j| (i, j))).map(|(i, j)| r[i] * d.cartan[i][j] * r[j]).sum();
        let want = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
        ensure(d.epsilon(&a, &a).map_err(text)? == want, || format!("ε(α,α) wrong at {r:?}"))?;
    }
    // All triples for small systems, a fixed slice of them otherwise.
    let sample: Vec<&Vec<i64>> = roots.iter().take(24).collect();
    let e = |a: &[i64], b: &[i64]| d.epsilon(&LatticeVector::root(a), &LatticeVector::root(b));
    for x in &sample {
        for y in &sample {
            let s: Vec<i64> = x.iter().zip(y.iter()).map(|(a, b)| a + b).collect();
            for z in &sample {
                let (sz, xz, yz) = (e(&s, z).map_err(text)?, e(x, z).map_err(text)?, e(y, z).map_err(text)?);
                let (zs, zx, zy) = (e(z, &s).map_err(text)?, e(z, x).map_err(text)?, e(z, y).map_err(text)?);
                ensure(sz == xz * yz && zs == zx * zy, || format!("ε not bimultiplicative at {x:?}, {y:?}, {z:?}"))?;
            }
        }
    }
    let id: Vec<Vec<i64>> = (0..l).map(|i| (0..l).map(|j| (i == j) as i64).collect()).collect();
    let mut p = id.clone();
    for k in 1..=d.h {
        p = (0..l).map(|i| (0..l).map(|j| (0..l).map(|t| p[i][t] * d.sigma[t][j]).sum()).collect()).collect();
        ensure((p == id) == (k == d.h), || format!("σ^{k} is {}the identity", if k == d.h { "not " } else { "" }))?;
    }
    for j in 0..l {
        let zeta = CycScalar::zeta(d.conductor, (d.conductor / d.h * d.exponents[j]) as i64);
        for r in 0..l {
            let mut acc = CycScalar::zero();
            for c in 0..l {
                acc += &(&CycScalar::from_int(d.sigma[r][c]) * &d.eigvecs[j][c]);
            }
            ensure(acc == &zeta * &d.eigvecs[j][r], || format!("φ^{} is not an eigenvector with exponent {}", j + 1, d.exponents[j]))?;
        }
    }
    Ok(format!(
        "{} roots, {} triples, σ of order {}, exponents {:?}",
        roots.len(),
        sample.len().pow(3),
        d.h,
        d.exponents
    ))
}

/// Coefficient of s^n in (1+s)^{-a}(1+as), written with an independent binomial.
fn closed_form_coeff(a: &Rational, n: u32) -> Rational {
    let choose = |x: &Rational, k: u32| {
        (0..k).fold(Rational::one(), |acc, j| acc * (x - rat_int(j as i64)) / rat_int(j as i64 + 1))
    };
    let minus_a = -a.clone();
    let mut c = choose(&minus_a, n);
    if n >= 1 {
        c += a * choose(&minus_a, n - 1);
    }
    c
}

fn propagator_suite(d: &RootDatum) -> Outcome {
    let l = d.rank();
    for i in 0..l {
        ensure(closed_form_coeff(&d.exponent_ratio(i), 1).is_zero(), || format!("s^-1 term for i = {}", i + 1))?;
        for j in 0..l {
            for k in 0..=10 {
                let want = if d.eta(i, j) { closed_form_coeff(&d.exponent_ratio(i), k + 2) } else { Rational::zero() };
                ensure(twist::propagator_coeff(d, i, j, k) == want, || format!("P^{{{},{}}}_{k}", i + 1, j + 1))?;
            }
        }
    }
    Ok(format!("{} pairs through k = 10, no s^-1 term", l * l))
}

fn generator_suite(ctx: &Ctx) -> Outcome {
    let d = &ctx.datum;
    let set = ctx.generators().map_err(failure_text)?;
    let mut degrees = Vec::new();
    for (i, w) in set.generators.iter().enumerate() {
        ensure(fock::verify_in_w(d, w).map_err(text)?.passed(), || format!("w_{} is not in W", i + 1))?;
        let deg = w.homogeneous_degree();
        ensure(deg == Some(d.exponents[i] + 1), || format!("w_{} has degree {deg:?}", i + 1))?;
        degrees.push(deg.unwrap_or(0).to_string());
    }
    let mut note = format!("degrees {} with zero screening residuals", degrees.join(","));
    for (i, s) in &set.replaced {
        note.push_str(&format!("; {} w_{} replaced by {}", ctx.strategy.name(), i + 1, s.name()));
    }
    Ok(note)
}

fn integer_mode_suite(ctx: &Ctx) -> Outcome {
    let d = &ctx.datum;
    let h = d.h as i64;
    let set = ctx.generators().map_err(failure_text)?;
    for (i, w) in set.generators.iter().enumerate() {
        let terms = twist::wick_expand(d, w, 2 * h, 2 * h);
        ensure(terms.iter().all(|(lam, _)| lam.rem_euclid(h) == 0), || format!("w_{} has fractional λ-powers", i + 1))?;
    }
    // A lone boson does carry fractional powers, so the check above has teeth.
    let control = twist::wick_expand(d, &FockElement::gen(0, 1), 2 * h, 2 * h);
    ensure(control.iter().any(|(lam, _)| lam.rem_euclid(h) != 0), || "control input shows no fractional powers".into())?;
    Ok(format!("integral λ-powers for all {} generators", set.generators.len()))
}

fn operator_suite(d: &RootDatum, e: &OperatorEngine, max_m: u32, truncation: i64) -> Outcome {
    let h = d.h as i64;
    let window = (h * (*d.exponents.iter().max().unwrap_or(&1) as i64 + 1)).max(truncation);
    let mut count = 0;
    for i in 0..d.rank() {
        let mi = d.exponents[i] as i64;
        for m in 0..=max_m {
            let op = e.operator(i, m, window).map_err(text)?;
            let name = format!("W_{{{},{m}}}", i + 1);
            for t in &op.terms {
                ensure(t.degree(d) == h * (mi - m as i64), || format!("{name} is not homogeneous"))?;
            }
            ensure(op.dilaton_depths().keys().all(|&k| k as i64 <= mi), || format!("{name} exceeds depth {mi}"))?;
            let top: Vec<_> =
                op.terms.iter().filter(|t| t.creations.iter().filter(|&&v| v == DILATON).count() as i64 == mi).collect();
            ensure(
                top.len() == 1 && top[0].annihilations == vec![(i as u16, m as u16)] && top[0].creations.len() as i64 == mi,
                || format!("{name}: top piece is not c·∂"),
            )?;
            let want = twist::expected_leading(d, i, m);
            ensure(!op.c_leading.is_zero() && op.c_leading == CycScalar::from_rational(&want), || {
                format!("c_{{{},{m}}} = {} but the Γ formula gives {want}", i + 1, op.c_leading)
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} operators (m ≤ {max_m}, window {}) homogeneous, depth ≤ m_i, c_{{i,m}} exact", degree_text(d.h, window)))
}

fn consistency_suite(e: &OperatorEngine, tau: &TauSeries) -> Outcome {
    let r = ts::consistency_check(e, tau, &ts::constraint_pairs(e.datum(), tau.truncation)).map_err(text)?;
    ensure(r.passed(), || format!("{} nonzero residuals of {}", r.nonzero.len(), r.equations))?;
    Ok(format!("{} equations, all residuals zero", r.equations))
}

fn uniqueness_suite(e: &OperatorEngine, tau: &TauSeries, literal_every: usize) -> Outcome {
    let pairs = ts::constraint_pairs(e.datum(), tau.truncation);
    let escaped = ts::undetected_perturbations(e, tau, &pairs);
    ensure(escaped.is_empty(), || {
        format!("undetected: {}", escaped.iter().map(|m| ts::format_monomial(m)).collect::<Vec<_>>().join(", "))
    })?;
    let keys: Vec<_> = tau.coeffs.keys().filter(|m| !m.is_empty()).cloned().collect();
    let mut literal = 0;
    for m in keys.iter().step_by(literal_every.max(1)) {
        let mut bumped = tau.clone();
        if let Some(c) = bumped.coeffs.get_mut(m) {
            *c += &CycScalar::one();
        }
        let r = ts::consistency_check(e, &bumped, &pairs).map_err(text)?;
        ensure(!r.passed(), || format!("perturbing {} went unnoticed", ts::format_monomial(m)))?;
        literal += 1;
    }
    Ok(format!("all {} coefficients detected, {literal} perturbed literally", keys.len()))
}

fn genus_suite(d: &RootDatum, tau: &TauSeries) -> Outcome {
    let log = ts::log_series(d, tau).map_err(text)?;
    for (m, (_, g)) in &log.coeffs {
        ensure(ts::genus_of(d, m).map_err(text)? == *g, || format!("genus tag of {}", ts::format_monomial(m)))?;
    }
    let top = log.coeffs.values().map(|(_, g)| *g).max().unwrap_or(0);
    Ok(format!("{} nonzero log coefficients, integer genus 0..={top}", log.coeffs.len()))
}

fn virasoro_suite(e: &OperatorEngine, tau: &TauSeries, max_m: u32) -> Outcome {
    let cal = virasoro::virasoro_compare(e, max_m, 9).map_err(text)?;
    ensure(cal.passed(), || format!("term mismatches: {:?}", cal.mismatches))?;
    ensure(cal.constant_m1 == rat(1, 16), || format!("constant term {} instead of 1/16", cal.constant_m1))?;
    let shifted = virasoro::recalibrate(tau, &cal.gamma).map_err(text)?;
    let residuals = virasoro::virasoro_residuals(&shifted, tau.truncation, max_m as i32 - 1);
    ensure(residuals.is_empty(), || format!("L_m residuals {residuals:?}"))?;
    let oracle = virasoro::solve_virasoro(tau.truncation).map_err(text)?;
    for m in virasoro::a1_monomials(tau.truncation) {
        let (got, want) = (shifted.get(&m).cloned().unwrap_or_default(), oracle.get(&m).cloned().unwrap_or_default());
        ensure(got == want, || format!("τ at {} is {got}, the recursion gives {want}", ts::format_monomial(&m)))?;
    }
    Ok(format!("{} operator terms match L_-1..L_{}, constant 1/16, τ equals the recursion", cal.compared_terms, max_m - 1))
}

fn potential_suite(ctx: &Ctx) -> Outcome {
    let d = &ctx.datum;
    let h = d.h as i64;
    let targets: Vec<_> = ts::monomials_by_degree(d, h * h - 1)
        .into_iter()
        .flatten()
        .filter(|m| !m.is_empty() && m.iter().all(|v| v.1 == 0))
        .collect();
    let tau = ctx.tau(h * h - 1, SolveMode::GoalDirected, &targets).map_err(failure_text)?;
    let f = ts::frobenius_potential(d, &ts::log_series(d, &tau).map_err(text)?);
    ensure(!f.is_zero(), || "potential vanishes".into())?;
    ensure(ts::wdvv_check(&f).map_err(text)?, || "WDVV fails".into())?;
    ensure(ts::quasi_homogeneous(d, &f), || "not quasi-homogeneous".into())?;
    let mut note = format!("{} terms, WDVV and quasi-homogeneity hold", f.len());
    if d.kind.family == Family::D && d.kind.rank == 4 {
        for form in [PotentialForm::Native, PotentialForm::Dubrovin, PotentialForm::Fjrw] {
            let g = ts::transform_potential(d, &f, form).map_err(text)?;
            let r = ts::d4_reference(d, form).map_err(text)?;
            ensure(g == r, || format!("{} form differs from the reference by {}", form.name(), g.sub(&r)))?;
        }
        note.push_str("; all three coordinate forms match their references exactly");
    }
    Ok(note)
}

fn failure_text(f: Failure) -> String {
    match f {
        Failure::Usage(s) | Failure::Runtime(s) => s,
    }
}

pub fn run(ctx: &Ctx, quick: bool) -> Result<bool, Failure> {
    let d = &ctx.datum;
    let is_a1 = d.kind.family == Family::A && d.kind.rank == 1;
    let h = d.h as i64;
    let truncation = match (is_a1, quick) {
        (true, false) => 9,
        (true, true) => 6,
        (false, false) => 3 * h,
        (false, true) => 2 * h,
    };
    let max_m = match (is_a1, quick) {
        (true, false) => 5,
        (true, true) => 3,
        (false, false) => 2,
        (false, true) => 1,
    };
    println!(
        "selfcheck  type {}  strategy {}  {}  truncation {}",
        d.kind,
        ctx.strategy.name(),
        if quick { "quick" } else { "full" },
        degree_text(d.h, truncation)
    );

    let engine = ctx.engine()?;
    let tau = ctx.tau(truncation, SolveMode::Frontier, &[])?;

    let mut suites: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("cocycle and Coxeter element", Box::new(|| roots_suite(d))),
        ("propagator expansion", Box::new(|| propagator_suite(d))),
        ("generators in W", Box::new(|| generator_suite(ctx))),
        ("integral λ-powers", Box::new(|| integer_mode_suite(ctx))),
        ("operator structure", Box::new(|| operator_suite(d, engine, max_m, truncation))),
        ("consistency", Box::new(|| consistency_suite(engine, &tau))),
        ("uniqueness under perturbation", Box::new(|| uniqueness_suite(engine, &tau, if is_a1 { 1 } else { 8 }))),
        ("genus integrality", Box::new(|| genus_suite(d, &tau))),
    ];
    if is_a1 {
        suites.push(("Virasoro comparison", Box::new(|| virasoro_suite(engine, &tau, max_m))));
    }
    if !quick {
        suites.push(("small-phase potential", Box::new(|| potential_suite(ctx))));
    }

    let mut failed = 0;
    for (name, suite) in &suites {
        let start = Instant::now();
        let outcome = suite();
        eprintln!("selfcheck: {name} took {:.2?}", start.elapsed());
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("selfcheck: {} of {} suites passed", suites.len() - failed, suites.len());
    Ok(failed == 0)
}
