//! One line per acceptance criterion. Exits nonzero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use num_traits::{One, Zero};
use wce_core::fock::{self, FockElement, Strategy};
use wce_core::numfield::{rat, rat_int, sqrt_of_integer, CycScalar, Rational};
use wce_core::rootdata::{LatticeVector, RootDatum};
use wce_core::tausolver::virasoro;
use wce_core::tausolver::{self as ts, PotentialForm, SolveMode};
use wce_core::twist::{self, OperatorEngine, DILATON};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d4_potential() -> Result<wce_core::poly::Poly, String> {
    let d = common::d4();
    let tau = ts::solve_tau(common::d4_engine(), 35, SolveMode::GoalDirected, &common::d4_small_phase_targets())
        .map_err(|e| e.to_string())?;
    let log = ts::log_series(d, &tau).map_err(|e| e.to_string())?;
    Ok(ts::frobenius_potential(d, &log))
}

fn potential_reproduction() -> Outcome {
    let d = common::d4();
    let start = Instant::now();
    let f = d4_potential()?;
    let reference = ts::d4_reference(d, PotentialForm::Native).map_err(|e| e.to_string())?;
    let diff = f.sub(&reference);
    ensure(diff.is_zero(), || format!("differs from the reference by {diff}"))?;
    let k = (&sqrt_of_integer(2, d.conductor).unwrap() * &CycScalar::from_int(18)).inv().unwrap();
    let checks = [
        ([2, 0, 0, 1], common::q(1, 2)),
        ([1, 1, 1, 0], common::q(1, 1)),
        ([0, 3, 0, 1], k.clone()),
        ([0, 0, 3, 1], k),
        ([0, 1, 1, 3], common::q(1, 108)),
        ([0, 0, 0, 7], common::q(1, 272160)),
    ];
    for (e, c) in &checks {
        ensure(f.coeff(e) == *c, || format!("coefficient of {e:?}"))?;
    }
    Ok(format!(
        "{} small-phase monomials up to degree 35/6, {} nonzero, exact match in {:.2?}",
        common::d4_small_phase_targets().len(),
        f.len(),
        start.elapsed()
    ))
}

fn coordinate_forms() -> Outcome {
    let d = common::d4();
    let f = d4_potential()?;
    let mut notes = Vec::new();
    for (form, mono, want) in [
        (PotentialForm::Dubrovin, [0, 0, 0, 7], common::q(54, 35)),
        (PotentialForm::Fjrw, [0, 0, 0, 7], common::q(1, 1632960)),
    ] {
        let g = ts::transform_potential(d, &f, form).map_err(|e| e.to_string())?;
        let reference = ts::d4_reference(d, form).unwrap();
        ensure(g == reference, || format!("{} form differs by {}", form.name(), g.sub(&reference)))?;
        ensure(g.coeff(&mono) == want, || format!("{} top coefficient", form.name()))?;
        notes.push(format!("{} exact ({} terms)", form.name(), g.len()));
    }
    Ok(notes.join(", "))
}

fn a1_oracle() -> Outcome {
    let e = common::a1_engine();
    let cal = virasoro::virasoro_compare(e, 5, 9).map_err(|e| e.to_string())?;
    ensure(cal.passed(), || format!("term mismatches: {:?}", cal.mismatches))?;
    ensure(cal.constant_m1 == rat(1, 16), || format!("constant term {}", cal.constant_m1))?;
    let tau = virasoro::recalibrate(common::a1_tau(), &cal.gamma).map_err(|e| e.to_string())?;
    let residuals = virasoro::virasoro_residuals(&tau, 9, 4);
    ensure(residuals.is_empty(), || format!("L_m residuals {residuals:?}"))?;
    let oracle = virasoro::solve_virasoro(9).map_err(|e| e.to_string())?;
    for m in virasoro::a1_monomials(9) {
        let got = tau.get(&m).cloned().unwrap_or_default();
        let want = oracle.get(&m).cloned().unwrap_or_default();
        ensure(got == want, || format!("τ at {} is {got}, recursion gives {want}", ts::format_monomial(&m)))?;
    }
    let log = virasoro::log_rational(&tau);
    ensure(log.get(&vec![(0, 0); 3]) == Some(&rat(1, 6)), || "(t^{1,0})³ coefficient".into())?;
    ensure(log.get(&vec![(0, 1)]) == Some(&rat(1, 24)), || "t^{1,1} coefficient".into())?;
    Ok(format!(
        "{} operator terms match for m ≤ 5 (γ = ρ = 1), constant 1/16, L_-1..L_4 annihilate τ, log gives 1/6 and 1/24",
        cal.compared_terms
    ))
}

fn generator_verification() -> Outcome {
    let d = common::d4();
    let raw = fock::d4_printed_generators(d).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for (i, w) in raw.iter().enumerate() {
        let v = fock::verify_in_w(d, w).map_err(|e| e.to_string())?;
        if !v.passed() {
            let sizes: Vec<usize> = v.residuals.iter().map(|r| r.len()).collect();
            report.push(format!("printed w_{} fails screening (residual terms per root {:?})", i + 1, sizes));
        }
    }
    let set = common::d4_generators();
    let degrees: Vec<u32> = set.generators.iter().map(|w| w.homogeneous_degree().unwrap_or(0)).collect();
    ensure(degrees == [2, 4, 4, 6], || format!("degrees {degrees:?}"))?;
    for (i, w) in set.generators.iter().enumerate() {
        let v = fock::verify_in_w(d, w).map_err(|e| e.to_string())?;
        ensure(v.passed(), || format!("resolved w_{} is not in W", i + 1))?;
    }
    for (i, s) in &set.replaced {
        ensure(*s == Strategy::KernelSolve, || "replacement is not from kernel_solve".into())?;
        report.push(format!("w_{} replaced by the kernel_solve generator", i + 1));
    }
    let kernel = fock::w_generators(d, Strategy::KernelSolve).map_err(|e| e.to_string())?;
    for w in &kernel {
        ensure(fock::verify_in_w(d, w).map_err(|e| e.to_string())?.passed(), || "kernel generator fails".into())?;
    }
    report.push("verified degrees 2,4,4,6".into());
    Ok(report.join("; "))
}

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

fn structural_suites() -> Outcome {
    let mut done = Vec::new();
    for name in ["A1", "A2", "A3", "D4", "D5", "E6"] {
        let d = common::datum(name);
        let roots = d.roots();
        for r in &roots {
            let a = LatticeVector::root(r);
            let n: i64 = (0..d.rank()).flat_map(|i| (0..d.rank()).map(move |j| (i, j))).map(|(i, j)| r[i] * d.cartan[i][j] * r[j]).sum();
            let want = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            ensure(d.epsilon(&a, &a).unwrap() == want, || format!("{name}: ε diagonal at {r:?}"))?;
        }
        if roots.len() <= 24 {
            for x in &roots {
                for y in &roots {
                    let s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                    for z in &roots {
                        let e = |a: &[i64], b: &[i64]| d.epsilon(&LatticeVector::root(a), &LatticeVector::root(b)).unwrap();
                        ensure(e(&s, z) == e(x, z) * e(y, z) && e(z, &s) == e(z, x) * e(z, y), || {
                            format!("{name}: ε not bimultiplicative at {x:?},{y:?},{z:?}")
                        })?;
                    }
                }
            }
        }
        let l = d.rank();
        let id: Vec<Vec<i64>> = (0..l).map(|i| (0..l).map(|j| (i == j) as i64).collect()).collect();
        let mut p = id.clone();
        for k in 1..=d.h {
            p = (0..l).map(|i| (0..l).map(|j| (0..l).map(|t| p[i][t] * d.sigma[t][j]).sum()).collect()).collect();
            ensure((p == id) == (k == d.h), || format!("{name}: σ^{k}"))?;
        }
        for j in 0..l {
            let zeta = CycScalar::zeta(d.conductor, (d.conductor / d.h * d.exponents[j]) as i64);
            for r in 0..l {
                let mut acc = CycScalar::zero();
                for c in 0..l {
                    acc += &(&CycScalar::from_int(d.sigma[r][c]) * &d.eigvecs[j][c]);
                }
                ensure(acc == &zeta * &d.eigvecs[j][r], || format!("{name}: eigenvalue of φ^{}", j + 1))?;
            }
        }
        for i in 0..l {
            ensure(closed_form_coeff(&d.exponent_ratio(i), 1).is_zero(), || format!("{name}: s^-1 term"))?;
            for j in 0..l {
                for k in 0..=10 {
                    let want = if d.eta(i, j) { closed_form_coeff(&d.exponent_ratio(i), k + 2) } else { Rational::zero() };
                    ensure(twist::propagator_coeff(&d, i, j, k) == want, || format!("{name}: P^{{{},{}}}_{k}", i + 1, j + 1))?;
                }
            }
        }
    }
    done.push("ε laws, σ order and spectrum, propagator series to k = 10 with no s⁻¹ term".to_string());

    let d4 = common::d4();
    let h = d4.h as i64;
    for (i, w) in common::d4_generators().generators.iter().enumerate() {
        let terms = twist::wick_expand(d4, w, 12, 12);
        ensure(terms.iter().all(|(lam, _)| lam.rem_euclid(h) == 0), || format!("w_{} has fractional λ-powers", i + 1))?;
    }
    ensure(
        twist::wick_expand(d4, &FockElement::gen(0, 1), 12, 12).iter().any(|(lam, _)| lam.rem_euclid(h) != 0),
        || "control input shows no fractional powers".into(),
    )?;
    done.push("integral λ-powers for w_1..w_4".into());

    let engines: [(&OperatorEngine, u32, i64); 2] = [(common::a1_engine(), 5, 9), (common::d4_engine(), 2, 36)];
    for (e, max_m, window) in engines {
        let d = e.datum();
        for i in 0..d.rank() {
            let mi = d.exponents[i] as i64;
            for m in 0..=max_m {
                let op = e.operator(i, m, window).map_err(|e| e.to_string())?;
                for t in &op.terms {
                    ensure(t.degree(d) == d.h as i64 * (mi - m as i64), || format!("W_{{{},{m}}} not homogeneous", i + 1))?;
                }
                ensure(op.dilaton_depths().keys().all(|&k| k as i64 <= mi), || format!("W_{{{},{m}}} depth", i + 1))?;
                let top: Vec<_> =
                    op.terms.iter().filter(|t| t.creations.iter().filter(|&&v| v == DILATON).count() as i64 == mi).collect();
                ensure(
                    top.len() == 1 && top[0].annihilations == vec![(i as u16, m as u16)] && top[0].creations.len() as i64 == mi,
                    || format!("W_{{{},{m}}} top piece is not c·∂", i + 1),
                )?;
                let a = d.exponent_ratio(i);
                let mut want = num_traits::pow(rat_int(d.h as i64), mi as usize);
                for k in 0..=m {
                    want *= &a + rat_int(k as i64);
                }
                ensure(!op.c_leading.is_zero() && op.c_leading == CycScalar::from_rational(&want), || {
                    format!("c_{{{},{m}}} = {} but the Γ formula gives {want}", i + 1, op.c_leading)
                })?;
            }
        }
    }
    done.push("homogeneity, depth ≤ m_i, c_{i,m} Γ formula (A1 m ≤ 5, D4 m ≤ 2)".into());
    Ok(done.join("; "))
}

fn perturbations_for(e: &OperatorEngine, tau: &ts::TauSeries, literal_every: usize) -> Result<(usize, usize), String> {
    let pairs = ts::constraint_pairs(e.datum(), tau.truncation);
    let escaped = ts::undetected_perturbations(e, tau, &pairs);
    ensure(escaped.is_empty(), || format!("undetected: {:?}", escaped.iter().map(|m| ts::format_monomial(m)).collect::<Vec<_>>()))?;
    let keys: Vec<_> = tau.coeffs.keys().filter(|m| !m.is_empty()).cloned().collect();
    let mut literal = 0;
    for m in keys.iter().step_by(literal_every) {
        let mut bumped = tau.clone();
        *bumped.coeffs.get_mut(m).unwrap() += &CycScalar::one();
        let r = ts::consistency_check(e, &bumped, &pairs).map_err(|e| e.to_string())?;
        ensure(!r.passed(), || format!("perturbing {} went unnoticed", ts::format_monomial(m)))?;
        literal += 1;
    }
    Ok((keys.len(), literal))
}

fn uniqueness() -> Outcome {
    let (a_all, a_lit) = perturbations_for(common::a1_engine(), common::a1_tau(), 1)?;
    let (d_all, d_lit) = perturbations_for(common::d4_engine(), common::d4_tau(), 8)?;
    Ok(format!(
        "A1: all {a_all} coefficients detected, {a_lit} perturbed literally; D4: all {d_all} detected by linearity, {d_lit} perturbed literally"
    ))
}

fn consistency() -> Outcome {
    let mut out = Vec::new();
    for (name, e, tau) in [("A1", common::a1_engine(), common::a1_tau()), ("D4", common::d4_engine(), common::d4_tau())] {
        let r = ts::consistency_check(e, tau, &ts::constraint_pairs(e.datum(), tau.truncation)).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{name}: {} nonzero residuals of {}", r.nonzero.len(), r.equations))?;
        out.push(format!("{name}: {} equations all zero", r.equations));
    }
    Ok(out.join(", "))
}

fn genus_and_wdvv() -> Outcome {
    let mut out = Vec::new();
    let d4_deep = ts::solve_frontier(common::d4_engine(), 30).map_err(|e| e.to_string())?;
    for (name, d, tau) in [("A1 to 9/2", common::a1(), common::a1_tau()), ("D4 to 5", common::d4(), &d4_deep)] {
        let log = ts::log_series(d, tau).map_err(|e| e.to_string())?;
        for (m, (_, g)) in &log.coeffs {
            let again = ts::genus_of(d, m).map_err(|e| e.to_string())?;
            ensure(again == *g, || format!("{name}: genus tag of {}", ts::format_monomial(m)))?;
        }
        out.push(format!("{name}: {} log coefficients with integer genus", log.coeffs.len()));
    }
    let f = d4_potential()?;
    ensure(ts::wdvv_check(&f).unwrap_or(false), || "D4 potential fails WDVV".into())?;
    ensure(ts::quasi_homogeneous(common::d4(), &f), || "D4 potential not quasi-homogeneous".into())?;
    let a2: RootDatum = common::datum("A2");
    let gens = fock::resolve_generators(&a2, Strategy::KernelSolve).map_err(|e| e.to_string())?;
    let e = OperatorEngine::new(&a2, &gens.generators);
    let targets: Vec<_> = ts::monomials_by_degree(&a2, 12)
        .into_iter()
        .flatten()
        .filter(|m| !m.is_empty() && m.iter().all(|v| v.1 == 0))
        .collect();
    let tau = ts::solve_tau(&e, 12, SolveMode::GoalDirected, &targets).map_err(|e| e.to_string())?;
    let fa2 = ts::frobenius_potential(&a2, &ts::log_series(&a2, &tau).map_err(|e| e.to_string())?);
    ensure(!fa2.is_zero() && ts::wdvv_check(&fa2).unwrap_or(false), || "A2 potential fails WDVV".into())?;
    ensure(ts::quasi_homogeneous(&a2, &fa2), || "A2 potential not quasi-homogeneous".into())?;
    out.push(format!("D4 and A2 (F = {fa2}) potentials satisfy WDVV and quasi-homogeneity"));
    Ok(out.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("D4 potential reproduction", potential_reproduction),
        ("coordinate forms", coordinate_forms),
        ("A1 oracle equivalence", a1_oracle),
        ("generator verification", generator_verification),
        ("structural invariant suites", structural_suites),
        ("uniqueness under perturbation", uniqueness),
        ("consistency of the overdetermined system", consistency),
        ("genus and WDVV properties", genus_and_wdvv),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} [{:.1?}]: {detail}", k + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} [{:.1?}]: {why}", k + 1, start.elapsed());
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
