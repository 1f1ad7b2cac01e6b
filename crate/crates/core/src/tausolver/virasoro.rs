//! Closed-form Virasoro operators of two-dimensional gravity (the A1 case),
//! an independent recursion solving them, and the calibration that matches
//! them with the vertex-constructed W_{1,m}.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numfield::{rat, rat_int, Rational};
use crate::twist::{OperatorEngine, Var, VarMonomial, DILATON};

use super::{format_monomial, TauSeries};

/// c · Π t^{mult} · Π ∂/∂t^{diff}, variables written as (0, p) for t^p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffTerm {
    pub coeff: Rational,
    pub mult: VarMonomial,
    pub diff: VarMonomial,
}

/// L_m of two-dimensional gravity, with multiplication terms t^p kept for
/// p ≤ `max_p`.
#[derive(Clone, Debug)]
pub struct VirasoroOperator {
    pub m: i32,
    pub terms: Vec<DiffTerm>,
}

/// (2k−1)!! with (−1)!! = 1.
pub fn double_factorial_odd(k: i64) -> Rational {
    let mut acc = Rational::one();
    let mut j = 2 * k - 1;
    while j > 1 {
        acc *= rat_int(j);
        j -= 2;
    }
    acc
}

/// c_m = (2m+3)!!/2^{m+1}.
pub fn leading_constant(m: i32) -> Rational {
    double_factorial_odd(m as i64 + 2) / pow2(m as i64 + 1)
}

fn pow2(k: i64) -> Rational {
    if k >= 0 {
        rat_int(1i64 << k)
    } else {
        rat(1, 1i64 << (-k))
    }
}

fn t(p: i64) -> Var {
    (0, p as u16)
}

pub fn virasoro_operator(m: i32, max_p: u16) -> VirasoroOperator {
    let mut terms = Vec::new();
    let m64 = m as i64;
    if m == -1 {
        for p in 0..max_p as i64 {
            terms.push(DiffTerm { coeff: Rational::one(), mult: vec![t(p + 1)], diff: vec![t(p)] });
        }
        terms.push(DiffTerm { coeff: rat(1, 2), mult: vec![t(0), t(0)], diff: vec![] });
        terms.push(DiffTerm { coeff: -Rational::one(), mult: vec![], diff: vec![t(0)] });
        return VirasoroOperator { m, terms };
    }
    let scale = pow2(m64 + 1);
    for p in 0..m64 {
        let q = m64 - 1 - p;
        if p > q {
            break;
        }
        let mut c = double_factorial_odd(p + 1) * double_factorial_odd(q + 1) / &scale;
        if p == q {
            c /= rat_int(2);
        }
        terms.push(DiffTerm { coeff: c, mult: vec![], diff: vec![t(p), t(q)] });
    }
    for p in 0..=max_p as i64 {
        let c = double_factorial_odd(p + m64 + 1) / (&scale * double_factorial_odd(p));
        terms.push(DiffTerm { coeff: c.clone(), mult: vec![t(p)], diff: vec![t(p + m64)] });
        if p == 1 {
            terms.push(DiffTerm { coeff: -c, mult: vec![], diff: vec![t(p + m64)] });
        }
    }
    if m == 0 {
        terms.push(DiffTerm { coeff: rat(1, 16), mult: vec![], diff: vec![] });
    }
    VirasoroOperator { m, terms }
}

fn deg_num(m: &[Var]) -> i64 {
    m.iter().map(|&(_, p)| 2 * p as i64 + 1).sum()
}

fn sub_multiset(n: &[Var], c: &[Var]) -> Option<VarMonomial> {
    let mut rest = n.to_vec();
    for v in c {
        let k = rest.iter().position(|x| x == v)?;
        rest.remove(k);
    }
    Some(rest)
}

/// The coefficient of t^N in L τ as a linear form in the coefficients of τ.
pub fn diff_row(terms: &[DiffTerm], n: &[Var]) -> BTreeMap<VarMonomial, Rational> {
    let mut row: BTreeMap<VarMonomial, Rational> = BTreeMap::new();
    for term in terms {
        let Some(rest) = sub_multiset(n, &term.mult) else { continue };
        let mut min = rest;
        min.extend_from_slice(&term.diff);
        min.sort_unstable();
        let mut c = term.coeff.clone();
        let mut k = 0;
        while k < term.diff.len() {
            let v = term.diff[k];
            let run = term.diff[k..].iter().take_while(|&&x| x == v).count();
            let mult = min.iter().filter(|&&x| x == v).count();
            for j in 0..run {
                c *= rat_int((mult - j) as i64);
            }
            k += run;
        }
        *row.entry(min).or_insert_with(Rational::zero) += c;
    }
    row.retain(|_, c| !c.is_zero());
    row
}

/// Monomials in t^0, t^1, … with Σ(2p+1) ≤ `max`, in increasing degree.
pub fn a1_monomials(max: i64) -> Vec<VarMonomial> {
    let mut out = Vec::new();
    if max < 0 {
        return out;
    }
    fn rec(start: i64, left: i64, cur: &mut Vec<Var>, out: &mut Vec<VarMonomial>) {
        out.push(cur.clone());
        let mut p = start;
        while 2 * p < left {
            cur.push(t(p));
            rec(p, left - 2 * p - 1, cur, out);
            cur.pop();
            p += 1;
        }
    }
    rec(0, max, &mut Vec::new(), &mut out);
    out.sort_by_key(|m| (deg_num(m), m.clone()));
    out
}

/// Solves L_m τ = 0 with τ(0) = 1 by the recursion on the lowest-degree
/// term c_m ∂τ/∂t^{m+1} (pivot: the largest p in each monomial).
pub fn solve_virasoro(max: i64) -> Result<BTreeMap<VarMonomial, Rational>> {
    let mut tau: BTreeMap<VarMonomial, Rational> = BTreeMap::new();
    tau.insert(Vec::new(), Rational::one());
    let max_p = (max / 2) as u16 + 1;
    let mut ops: BTreeMap<i32, VirasoroOperator> = BTreeMap::new();
    for m in a1_monomials(max).into_iter().skip(1) {
        let p = m.iter().map(|v| v.1).max().expect("nonempty") as i32;
        let op = ops.entry(p - 1).or_insert_with(|| virasoro_operator(p - 1, max_p));
        let mut n = m.clone();
        let k = n.iter().position(|v| v.1 as i32 == p).expect("pivot factor");
        n.remove(k);
        let mut row = diff_row(&op.terms, &n);
        let pivot = row.remove(&m).unwrap_or_default();
        if pivot.is_zero() {
            return Err(Error::Solver(format!("Virasoro recursion: zero pivot at {}", format_monomial(&m))));
        }
        let mut acc = Rational::zero();
        for (dep, c) in &row {
            if deg_num(dep) >= deg_num(&m) {
                return Err(Error::Solver(format!(
                    "Virasoro recursion: {} depends on {}",
                    format_monomial(&m),
                    format_monomial(dep)
                )));
            }
            acc += c * tau.get(dep).cloned().unwrap_or_default();
        }
        tau.insert(m, -acc / pivot);
    }
    Ok(tau)
}

/// Outcome of matching ρ_m W_{1,m} against L_{m−1} under t^p = γ_p t^{1,p}.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub gamma: Vec<Rational>,
    pub rho: Vec<Rational>,
    pub compared_terms: usize,
    pub mismatches: Vec<String>,
    /// Constant term of ρ_1 W_{1,1}.
    pub constant_m1: Rational,
}

impl Calibration {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// W_{1,m} rewritten in the shifted variables t^{1,p}, keyed by
/// (multiplications, derivatives), keeping multiplication degree ≤ `window`.
pub fn shifted_w_terms(engine: &OperatorEngine, m: u32, window: i64) -> Result<BTreeMap<(VarMonomial, VarMonomial), Rational>> {
    let d = engine.datum();
    let extra = d.exponents[0] as i64 * (d.h as i64 + 1);
    let op = engine.operator(0, m, window + extra)?;
    let mut out: BTreeMap<(VarMonomial, VarMonomial), Rational> = BTreeMap::new();
    for term in &op.terms {
        let c = term.coeff.to_rational().ok_or_else(|| Error::Unsupported("A1 operator with irrational coefficient".into()))?;
        let dil = term.creations.iter().filter(|&&v| v == DILATON).count();
        let others: Vec<Var> = term.creations.iter().copied().filter(|&v| v != DILATON).collect();
        // (t − 1)^dil = Σ_e C(dil, e) (−1)^e t^{dil−e}
        let mut binom = Rational::one();
        for e in 0..=dil {
            if e > 0 {
                binom = binom * rat_int((dil - e + 1) as i64) / rat_int(e as i64);
            }
            let sign = if e % 2 == 0 { Rational::one() } else { -Rational::one() };
            let mut mult = others.clone();
            mult.extend(std::iter::repeat_n(DILATON, dil - e));
            mult.sort_unstable();
            if deg_num(&mult) > window {
                continue;
            }
            *out.entry((mult, term.annihilations.clone())).or_insert_with(Rational::zero) += &c * &binom * sign;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// Exact rational cube root, if one exists.
fn rational_cbrt(r: &Rational) -> Option<Rational> {
    let root = |n: &BigInt| -> Option<BigInt> {
        let a = n.abs().cbrt();
        let a = if n.is_negative() { -a } else { a };
        (&a * &a * &a == *n).then_some(a)
    };
    Some(Rational::new(root(r.numer())?, root(r.denom())?))
}

/// Computes the diagonal rescaling and per-operator scalars from the
/// single-derivative terms, then verifies every term for m = 0..=`max_m`.
pub fn virasoro_compare(engine: &OperatorEngine, max_m: u32, window: i64) -> Result<Calibration> {
    let d = engine.datum();
    if d.rank() != 1 {
        return Err(Error::Unsupported("the Virasoro comparison applies to A1 only".into()));
    }
    let max_p = ((window - 1) / 2) as u16;
    let ws: Vec<_> = (0..=max_m).map(|m| shifted_w_terms(engine, m, window)).collect::<Result<_>>()?;
    let ls: Vec<BTreeMap<(VarMonomial, VarMonomial), Rational>> = (0..=max_m)
        .map(|m| {
            let mut map = BTreeMap::new();
            for term in virasoro_operator(m as i32 - 1, max_p).terms {
                if deg_num(&term.mult) <= window {
                    *map.entry((term.mult, term.diff)).or_insert_with(Rational::zero) += term.coeff;
                }
            }
            map.retain(|_, c: &mut Rational| !c.is_zero());
            map
        })
        .collect();
    let get = |map: &BTreeMap<(VarMonomial, VarMonomial), Rational>, mult: Vec<Var>, diff: Vec<Var>| {
        map.get(&(mult, diff)).cloned().unwrap_or_default()
    };
    let fail = |what: String| Error::Solver(format!("Virasoro calibration: {what}"));
    // ρ_m γ_m from the constant·∂_{t^m} term
    let mut k = Vec::new();
    for m in 0..=max_m as usize {
        let w0 = get(&ws[m], vec![], vec![t(m as i64)]);
        let l0 = get(&ls[m], vec![], vec![t(m as i64)]);
        if w0.is_zero() {
            return Err(fail(format!("W_(1,{m}) has no constant derivative term")));
        }
        k.push(l0 / w0);
    }
    let wq = get(&ws[0], vec![t(0), t(0)], vec![]);
    let lq = get(&ls[0], vec![t(0), t(0)], vec![]);
    if wq.is_zero() {
        return Err(fail("W_(1,0) has no quadratic term".into()));
    }
    // ρ_0 wq / γ_0² = lq and ρ_0 γ_0 = k_0
    let g0 = rational_cbrt(&(&k[0] * &wq / &lq)).ok_or_else(|| fail("γ_0 is not rational".into()))?;
    let rho0 = &k[0] / &g0;
    // γ_{p+1} from ρ_0 a_p γ_p / γ_{p+1} = l_p on t^{p+1}∂_p; derivatives
    // reach index max_p + max_m, so the chain uses a wider W_(1,0)
    let top = max_p as i64 + max_m as i64 + 1;
    let wide = shifted_w_terms(engine, 0, 2 * top + 1)?;
    let lwide = virasoro_operator(-1, top as u16);
    let mut gamma = vec![g0];
    for p in 0..top {
        let a = get(&wide, vec![t(p + 1)], vec![t(p)]);
        let l = lwide
            .terms
            .iter()
            .find(|x| x.mult == vec![t(p + 1)] && x.diff == vec![t(p)])
            .map(|x| x.coeff.clone())
            .unwrap_or_default();
        if a.is_zero() || l.is_zero() {
            return Err(fail(format!("W_(1,0) lacks t^(1,{}) d/dt^(1,{p})", p + 1)));
        }
        let next = &rho0 * &a * &gamma[p as usize] / &l;
        gamma.push(next);
    }
    let gamma_of = |v: &Var| -> Option<Rational> { gamma.get(v.1 as usize).cloned() };
    let mut rho = vec![rho0];
    for m in 1..=max_m as usize {
        let g = gamma_of(&t(m as i64)).ok_or_else(|| fail(format!("γ_{m} outside the window")))?;
        rho.push(&k[m] / g);
    }
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for m in 0..=max_m as usize {
        let mut keys: Vec<&(VarMonomial, VarMonomial)> = ws[m].keys().chain(ls[m].keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let (mult, diff) = key;
            // Π_{b ∈ diff} γ_b / Π_{a ∈ mult} γ_a
            let mut factor = rho[m].clone();
            let mut known = true;
            for v in diff {
                match gamma_of(v) {
                    Some(g) => factor *= g,
                    None => known = false,
                }
            }
            for v in mult {
                match gamma_of(v) {
                    Some(g) => factor /= g,
                    None => known = false,
                }
            }
            if !known {
                continue;
            }
            compared += 1;
            let w = ws[m].get(key).cloned().unwrap_or_default() * &factor;
            let l = ls[m].get(key).cloned().unwrap_or_default();
            if w != l {
                mismatches.push(format!(
                    "m={m}: term {} d[{}]: calibrated W gives {w}, L_{} gives {l}",
                    format_monomial(mult),
                    format_monomial(diff),
                    m as i32 - 1
                ));
            }
        }
    }
    let constant_m1 = if max_m >= 1 { get(&ws[1], vec![], vec![]) * &rho[1] } else { Rational::zero() };
    Ok(Calibration { gamma, rho, compared_terms: compared, mismatches, constant_m1 })
}

/// τ in Witten's variables: the coefficient of Π t^{a} is c_M / Π γ_a.
pub fn recalibrate(tau: &TauSeries, gamma: &[Rational]) -> Result<BTreeMap<VarMonomial, Rational>> {
    let mut out = BTreeMap::new();
    for (m, c) in &tau.coeffs {
        let c = c.to_rational().ok_or_else(|| Error::Unsupported("A1 τ with irrational coefficient".into()))?;
        let mut v = c;
        for f in m {
            let g = gamma.get(f.1 as usize).ok_or_else(|| Error::Solver("γ outside calibrated range".into()))?;
            v /= g;
        }
        out.insert(m.clone(), v);
    }
    Ok(out)
}

/// Residuals of L_m τ = 0 (m = −1..=max_m) at every monomial whose value is
/// determined within the truncation `max` (Σ(2p+1) units). The dilaton
/// term −c_m ∂/∂t^{m+1} reaches furthest, raising the degree by 2m + 3.
pub fn virasoro_residuals(tau: &BTreeMap<VarMonomial, Rational>, max: i64, max_m: i32) -> Vec<String> {
    let mut bad = Vec::new();
    let max_p = (max / 2) as u16 + 1;
    for m in -1..=max_m {
        let op = virasoro_operator(m, max_p);
        for n in a1_monomials(max - 2 * m as i64 - 3) {
            let row = diff_row(&op.terms, &n);
            let mut acc = Rational::zero();
            for (dep, c) in &row {
                acc += c * tau.get(dep).cloned().unwrap_or_default();
            }
            if !acc.is_zero() {
                bad.push(format!("L_{m} at {}: {acc}", format_monomial(&n)));
            }
        }
    }
    bad
}

/// Formal logarithm of an A1 series in Witten's variables.
pub fn log_rational(tau: &BTreeMap<VarMonomial, Rational>) -> BTreeMap<VarMonomial, Rational> {
    let mut keys: Vec<&VarMonomial> = tau.keys().filter(|m| !m.is_empty()).collect();
    keys.sort_by_key(|m| (deg_num(m), (*m).clone()));
    let mut f: BTreeMap<VarMonomial, Rational> = BTreeMap::new();
    for m in keys {
        let dm = deg_num(m);
        let mut acc = &tau[m] * rat_int(dm);
        for (a, b) in super::proper_divisors(m) {
            if let (Some(fa), Some(tb)) = (f.get(&a), tau.get(&b)) {
                acc -= fa * tb * rat_int(deg_num(&a));
            }
        }
        f.insert(m.clone(), acc / rat_int(dm));
    }
    f.retain(|_, c| !c.is_zero());
    f
}
