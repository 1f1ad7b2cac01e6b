//! The twisted module M = ℂ[q^{i,p}]: fractional-mode bosons, the
//! propagator, Wick expansion of Y^M(w, λ) and the W operators
//! W_{i,m} = Res_λ λ^m Y^M(w_i, λ).
//!
//! All λ-exponents and degrees are kept as integer numerators over h.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockElement;
use crate::numfield::{rat_int, CycScalar, Rational};
use crate::rootdata::RootDatum;

/// A variable q^{i,p} (or t^{i,p}) with 0-based `i`.
pub type Var = (u16, u16);

/// Sorted multiset of variables.
pub type VarMonomial = Vec<Var>;

/// The dilaton variable q^{1,1}.
pub const DILATON: Var = (0, 1);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Γ(x+p+1)/Γ(x) for `Up`, Γ(x)/Γ(x+p) for `Down`.
pub fn gamma_ratio(x: &Rational, p: u32, dir: Direction) -> Rational {
    match dir {
        Direction::Up => (0..=p).fold(Rational::one(), |acc, k| acc * (x + rat_int(k as i64))),
        Direction::Down => {
            let prod = (0..p).fold(Rational::one(), |acc, k| acc * (x + rat_int(k as i64)));
            prod.recip()
        }
    }
}

/// Generalized binomial coefficient x(x-1)⋯(x-k+1)/k!.
pub fn binomial(x: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * (x - rat_int(i as i64)) / rat_int(i as i64 + 1);
    }
    acc
}

fn falling(x: &Rational, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * (x - rat_int(i as i64)))
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * rat_int(k as i64))
}

/// Coefficient of λ^{-k-2} in P_k^{ij}(λ).
pub fn propagator_coeff(datum: &RootDatum, i: usize, j: usize, k: u32) -> Rational {
    if !datum.eta(i, j) {
        return Rational::zero();
    }
    propagator_scalar(&datum.exponent_ratio(i), k)
}

fn propagator_scalar(a: &Rational, k: u32) -> Rational {
    let sign = if k % 2 == 0 { Rational::one() } else { -Rational::one() };
    sign * (Rational::one() - a) * gamma_ratio(a, k, Direction::Up)
        / (factorial(k) * rat_int(k as i64 + 2))
}

/// Contraction of ∂^{(k_o)}Y^M(φ^i t^{-1}, ·) with ∂^{(k_in)}Y^M(φ^j t^{-1}, λ)
/// inside Y^M(φ^i t^{-k_o-1} φ^j t^{-k_in-1}, λ), where `a` = m_i/h and
/// φ^j is dual to φ^i. The result multiplies λ^{-k_o-k_in-2}.
///
/// This is the s^{k_o} coefficient of ∂_λ^{(k_in)} applied (at fixed μ) to
/// the regular part Σ_n P_n(λ)(μ-λ)^n of the two-point function.
pub fn contraction_coeff(a: &Rational, k_o: u32, k_in: u32) -> Rational {
    let mut acc = Rational::zero();
    for t in 0..=k_in {
        let n = k_o + t;
        let sign = if t % 2 == 0 { Rational::one() } else { -Rational::one() };
        let term = binomial(&rat_int(k_in as i64), t)
            * sign
            * falling(&rat_int(n as i64), t)
            * falling(&rat_int(-(n as i64) - 2), k_in - t)
            * propagator_scalar(a, n);
        acc += term;
    }
    acc / factorial(k_in)
}

/// Normal-ordered term: coefficient · ∏ q^{creations} · ∏ ∂/∂q^{annihilations}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub coeff: CycScalar,
    pub creations: VarMonomial,
    pub annihilations: VarMonomial,
}

/// deg q^{i,p} = p + m_i/h, as a numerator over h.
pub fn var_degree(datum: &RootDatum, v: Var) -> i64 {
    datum.h as i64 * v.1 as i64 + datum.exponents[v.0 as usize] as i64
}

pub fn monomial_degree(datum: &RootDatum, m: &[Var]) -> i64 {
    m.iter().map(|&v| var_degree(datum, v)).sum()
}

impl OperatorTerm {
    /// Σ_cre deg − Σ_ann deg (numerator over h).
    pub fn degree(&self, datum: &RootDatum) -> i64 {
        monomial_degree(datum, &self.creations) - monomial_degree(datum, &self.annihilations)
    }
}

/// A contraction pattern of one Fock monomial: the product of its pair
/// contractions and the list of fields left uncontracted.
#[derive(Clone, Debug)]
struct WickForm {
    coeff: CycScalar,
    /// λ-exponent numerator contributed by the contractions.
    pair_exp: i64,
    /// Uncontracted fields as (j, k) = ∂^{(k)}Y^M(φ^j t^{-1}).
    unpaired: Vec<(u16, u16)>,
}

fn wick_forms(datum: &RootDatum, w: &FockElement) -> Vec<WickForm> {
    let h = datum.h as i64;
    let mut merged: BTreeMap<(Vec<(u16, u16)>, i64), CycScalar> = BTreeMap::new();
    for (mono, c) in w.terms() {
        let factors: Vec<(u16, u16)> = mono.iter().map(|&(j, n)| (j, n - 1)).collect();
        let mut used = vec![false; factors.len()];
        let mut out = Vec::new();
        matchings(datum, &factors, &mut used, Rational::one(), 0, &mut out);
        for (coef, exp, unpaired) in out {
            if coef.is_zero() {
                continue;
            }
            let key = (unpaired, -h * exp);
            let add = c * &CycScalar::from_rational(&coef);
            let e = merged.entry(key).or_default();
            *e = &*e + &add;
        }
    }
    merged
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((unpaired, pair_exp), coeff)| WickForm { coeff, pair_exp, unpaired })
        .collect()
}

/// Enumerates partial matchings; `exp` accumulates Σ (k_o + k_in + 2).
fn matchings(
    datum: &RootDatum,
    f: &[(u16, u16)],
    used: &mut [bool],
    coef: Rational,
    exp: i64,
    out: &mut Vec<(Rational, i64, Vec<(u16, u16)>)>,
) {
    let Some(i) = (0..f.len()).find(|&i| !used[i]) else {
        // every factor is either paired or marked as left open
        out.push((coef, exp, Vec::new()));
        return;
    };
    used[i] = true;
    // leave factor i open
    let mut rest = Vec::new();
    matchings(datum, f, used, coef.clone(), exp, &mut rest);
    for (c, e, mut u) in rest {
        u.push(f[i]);
        u.sort_unstable();
        out.push((c, e, u));
    }
    for j in i + 1..f.len() {
        if used[j] || !datum.eta(f[i].0 as usize, f[j].0 as usize) {
            continue;
        }
        used[j] = true;
        let a = datum.exponent_ratio(f[i].0 as usize);
        let c = &coef * contraction_coeff(&a, f[i].1 as u32, f[j].1 as u32);
        matchings(datum, f, used, c, exp + f[i].1 as i64 + f[j].1 as i64 + 2, out);
        used[j] = false;
    }
    used[i] = false;
}

type TermList = Arc<Vec<(VarMonomial, CycScalar)>>;

/// Memoized evaluation of W_{i,m} restricted to a prescribed creation part.
pub struct OperatorEngine {
    datum: RootDatum,
    generators: Vec<FockElement>,
    forms: Vec<Vec<WickForm>>,
    cache: RwLock<HashMap<(usize, u32, VarMonomial), TermList>>,
}

impl fmt::Debug for OperatorEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorEngine").field("kind", &self.datum.kind).finish()
    }
}

impl OperatorEngine {
    pub fn new(datum: &RootDatum, generators: &[FockElement]) -> Self {
        let forms = generators.iter().map(|w| wick_forms(datum, w)).collect();
        OperatorEngine {
            datum: datum.clone(),
            generators: generators.to_vec(),
            forms,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn generators(&self) -> &[FockElement] {
        &self.generators
    }

    /// Largest number of bosons in any term of W_{i,·}.
    pub fn max_bosons(&self, i: usize) -> usize {
        self.forms[i].iter().map(|f| f.unpaired.len()).max().unwrap_or(0)
    }

    /// All terms of W_{i,m} whose creation part is exactly `q` (sorted),
    /// as (annihilation multiset, coefficient).
    pub fn terms_with_creation(&self, i: usize, m: u32, q: &[Var]) -> TermList {
        let key = (i, m, q.to_vec());
        if let Some(t) = self.cache.read().unwrap().get(&key) {
            return t.clone();
        }
        let list = Arc::new(expand_terms(&self.datum, q, &self.forms[i], -(self.datum.h as i64) * (m as i64 + 1)));
        self.cache.write().unwrap().insert(key, list.clone());
        list
    }

    /// Coefficient operator at an arbitrary λ-exponent numerator `lam`:
    /// terms of Y^M(w_i, λ) at λ^{lam/h} with creation part `q`.
    pub fn terms_at_exponent(&self, i: usize, lam: i64, q: &[Var]) -> Vec<(VarMonomial, CycScalar)> {
        expand_terms(&self.datum, q, &self.forms[i], lam)
    }

    /// The coefficient c_{i,m} read off from the (t^{1,1}-1)^{m_i} piece.
    pub fn leading_coefficient(&self, i: usize, m: u32) -> Result<CycScalar> {
        let mi = self.datum.exponents[i] as usize;
        let q = vec![DILATON; mi];
        let terms = self.terms_with_creation(i, m, &q);
        let want: VarMonomial = vec![(i as u16, m as u16)];
        let mut lead = None;
        for (ann, c) in terms.iter() {
            if *ann == want {
                lead = Some(c.clone());
            } else if ann.len() == 1 && var_degree(&self.datum, ann[0]) == var_degree(&self.datum, want[0]) {
                return Err(Error::LeadingTerm {
                    i: i + 1,
                    m: m as usize,
                    reason: format!("leading piece also differentiates t^{{{},{}}}", ann[0].0 + 1, ann[0].1),
                });
            }
        }
        match lead {
            Some(c) if !c.is_zero() => Ok(c),
            _ => Err(Error::LeadingTerm { i: i + 1, m: m as usize, reason: "leading term is absent".into() }),
        }
    }

    /// Materializes W_{i,m} with creation degree ≤ `creation_max` (numerator over h).
    pub fn operator(&self, i: usize, m: u32, creation_max: i64) -> Result<TwistedOperator> {
        let d = &self.datum;
        let max_len = self.max_bosons(i);
        let mut vars: Vec<Var> = Vec::new();
        for p in 0.. {
            let mut any = false;
            for j in 0..d.rank() {
                let v = (j as u16, p as u16);
                if var_degree(d, v) <= creation_max {
                    vars.push(v);
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
        vars.sort_unstable();
        let mut qs = Vec::new();
        multisets(d, &vars, 0, creation_max, max_len, &mut Vec::new(), &mut qs);
        let mut terms = Vec::new();
        for q in qs {
            for (ann, c) in self.terms_with_creation(i, m, &q).iter() {
                terms.push(OperatorTerm { coeff: c.clone(), creations: q.clone(), annihilations: ann.clone() });
            }
        }
        terms.sort_by(|a, b| {
            (monomial_degree(d, &a.creations), &a.creations, &a.annihilations).cmp(&(
                monomial_degree(d, &b.creations),
                &b.creations,
                &b.annihilations,
            ))
        });
        let c_leading = self.leading_coefficient(i, m)?;
        Ok(TwistedOperator { i, m, creation_max, c_leading, terms })
    }
}

/// Terms of the expansion at λ^{target/h} whose creation part is exactly `q`,
/// as (annihilation multiset, coefficient).
fn expand_terms(d: &RootDatum, q: &[Var], forms: &[WickForm], target: i64) -> Vec<(VarMonomial, CycScalar)> {
    let h = d.h as i64;
    // distinct creation variables with multiplicities
    let mut qcounts: Vec<(Var, usize)> = Vec::new();
    for &v in q {
        match qcounts.last_mut() {
            Some((w, c)) if *w == v => *c += 1,
            _ => qcounts.push((v, 1)),
        }
    }
    let mut acc: BTreeMap<VarMonomial, CycScalar> = BTreeMap::new();
    for form in forms {
        let u = &form.unpaired;
        if u.len() < q.len() {
            continue;
        }
        let mut assign: Vec<Option<Var>> = vec![None; u.len()];
        let mut counts = qcounts.clone();
        let mut results: Vec<(Rational, i64, Vec<usize>)> = Vec::new();
        assign_creations(d, u, 0, &mut counts, q.len(), &mut assign, &mut results);
        for (cre_coef, cre_exp, ann_pos) in results {
            let rem = target - form.pair_exp - cre_exp;
            // annihilation exponent of (j,k,p): -h(1+p+k) - m_j
            let base: i64 = ann_pos
                .iter()
                .map(|&a| h * (1 + u[a].1 as i64) + d.exponents[u[a].0 as usize] as i64)
                .sum();
            let hp = -rem - base;
            if hp < 0 || hp % h != 0 {
                continue;
            }
            let total = (hp / h) as u32;
            if ann_pos.is_empty() {
                if total == 0 {
                    let e = acc.entry(Vec::new()).or_default();
                    *e = &*e + &(&form.coeff * &CycScalar::from_rational(&cre_coef));
                }
                continue;
            }
            let mut ps = vec![0u32; ann_pos.len()];
            compositions(total, 0, &mut ps, &mut |ps| {
                let mut coef = cre_coef.clone();
                let mut ann: VarMonomial = Vec::with_capacity(ps.len());
                for (&pos, &p) in ann_pos.iter().zip(ps.iter()) {
                    let (j, k) = u[pos];
                    let a = d.exponent_ratio(j as usize);
                    let e = -rat_int(1 + p as i64) - &a;
                    coef = coef * gamma_ratio(&a, p, Direction::Up) * binomial(&e, k as u32);
                    ann.push((j, p as u16));
                }
                if coef.is_zero() {
                    return;
                }
                ann.sort_unstable();
                let e = acc.entry(ann).or_default();
                *e = &*e + &(&form.coeff * &CycScalar::from_rational(&coef));
            });
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Assigns each element of the creation multiset to a distinct field whose
/// creation part produces it; the remaining fields become annihilators.
fn assign_creations(
    d: &RootDatum,
    u: &[(u16, u16)],
    pos: usize,
    counts: &mut [(Var, usize)],
    left: usize,
    assign: &mut [Option<Var>],
    out: &mut Vec<(Rational, i64, Vec<usize>)>,
) {
    if pos == u.len() {
        if left != 0 {
            return;
        }
        let h = d.h as i64;
        let mut coef = Rational::one();
        let mut exp = 0i64;
        let mut ann = Vec::new();
        for (k, slot) in assign.iter().enumerate() {
            let (j, kk) = u[k];
            match slot {
                Some((_, p)) => {
                    // creation part of ∂^{(k)}Y^M(φ^j): Γ(b)/Γ(b+p) q^{j',p} λ^{p+b-1-k}
                    let jp = d.partner(j as usize);
                    let b = d.exponent_ratio(jp);
                    let e = rat_int(*p as i64 - 1) + &b;
                    coef = coef * gamma_ratio(&b, *p as u32, Direction::Down) * binomial(&e, kk as u32);
                    exp += h * (*p as i64 - 1 - kk as i64) + d.exponents[jp] as i64;
                }
                None => ann.push(k),
            }
        }
        if !coef.is_zero() {
            out.push((coef, exp, ann));
        }
        return;
    }
    if u.len() - pos > left {
        assign[pos] = None;
        assign_creations(d, u, pos + 1, counts, left, assign, out);
    }
    if left > 0 {
        let jp = d.partner(u[pos].0 as usize) as u16;
        for idx in 0..counts.len() {
            let (v, c) = counts[idx];
            if c == 0 || v.0 != jp {
                continue;
            }
            counts[idx].1 -= 1;
            assign[pos] = Some(v);
            assign_creations(d, u, pos + 1, counts, left - 1, assign, out);
            counts[idx].1 += 1;
        }
        assign[pos] = None;
    }
}

fn compositions(total: u32, idx: usize, ps: &mut [u32], f: &mut impl FnMut(&[u32])) {
    if idx + 1 == ps.len() {
        ps[idx] = total;
        f(ps);
        return;
    }
    for p in 0..=total {
        ps[idx] = p;
        compositions(total - p, idx + 1, ps, f);
    }
}

/// Sorted multisets over the sorted `vars` with degree ≤ `max` and at most `max_len` elements.
fn multisets(
    d: &RootDatum,
    vars: &[Var],
    start: usize,
    max: i64,
    max_len: usize,
    cur: &mut Vec<Var>,
    out: &mut Vec<VarMonomial>,
) {
    out.push(cur.clone());
    if cur.len() == max_len {
        return;
    }
    for k in start..vars.len() {
        let dv = var_degree(d, vars[k]);
        if dv > max {
            continue;
        }
        cur.push(vars[k]);
        multisets(d, vars, k, max - dv, max_len, cur, out);
        cur.pop();
    }
}

/// Normal-ordered expansion of Y^M(a, λ) for an arbitrary Fock element,
/// truncated to creation degree ≤ `creation_max` and annihilation degree
/// ≤ `annihilation_max` (numerators over h). Returns (λ-exponent numerator,
/// term) pairs sorted by exponent, then by the order used for operators.
///
/// Every λ-exponent is produced, fractional ones included, so the output is
/// suitable for checking that σ-invariant inputs only give integral powers.
pub fn wick_expand(
    datum: &RootDatum,
    a: &FockElement,
    creation_max: i64,
    annihilation_max: i64,
) -> Vec<(i64, OperatorTerm)> {
    let h = datum.h as i64;
    let forms = wick_forms(datum, a);
    let max_len = forms.iter().map(|f| f.unpaired.len()).max().unwrap_or(0);
    let Some(top) = a.terms().map(|(m, _)| crate::fock::monomial_degree(m) as i64).max() else {
        return Vec::new();
    };
    let low = a.terms().map(|(m, _)| crate::fock::monomial_degree(m) as i64).min().unwrap_or(top);
    let mut vars: Vec<Var> = Vec::new();
    for p in 0..=(creation_max.max(0) / h) as u16 {
        for j in 0..datum.rank() {
            if var_degree(datum, (j as u16, p)) <= creation_max {
                vars.push((j as u16, p));
            }
        }
    }
    vars.sort_unstable();
    let mut qs = Vec::new();
    multisets(datum, &vars, 0, creation_max, max_len, &mut Vec::new(), &mut qs);
    let mut out = Vec::new();
    for q in qs {
        let c = monomial_degree(datum, &q);
        // a term of Fock degree D sits at λ^{deg - D}
        for lam in (c - annihilation_max - h * top)..=(c - h * low) {
            for (ann, coeff) in expand_terms(datum, &q, &forms, lam) {
                if monomial_degree(datum, &ann) <= annihilation_max {
                    out.push((lam, OperatorTerm { coeff, creations: q.clone(), annihilations: ann }));
                }
            }
        }
    }
    out.sort_by(|x, y| {
        (x.0, monomial_degree(datum, &x.1.creations), &x.1.creations, &x.1.annihilations).cmp(&(
            y.0,
            monomial_degree(datum, &y.1.creations),
            &y.1.creations,
            &y.1.annihilations,
        ))
    });
    out
}

/// W_{i,m} with every term whose creation degree is at most `creation_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedOperator {
    pub i: usize,
    pub m: u32,
    pub creation_max: i64,
    pub c_leading: CycScalar,
    pub terms: Vec<OperatorTerm>,
}

/// h^{m_i} Γ(m_i/h + m + 1)/Γ(m_i/h).
pub fn expected_leading(datum: &RootDatum, i: usize, m: u32) -> Rational {
    let mi = datum.exponents[i];
    let hpow = (0..mi).fold(Rational::one(), |acc, _| acc * rat_int(datum.h as i64));
    hpow * gamma_ratio(&datum.exponent_ratio(i), m, Direction::Up)
}

impl TwistedOperator {
    pub const SCHEMA: &'static str = "wce-operator/1";

    /// Degree window of the annihilation parts implied by the creation bound.
    pub fn annihilation_max(&self, datum: &RootDatum) -> i64 {
        self.creation_max - datum.h as i64 * (datum.exponents[self.i] as i64 - self.m as i64)
    }

    /// Splits the operator by powers of (t^{1,1} - 1): returns, for each d,
    /// the terms whose creation part holds exactly d copies of q^{1,1}.
    pub fn dilaton_depths(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            let d = t.creations.iter().filter(|&&v| v == DILATON).count();
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    pub fn to_text(&self, datum: &RootDatum, strategy: &str) -> String {
        let mut s = format!(
            "# {}\n# type {} conductor {} strategy {} contraction symmetric-regular-part\n# i {} m {} creation_max {}/{}\n# c_leading {}\n",
            Self::SCHEMA,
            datum.kind,
            datum.conductor,
            strategy,
            self.i + 1,
            self.m,
            self.creation_max,
            datum.h,
            self.c_leading.to_text()
        );
        let fmt_vars = |v: &[Var]| -> String {
            let mut out = Vec::new();
            let mut k = 0;
            while k < v.len() {
                let run = v[k..].iter().take_while(|&&x| x == v[k]).count();
                out.push(format!("({},{})x{}", v[k].0 + 1, v[k].1, run));
                k += run;
            }
            out.join(" ")
        };
        for t in &self.terms {
            s.push_str(&format!(
                "{} | {} | {}\n",
                t.coeff.to_text(),
                fmt_vars(&t.creations),
                fmt_vars(&t.annihilations)
            ));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("operator file: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(&format!("# {}", Self::SCHEMA)) {
            return Err(bad("schema"));
        }
        let _header = lines.next().ok_or_else(|| bad("header"))?;
        let idx = lines.next().ok_or_else(|| bad("index line"))?;
        let f: Vec<&str> = idx.split_whitespace().collect();
        if f.len() != 7 {
            return Err(bad("index line"));
        }
        let i: usize = f[2].parse::<usize>().map_err(|_| bad("i"))?.checked_sub(1).ok_or_else(|| bad("i"))?;
        let m: u32 = f[4].parse().map_err(|_| bad("m"))?;
        let creation_max: i64 =
            f[6].split('/').next().unwrap_or("").parse().map_err(|_| bad("creation_max"))?;
        let lead = lines.next().ok_or_else(|| bad("c_leading"))?;
        let c_leading = CycScalar::parse_text(lead.trim_start_matches("# c_leading").trim())?;
        let parse_vars = |s: &str| -> Result<VarMonomial> {
            let mut v = Vec::new();
            for tok in s.split_whitespace() {
                let (pair, mult) = tok.split_once('x').ok_or_else(|| bad(tok))?;
                let pair = pair.trim_start_matches('(').trim_end_matches(')');
                let (a, b) = pair.split_once(',').ok_or_else(|| bad(tok))?;
                let a: u16 = a.parse().map_err(|_| bad(tok))?;
                let b: u16 = b.parse().map_err(|_| bad(tok))?;
                let mult: usize = mult.parse().map_err(|_| bad(tok))?;
                if a == 0 {
                    return Err(bad(tok));
                }
                v.extend(std::iter::repeat_n((a - 1, b), mult));
            }
            v.sort_unstable();
            Ok(v)
        };
        let mut terms = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split('|').collect();
            if parts.len() != 3 {
                return Err(bad(line));
            }
            terms.push(OperatorTerm {
                coeff: CycScalar::parse_text(parts[0].trim())?,
                creations: parse_vars(parts[1])?,
                annihilations: parse_vars(parts[2])?,
            });
        }
        Ok(TwistedOperator { i, m, creation_max, c_leading, terms })
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    schema: String,
    family: String,
    rank: usize,
    conductor: u32,
    strategy: String,
    contraction: String,
    i: usize,
    m: u32,
    creation_max_numerator: i64,
    h: u32,
    c_leading: CycScalar,
    terms: Vec<OperatorEntry>,
}

#[derive(Serialize, Deserialize)]
struct OperatorEntry {
    coeff: CycScalar,
    creations: Vec<[u32; 3]>,
    annihilations: Vec<[u32; 3]>,
}

fn encode_vars(m: &[Var]) -> Vec<[u32; 3]> {
    let mut out: Vec<[u32; 3]> = Vec::new();
    for &(i, p) in m {
        match out.last_mut() {
            Some(e) if e[0] == i as u32 + 1 && e[1] == p as u32 => e[2] += 1,
            _ => out.push([i as u32 + 1, p as u32, 1]),
        }
    }
    out
}

fn decode_vars(e: &[[u32; 3]]) -> Result<VarMonomial> {
    let mut out = Vec::new();
    for f in e {
        if f[0] == 0 {
            return Err(Error::Parse("variable index must be 1-based".into()));
        }
        out.extend(std::iter::repeat_n((f[0] as u16 - 1, f[1] as u16), f[2] as usize));
    }
    out.sort_unstable();
    Ok(out)
}

impl TwistedOperator {
    /// JSON form with 1-based indices; the header mirrors the text form.
    pub fn to_json(&self, datum: &RootDatum, strategy: &str) -> String {
        let file = OperatorFile {
            schema: Self::SCHEMA.into(),
            family: datum.kind.family.to_string(),
            rank: datum.rank(),
            conductor: datum.conductor,
            strategy: strategy.into(),
            contraction: "symmetric-regular-part".into(),
            i: self.i + 1,
            m: self.m,
            creation_max_numerator: self.creation_max,
            h: datum.h,
            c_leading: self.c_leading.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| OperatorEntry {
                    coeff: t.coeff.clone(),
                    creations: encode_vars(&t.creations),
                    annihilations: encode_vars(&t.annihilations),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("operator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: OperatorFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema != Self::SCHEMA || file.i == 0 {
            return Err(Error::Parse(format!("unexpected operator header ({} i={})", file.schema, file.i)));
        }
        let terms = file
            .terms
            .into_iter()
            .map(|t| {
                Ok(OperatorTerm {
                    coeff: t.coeff,
                    creations: decode_vars(&t.creations)?,
                    annihilations: decode_vars(&t.annihilations)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TwistedOperator {
            i: file.i - 1,
            m: file.m,
            creation_max: file.creation_max_numerator,
            c_leading: file.c_leading,
            terms,
        })
    }
}

/// Terms of Y^M(w_i, λ) with creation part `q` at every non-integral
/// λ-exponent in `lam_range`. Empty for a generator of W.
pub fn fractional_power_terms(
    engine: &OperatorEngine,
    i: usize,
    q: &[Var],
    lam_range: std::ops::RangeInclusive<i64>,
) -> Vec<(i64, VarMonomial, CycScalar)> {
    let h = engine.datum().h as i64;
    let mut out = Vec::new();
    for lam in lam_range {
        if lam % h == 0 {
            continue;
        }
        for (ann, c) in engine.terms_at_exponent(i, lam, q) {
            out.push((lam, ann, c));
        }
    }
    out
}

/// λ-exponent numerators of the individual fields of a Fock element, used by
/// tests to confirm that non-σ-invariant inputs do produce fractional powers.
pub fn has_fractional_modes(datum: &RootDatum, w: &FockElement) -> bool {
    w.terms().any(|(m, _)| {
        let s: u32 = m.iter().map(|&(j, _)| datum.exponents[j as usize]).sum();
        s % datum.h != 0
    })
}
