//! Graded recursion for τ from the W-constraints, the logarithm and genus
//! split of the result, and overdetermination checks.

pub mod potential;
pub mod virasoro;

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfield::{rat_int, CycScalar, Rational};
use crate::rootdata::RootDatum;
use crate::twist::{monomial_degree, var_degree, OperatorEngine, Var, VarMonomial, DILATON};

pub use potential::{
    d4_reference, frobenius_potential, quasi_homogeneous, transform_potential, wdvv_check, PotentialForm,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Frontier,
    GoalDirected,
}

impl std::str::FromStr for SolveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "frontier" => Ok(SolveMode::Frontier),
            "goal_directed" | "goal" => Ok(SolveMode::GoalDirected),
            _ => Err(Error::Parse(format!("unknown solve mode `{s}`"))),
        }
    }
}

/// Coefficients of τ indexed by monomials in t^{i,p}.
///
/// A frontier solve stores every monomial up to the truncation (zeros
/// included); a goal-directed solve stores only the dependency cone of its
/// targets, and `complete` is false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauSeries {
    pub h: u32,
    pub exponents: Vec<u32>,
    pub truncation: i64,
    pub complete: bool,
    pub coeffs: BTreeMap<VarMonomial, CycScalar>,
}

impl TauSeries {
    pub fn get(&self, m: &[Var]) -> Option<&CycScalar> {
        self.coeffs.get(m)
    }

    /// The coefficient of `m`, treating unsolved monomials of a complete
    /// series beyond the truncation as an error.
    pub fn coeff(&self, m: &[Var]) -> Result<CycScalar> {
        self.coeffs.get(m).cloned().ok_or_else(|| {
            Error::Solver(format!("coefficient of {} was not computed", format_monomial(m)))
        })
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&VarMonomial, &CycScalar)> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero())
    }
}

/// log τ with a genus tag on every nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogSeries {
    pub h: u32,
    pub exponents: Vec<u32>,
    pub truncation: i64,
    pub coeffs: BTreeMap<VarMonomial, (CycScalar, u32)>,
}

impl LogSeries {
    pub fn coeff(&self, m: &[Var]) -> CycScalar {
        self.coeffs.get(m).map(|(c, _)| c.clone()).unwrap_or_default()
    }
}

/// `(i,p)^k` factors separated by spaces, 1-based `i`.
pub fn format_monomial(m: &[Var]) -> String {
    if m.is_empty() {
        return "1".into();
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k < m.len() {
        let run = m[k..].iter().take_while(|&&x| x == m[k]).count();
        if run == 1 {
            out.push(format!("({},{})", m[k].0 + 1, m[k].1));
        } else {
            out.push(format!("({},{})^{}", m[k].0 + 1, m[k].1, run));
        }
        k += run;
    }
    out.join(" ")
}

pub fn parse_monomial(s: &str, rank: usize) -> Result<VarMonomial> {
    let bad = || Error::Parse(format!("cannot parse monomial `{s}`; expected factors like (1,0)^2 (4,0)"));
    let mut out = Vec::new();
    for tok in s.split_whitespace() {
        let (pair, k) = match tok.split_once('^') {
            Some((a, b)) => (a, b.parse::<usize>().map_err(|_| bad())?),
            None => (tok, 1),
        };
        let inner = pair.strip_prefix('(').and_then(|p| p.strip_suffix(')')).ok_or_else(bad)?;
        let (i, p) = inner.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let p: u16 = p.trim().parse().map_err(|_| bad())?;
        if i == 0 || i > rank {
            return Err(Error::Parse(format!("index {i} out of range 1..={rank} in `{s}`")));
        }
        out.extend(std::iter::repeat_n((i as u16 - 1, p), k));
    }
    out.sort_unstable();
    Ok(out)
}

/// All monomials in t^{i,p} grouped by degree numerator 0..=max.
pub fn monomials_by_degree(datum: &RootDatum, max: i64) -> Vec<Vec<VarMonomial>> {
    let mut vars: Vec<Var> = Vec::new();
    for p in 0.. {
        let before = vars.len();
        for i in 0..datum.rank() {
            if var_degree(datum, (i as u16, p)) <= max {
                vars.push((i as u16, p));
            }
        }
        if vars.len() == before {
            break;
        }
    }
    let mut levels = vec![Vec::new(); max.max(0) as usize + 1];
    fn rec(d: &RootDatum, vars: &[Var], start: usize, deg: i64, max: i64, cur: &mut Vec<Var>, out: &mut [Vec<VarMonomial>]) {
        out[deg as usize].push(cur.clone());
        for k in start..vars.len() {
            let dv = var_degree(d, vars[k]);
            if deg + dv <= max {
                cur.push(vars[k]);
                rec(d, vars, k, deg + dv, max, cur, out);
                cur.pop();
            }
        }
    }
    rec(datum, &vars, 0, 0, max, &mut Vec::new(), &mut levels);
    for l in levels.iter_mut() {
        for m in l.iter_mut() {
            m.sort_unstable();
        }
        l.sort();
    }
    levels
}

/// The factor of `m` whose constraint determines its coefficient: largest
/// degree, then largest index, then largest p.
pub fn pivot_var(datum: &RootDatum, m: &[Var]) -> Var {
    *m.iter()
        .max_by_key(|&&v| (var_degree(datum, v), v.0, v.1))
        .expect("pivot of a nonempty monomial")
}

fn remove_one(m: &[Var], v: Var) -> VarMonomial {
    let mut out = m.to_vec();
    let k = out.iter().position(|&x| x == v).expect("factor present");
    out.remove(k);
    out
}

fn merge(a: &[Var], b: &[Var]) -> VarMonomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_unstable();
    out
}

fn count(m: &[Var], v: Var) -> usize {
    m.iter().filter(|&&x| x == v).count()
}

/// Sub-multisets X of `n` paired with their complements.
fn splits(n: &[Var]) -> Vec<(VarMonomial, VarMonomial)> {
    let mut groups: Vec<(Var, usize)> = Vec::new();
    for &v in n {
        match groups.last_mut() {
            Some((w, c)) if *w == v => *c += 1,
            _ => groups.push((v, 1)),
        }
    }
    let mut out = vec![(Vec::new(), Vec::new())];
    for (v, c) in groups {
        let mut next = Vec::with_capacity(out.len() * (c + 1));
        for (x, r) in &out {
            for k in 0..=c {
                let mut x2 = x.clone();
                let mut r2 = r.clone();
                x2.extend(std::iter::repeat_n(v, k));
                r2.extend(std::iter::repeat_n(v, c - k));
                next.push((x2, r2));
            }
        }
        out = next;
    }
    out
}

fn binom_int(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j as i64 + 1))
}

/// The coefficient of t^N in W_{i,m}τ, as a linear form in the coefficients
/// of τ. Variables are the shifted t^{i,p}, so q^{1,1} = t^{1,1} − 1 is
/// expanded binomially.
pub fn constraint_row(engine: &OperatorEngine, i: usize, m: u32, n: &[Var]) -> BTreeMap<VarMonomial, CycScalar> {
    let max_e = engine.max_bosons(i);
    let mut row: BTreeMap<VarMonomial, CycScalar> = BTreeMap::new();
    for (x, r) in splits(n) {
        let x_dil = count(&x, DILATON);
        for e in 0..=max_e {
            if x.len() + e > max_e {
                break;
            }
            let mut q = x.clone();
            q.extend(std::iter::repeat_n(DILATON, e));
            q.sort_unstable();
            let sign = if e % 2 == 0 { 1 } else { -1 };
            let shift = rat_int(sign * binom_int(x_dil + e, e));
            let terms = engine.terms_with_creation(i, m, &q);
            for (y, c) in terms.iter() {
                let min = merge(&r, y);
                // ∂^Y t^{min} = Π falling(mult) t^{r}
                let mut ff = shift.clone();
                let mut k = 0;
                while k < y.len() {
                    let run = y[k..].iter().take_while(|&&v| v == y[k]).count();
                    let mult = count(&min, y[k]);
                    for j in 0..run {
                        ff *= rat_int((mult - j) as i64);
                    }
                    k += run;
                }
                let add = c * &CycScalar::from_rational(&ff);
                let entry = row.entry(min).or_default();
                *entry += &add;
            }
        }
    }
    row.retain(|_, c| !c.is_zero());
    row
}

/// (−1)^{m_i} c_{i,p} · multiplicity: the coefficient the pivot must carry.
fn expected_pivot(engine: &OperatorEngine, v: Var, mult: usize) -> Result<CycScalar> {
    let d = engine.datum();
    let c = engine.leading_coefficient(v.0 as usize, v.1 as u32)?;
    let sign: i64 = if d.exponents[v.0 as usize] % 2 == 0 { 1 } else { -1 };
    Ok(&c * &CycScalar::from_int(sign * mult as i64))
}

/// Solves for one coefficient given a lookup of lower-degree values.
fn solve_one(
    engine: &OperatorEngine,
    m: &[Var],
    lookup: &dyn Fn(&[Var]) -> Result<CycScalar>,
) -> Result<CycScalar> {
    let d = engine.datum();
    let deg = monomial_degree(d, m);
    let v = pivot_var(d, m);
    let n = remove_one(m, v);
    let mut row = constraint_row(engine, v.0 as usize, v.1 as u32, &n);
    let pivot = row.remove(m).unwrap_or_default();
    let context = || format!("monomial {} (degree {}/{}), pivot t^{{{},{}}}", format_monomial(m), deg, d.h, v.0 + 1, v.1);
    if pivot.is_zero() {
        return Err(Error::Solver(format!("zero pivot coefficient at {}", context())));
    }
    let expected = expected_pivot(engine, v, count(m, v))?;
    if pivot != expected {
        return Err(Error::Solver(format!(
            "pivot coefficient {} differs from (-1)^m_i c_(i,p) x multiplicity = {} at {}",
            pivot,
            expected,
            context()
        )));
    }
    let mut acc = CycScalar::zero();
    for (dep, c) in &row {
        if monomial_degree(d, dep) >= deg {
            return Err(Error::Solver(format!(
                "constraint for {} depends on {} of degree {}/{} not below the current level",
                context(),
                format_monomial(dep),
                monomial_degree(d, dep),
                d.h
            )));
        }
        let val = lookup(dep)?;
        if !val.is_zero() {
            acc += &(c * &val);
        }
    }
    (-acc).checked_div(&pivot)
}

/// Fills every coefficient up to `truncation` (degree numerator over h),
/// level by level; monomials within a level are solved in parallel.
pub fn solve_frontier(engine: &OperatorEngine, truncation: i64) -> Result<TauSeries> {
    let d = engine.datum();
    let levels = monomials_by_degree(d, truncation);
    let mut known: HashMap<VarMonomial, CycScalar> = HashMap::new();
    known.insert(Vec::new(), CycScalar::one());
    for level in levels.iter().skip(1) {
        let solved: Vec<(VarMonomial, CycScalar)> = level
            .par_iter()
            .map(|m| {
                let lookup = |x: &[Var]| -> Result<CycScalar> {
                    Ok(known.get(x).cloned().unwrap_or_default())
                };
                solve_one(engine, m, &lookup).map(|c| (m.clone(), c))
            })
            .collect::<Result<_>>()?;
        known.extend(solved);
    }
    Ok(TauSeries {
        h: d.h,
        exponents: d.exponents.clone(),
        truncation,
        complete: true,
        coeffs: known.into_iter().collect(),
    })
}

/// Computes only what the targets depend on, with memoization.
pub fn solve_goal(engine: &OperatorEngine, targets: &[VarMonomial]) -> Result<TauSeries> {
    let d = engine.datum();
    let mut memo: HashMap<VarMonomial, CycScalar> = HashMap::new();
    memo.insert(Vec::new(), CycScalar::one());
    let mut truncation = 0;
    for t in targets {
        truncation = truncation.max(monomial_degree(d, t));
        goal_rec(engine, t, &mut memo)?;
    }
    Ok(TauSeries {
        h: d.h,
        exponents: d.exponents.clone(),
        truncation,
        complete: false,
        coeffs: memo.into_iter().collect(),
    })
}

fn goal_rec(engine: &OperatorEngine, m: &[Var], memo: &mut HashMap<VarMonomial, CycScalar>) -> Result<CycScalar> {
    if let Some(c) = memo.get(m) {
        return Ok(c.clone());
    }
    let d = engine.datum();
    let v = pivot_var(d, m);
    let n = remove_one(m, v);
    let row = constraint_row(engine, v.0 as usize, v.1 as u32, &n);
    // solve the lower-degree dependencies first, in parallel-independent order
    let deg = monomial_degree(d, m);
    for dep in row.keys() {
        if dep.as_slice() != m && monomial_degree(d, dep) < deg && !memo.contains_key(dep) {
            goal_rec(engine, dep, memo)?;
        }
    }
    let value = {
        let memo_ref = &*memo;
        let lookup = |x: &[Var]| -> Result<CycScalar> {
            memo_ref.get(x).cloned().ok_or_else(|| Error::Solver(format!("missing {}", format_monomial(x))))
        };
        solve_one(engine, m, &lookup)?
    };
    memo.insert(m.to_vec(), value.clone());
    Ok(value)
}

pub fn solve_tau(engine: &OperatorEngine, truncation: i64, mode: SolveMode, targets: &[VarMonomial]) -> Result<TauSeries> {
    match mode {
        SolveMode::Frontier => solve_frontier(engine, truncation),
        SolveMode::GoalDirected => {
            if targets.is_empty() {
                let all: Vec<VarMonomial> =
                    monomials_by_degree(engine.datum(), truncation).into_iter().flatten().collect();
                solve_goal(engine, &all)
            } else {
                solve_goal(engine, targets)
            }
        }
    }
}

/// One constraint equation: the coefficient of t^N in W_{i,m}τ.
#[derive(Clone, Debug)]
pub struct Residual {
    pub i: usize,
    pub m: u32,
    pub output: VarMonomial,
    pub value: CycScalar,
}

#[derive(Clone, Debug, Default)]
pub struct ConsistencyReport {
    /// Number of coefficient equations evaluated.
    pub equations: usize,
    pub nonzero: Vec<Residual>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.nonzero.is_empty()
    }
}

/// Every (i, m, N) whose equation involves only coefficients within the truncation.
pub fn complete_equations(datum: &RootDatum, truncation: i64, pairs: &[(usize, u32)]) -> Vec<(usize, u32, VarMonomial)> {
    let levels = monomials_by_degree(datum, truncation);
    let mut out = Vec::new();
    for &(i, m) in pairs {
        let shift = datum.h as i64 * m as i64 + datum.exponents[i] as i64;
        for level in levels.iter().take((truncation - shift + 1).max(0) as usize) {
            for n in level {
                out.push((i, m, n.clone()));
            }
        }
    }
    out
}

/// All (i, m) whose equations can be complete within the truncation.
pub fn constraint_pairs(datum: &RootDatum, truncation: i64) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for i in 0..datum.rank() {
        for m in 0.. {
            if datum.h as i64 * m as i64 + datum.exponents[i] as i64 > truncation {
                break;
            }
            out.push((i, m));
        }
    }
    out
}

/// Applies each listed W_{i,m} to τ and collects nonzero coefficients of
/// W_{i,m}τ at monomials whose value is fully determined by the truncation.
pub fn consistency_check(engine: &OperatorEngine, tau: &TauSeries, pairs: &[(usize, u32)]) -> Result<ConsistencyReport> {
    let eqs = complete_equations(engine.datum(), tau.truncation, pairs);
    let results: Vec<Option<Residual>> = eqs
        .par_iter()
        .map(|(i, m, n)| {
            let row = constraint_row(engine, *i, *m, n);
            let mut acc = CycScalar::zero();
            for (dep, c) in &row {
                let v = tau.coeff(dep)?;
                if !v.is_zero() {
                    acc += &(c * &v);
                }
            }
            Ok((!acc.is_zero()).then(|| Residual { i: *i, m: *m, output: n.clone(), value: acc }))
        })
        .collect::<Result<_>>()?;
    Ok(ConsistencyReport { equations: eqs.len(), nonzero: results.into_iter().flatten().collect() })
}

/// Monomials whose coefficient could be shifted by +1 without any listed
/// constraint noticing. Since the residuals are linear in τ and vanish at
/// the solution, the shift changes the residual of each equation by that
/// equation's coefficient at the monomial; so a monomial escapes detection
/// exactly when no complete equation involves it.
pub fn undetected_perturbations(engine: &OperatorEngine, tau: &TauSeries, pairs: &[(usize, u32)]) -> Vec<VarMonomial> {
    let eqs = complete_equations(engine.datum(), tau.truncation, pairs);
    let touched: Vec<HashSet<VarMonomial>> = eqs
        .par_iter()
        .map(|(i, m, n)| constraint_row(engine, *i, *m, n).into_keys().collect())
        .collect();
    let mut seen: HashSet<VarMonomial> = HashSet::new();
    for t in touched {
        seen.extend(t);
    }
    tau.coeffs.keys().filter(|m| !m.is_empty() && !seen.contains(*m)).cloned().collect()
}

/// Genus from the dimension rule g = 1 + Σ(p + (m_i − 1)/h − 1)/(3 − ĉ),
/// ĉ = 1 − 2/h, or an error if it is not a nonnegative integer.
pub fn genus_of(datum: &RootDatum, m: &[Var]) -> Result<u32> {
    let h = datum.h as i64;
    let num: i64 = m
        .iter()
        .map(|&(i, p)| h * p as i64 + datum.exponents[i as usize] as i64 - 1 - h)
        .sum();
    let den = 2 * h + 2;
    if num % den != 0 || 1 + num / den < 0 {
        return Err(Error::Solver(format!(
            "monomial {} has genus 1 + {}/{}, not a nonnegative integer",
            format_monomial(m),
            num,
            den
        )));
    }
    Ok((1 + num / den) as u32)
}

/// Proper nonempty sub-multisets of `m`.
fn proper_divisors(m: &[Var]) -> Vec<(VarMonomial, VarMonomial)> {
    splits(m).into_iter().filter(|(x, r)| !x.is_empty() && !r.is_empty()).collect()
}

/// F = log τ via deg(M)·F_M = deg(M)·τ_M − Σ deg(A) F_A τ_B over M = A·B,
/// A, B nonempty, using the Euler field Σ deg(t) t ∂_t. Only monomials
/// whose divisors are all known are computed. Every nonzero coefficient
/// must pass the genus rule.
pub fn log_series(datum: &RootDatum, tau: &TauSeries) -> Result<LogSeries> {
    if tau.get(&[]).is_none_or(|c| !c.is_one()) {
        return Err(Error::Solver("log requires τ(0) = 1".into()));
    }
    let mut keys: Vec<&VarMonomial> = tau.coeffs.keys().filter(|m| !m.is_empty()).collect();
    keys.sort_by_key(|m| (monomial_degree(datum, m), (*m).clone()));
    let mut f: HashMap<VarMonomial, CycScalar> = HashMap::new();
    for m in keys {
        let divs = proper_divisors(m);
        if !divs.iter().all(|(a, b)| f.contains_key(a) && tau.get(b).is_some()) {
            continue;
        }
        let dm = monomial_degree(datum, m);
        let mut acc = &tau.coeffs[m] * &CycScalar::from_int(dm);
        for (a, b) in &divs {
            let fa = &f[a];
            let tb = &tau.coeffs[b];
            if fa.is_zero() || tb.is_zero() {
                continue;
            }
            acc -= &(&(fa * tb) * &CycScalar::from_int(monomial_degree(datum, a)));
        }
        let val = acc.scale(&Rational::new(1.into(), dm.into()));
        f.insert(m.clone(), val);
    }
    let mut coeffs = BTreeMap::new();
    for (m, c) in f {
        if c.is_zero() {
            continue;
        }
        let g = genus_of(datum, &m)?;
        coeffs.insert(m, (c, g));
    }
    Ok(LogSeries { h: tau.h, exponents: tau.exponents.clone(), truncation: tau.truncation, coeffs })
}

/// exp of a log series on the given monomial set (closed under divisors).
pub fn exp_series(datum: &RootDatum, log: &LogSeries, monomials: &[VarMonomial]) -> BTreeMap<VarMonomial, CycScalar> {
    let mut sorted: Vec<&VarMonomial> = monomials.iter().filter(|m| !m.is_empty()).collect();
    sorted.sort_by_key(|m| (monomial_degree(datum, m), (*m).clone()));
    let mut t: BTreeMap<VarMonomial, CycScalar> = BTreeMap::new();
    t.insert(Vec::new(), CycScalar::one());
    for m in sorted {
        // deg(M) τ_M = Σ_{A·B = M, A ≠ 1} deg(A) F_A τ_B
        let mut acc = CycScalar::zero();
        for (a, b) in splits(m) {
            if a.is_empty() {
                continue;
            }
            let fa = log.coeff(&a);
            if fa.is_zero() {
                continue;
            }
            let tb = t.get(&b).cloned().unwrap_or_default();
            acc += &(&(&fa * &tb) * &CycScalar::from_int(monomial_degree(datum, &a)));
        }
        let dm = monomial_degree(datum, m);
        t.insert(m.clone(), acc.scale(&Rational::new(1.into(), dm.into())));
    }
    t
}

#[derive(Serialize, Deserialize)]
struct SeriesHeader {
    schema: String,
    family: String,
    rank: usize,
    h: u32,
    exponents: Vec<u32>,
    conductor: u32,
    truncation_numerator: i64,
    complete: bool,
}

#[derive(Serialize, Deserialize)]
struct SeriesEntry {
    monomial: Vec<[u32; 3]>,
    value: CycScalar,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    genus: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    header: SeriesHeader,
    entries: Vec<SeriesEntry>,
}

fn encode_monomial(m: &[Var]) -> Vec<[u32; 3]> {
    let mut out: Vec<[u32; 3]> = Vec::new();
    for &(i, p) in m {
        match out.last_mut() {
            Some(e) if e[0] == i as u32 + 1 && e[1] == p as u32 => e[2] += 1,
            _ => out.push([i as u32 + 1, p as u32, 1]),
        }
    }
    out
}

fn decode_monomial(e: &[[u32; 3]]) -> Result<VarMonomial> {
    let mut out = Vec::new();
    for f in e {
        if f[0] == 0 {
            return Err(Error::Parse("monomial index must be 1-based".into()));
        }
        out.extend(std::iter::repeat_n((f[0] as u16 - 1, f[1] as u16), f[2] as usize));
    }
    out.sort_unstable();
    Ok(out)
}

fn header(datum: &RootDatum, schema: &str, truncation: i64, complete: bool) -> SeriesHeader {
    SeriesHeader {
        schema: schema.into(),
        family: format!("{:?}", datum.kind.family),
        rank: datum.rank(),
        h: datum.h,
        exponents: datum.exponents.clone(),
        conductor: datum.conductor,
        truncation_numerator: truncation,
        complete,
    }
}

impl TauSeries {
    pub const SCHEMA: &'static str = "wce-tau/1";

    pub fn to_json(&self, datum: &RootDatum) -> String {
        let mut entries: Vec<(&VarMonomial, &CycScalar)> = self.coeffs.iter().collect();
        entries.sort_by_key(|(m, _)| (monomial_degree(datum, m), (*m).clone()));
        let file = SeriesFile {
            header: header(datum, Self::SCHEMA, self.truncation, self.complete),
            entries: entries
                .into_iter()
                .map(|(m, c)| SeriesEntry { monomial: encode_monomial(m), value: c.clone(), genus: None })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("series serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SeriesFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.header.schema != Self::SCHEMA {
            return Err(Error::Parse(format!("unexpected schema {}", file.header.schema)));
        }
        let mut coeffs = BTreeMap::new();
        for e in file.entries {
            coeffs.insert(decode_monomial(&e.monomial)?, e.value);
        }
        Ok(TauSeries {
            h: file.header.h,
            exponents: file.header.exponents,
            truncation: file.header.truncation_numerator,
            complete: file.header.complete,
            coeffs,
        })
    }
}

impl LogSeries {
    pub const SCHEMA: &'static str = "wce-log/1";

    pub fn to_json(&self, datum: &RootDatum) -> String {
        let mut entries: Vec<(&VarMonomial, &(CycScalar, u32))> = self.coeffs.iter().collect();
        entries.sort_by_key(|(m, _)| (monomial_degree(datum, m), (*m).clone()));
        let file = SeriesFile {
            header: header(datum, Self::SCHEMA, self.truncation, true),
            entries: entries
                .into_iter()
                .map(|(m, (c, g))| SeriesEntry { monomial: encode_monomial(m), value: c.clone(), genus: Some(*g) })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("series serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SeriesFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.header.schema != Self::SCHEMA {
            return Err(Error::Parse(format!("unexpected schema {}", file.header.schema)));
        }
        let mut coeffs = BTreeMap::new();
        for e in file.entries {
            let g = e.genus.ok_or_else(|| Error::Parse("log entry without genus".into()))?;
            coeffs.insert(decode_monomial(&e.monomial)?, (e.value, g));
        }
        Ok(LogSeries {
            h: file.header.h,
            exponents: file.header.exponents,
            truncation: file.header.truncation_numerator,
            coeffs,
        })
    }
}
