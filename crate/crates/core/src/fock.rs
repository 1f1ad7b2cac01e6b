//! The bosonic Fock space 𝓕 = S(𝔥[t^{-1}]t^{-1}) in the eigenbasis symbols
//! u[j,n] = φ^j t^{-n}, untwisted lattice vertex operators, screenings and
//! the generators of the W-algebra.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::numfield::{rat, sqrt_of_integer, CycScalar, Rational};
use crate::poly::Poly;
use crate::rootdata::{as_i64, Family, LatticeVector, RootDatum};

/// φ^j t^{-n} with `j` 0-based and `n ≥ 1`.
pub type Sym = (u16, u16);

/// Sorted multiset of symbols.
pub type FockMonomial = Vec<Sym>;

pub fn monomial_degree(m: &[Sym]) -> u32 {
    m.iter().map(|&(_, n)| n as u32).sum()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FockElement {
    terms: BTreeMap<FockMonomial, CycScalar>,
}

impl FockElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(CycScalar::one())
    }

    pub fn scalar(c: CycScalar) -> Self {
        let mut f = Self::zero();
        f.add_term(Vec::new(), c);
        f
    }

    /// The generator u[j,n] (0-based j).
    pub fn gen(j: usize, n: u32) -> Self {
        let mut f = Self::zero();
        f.add_term(vec![(j as u16, n as u16)], CycScalar::one());
        f
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (FockMonomial, CycScalar)>) -> Self {
        let mut f = Self::zero();
        for (mut m, c) in terms {
            m.sort_unstable();
            f.add_term(m, c);
        }
        f
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockMonomial, &CycScalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[Sym]) -> CycScalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// `m` must already be sorted.
    pub fn add_term(&mut self, m: FockMonomial, c: CycScalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &CycScalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        FockElement { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&CycScalar::from_rational(r))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m: FockMonomial = m1.iter().chain(m2).copied().collect();
                m.sort_unstable();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// ∂/∂u[j,n].
    pub fn derivative(&self, s: Sym) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mult = m.iter().filter(|&&x| x == s).count();
            if mult == 0 {
                continue;
            }
            let pos = m.iter().position(|&x| x == s).unwrap();
            let mut m2 = m.clone();
            m2.remove(pos);
            out.add_term(m2, c * &CycScalar::from_int(mult as i64));
        }
        out
    }

    /// Degrees of the monomials present, if all equal.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| monomial_degree(m));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms.is_empty() || self.homogeneous_degree().is_some()
    }

    pub fn component(&self, d: u32) -> Self {
        FockElement {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| monomial_degree(m) == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The part built only from t^{-1} modes, as a polynomial in the
    /// eigen-coordinates y_0..y_{ℓ-1} (u[j,1] ↔ y_{ℓ-1-j}).
    pub fn t1_part(&self, rank: usize) -> Poly {
        let mut p = Poly::zero(rank);
        for (m, c) in &self.terms {
            if m.iter().all(|&(_, n)| n == 1) {
                let mut e = vec![0u32; rank];
                for &(j, _) in m {
                    e[rank - 1 - j as usize] += 1;
                }
                p.add_term(e, c.clone());
            }
        }
        p
    }

    /// Inverse of [`FockElement::t1_part`].
    pub fn from_t1_poly(p: &Poly) -> Self {
        let rank = p.nvars();
        let mut f = Self::zero();
        for (e, c) in p.terms() {
            let mut m = Vec::new();
            for (k, &d) in e.iter().enumerate() {
                for _ in 0..d {
                    m.push(((rank - 1 - k) as u16, 1u16));
                }
            }
            m.sort_unstable();
            f.add_term(m, c.clone());
        }
        f
    }

    /// Product of σ-eigenvalue exponents mod h is zero for every monomial.
    pub fn is_sigma_invariant(&self, datum: &RootDatum) -> bool {
        self.terms.keys().all(|m| sigma_weight(datum, m) == 0)
    }

    /// Canonical text: one `coeff|j,n;j,n;...` line per term (1-based j).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            let mono: Vec<String> = m.iter().map(|&(j, n)| format!("{},{}", j + 1, n)).collect();
            s.push_str(&format!("{}|{}\n", c.to_text(), mono.join(";")));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut f = Self::zero();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (c, mono) = line
                .split_once('|')
                .ok_or_else(|| Error::Parse(format!("bad Fock term `{line}`")))?;
            let c = CycScalar::parse_text(c)?;
            let mut m = Vec::new();
            for sym in mono.split(';').filter(|s| !s.is_empty()) {
                let (j, n) = sym
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad symbol `{sym}`")))?;
                let j: u16 = j.trim().parse().map_err(|_| Error::Parse(sym.into()))?;
                let n: u16 = n.trim().parse().map_err(|_| Error::Parse(sym.into()))?;
                if j == 0 || n == 0 {
                    return Err(Error::Parse(format!("bad symbol `{sym}`")));
                }
                m.push((j - 1, n));
            }
            m.sort_unstable();
            f.add_term(m, c);
        }
        Ok(f)
    }
}

impl fmt::Display for FockElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            let mut i = 0;
            while i < m.len() {
                let run = m[i..].iter().take_while(|&&x| x == m[i]).count();
                let (j, n) = m[i];
                if run == 1 {
                    write!(f, "·u[{},{}]", j + 1, n)?;
                } else {
                    write!(f, "·u[{},{}]^{}", j + 1, n, run)?;
                }
                i += run;
            }
        }
        Ok(())
    }
}

impl Serialize for FockElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(Vec<(u16, u16)>, String)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.iter().map(|&(j, n)| (j + 1, n)).collect(), c.to_text()))
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<(Vec<(u16, u16)>, String)> = Vec::deserialize(d)?;
        let mut f = FockElement::zero();
        for (m, c) in v {
            let c = CycScalar::parse_text(&c).map_err(serde::de::Error::custom)?;
            let mut m: Vec<Sym> = m.into_iter().map(|(j, n)| (j.saturating_sub(1), n)).collect();
            m.sort_unstable();
            f.add_term(m, c);
        }
        Ok(f)
    }
}

/// Σ m_j over the factors, reduced mod h.
pub fn sigma_weight(datum: &RootDatum, m: &[Sym]) -> u32 {
    m.iter().map(|&(j, _)| datum.exponents[j as usize]).sum::<u32>() % datum.h
}

/// s ⊗ e^γ in V_Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeState {
    pub fock: FockElement,
    pub charge: LatticeVector,
}

impl LatticeState {
    pub fn new(fock: FockElement, charge: LatticeVector) -> Self {
        LatticeState { fock, charge }
    }

    /// s ⊗ e^0 on the root lattice.
    pub fn neutral(datum: &RootDatum, fock: FockElement) -> Self {
        LatticeState { fock, charge: LatticeVector::root(&vec![0; datum.rank()]) }
    }
}

/// φ t^m acting on the Fock factor, where φ = Σ_j a_j φ^j is given by its
/// eigen-coordinates. For m > 0 this is the derivation with
/// [φt^m, φ^j t^{-m}] = m(φ|φ^j).
pub fn heisenberg_fock(datum: &RootDatum, phi: &[CycScalar], m: i32, s: &FockElement) -> FockElement {
    if m < 0 {
        let k = (-m) as u32;
        let mut lin = FockElement::zero();
        for (j, a) in phi.iter().enumerate() {
            lin.add_term(vec![(j as u16, k as u16)], a.clone());
        }
        return lin.mul(s);
    }
    let k = m as u32;
    let mut out = FockElement::zero();
    for j in 0..datum.rank() {
        // (φ|φ^j) = a_{ℓ-1-j}
        let pairing = &phi[datum.partner(j)];
        if pairing.is_zero() {
            continue;
        }
        let d = s.derivative((j as u16, k as u16));
        if !d.is_zero() {
            out = out.add(&d.scale(&(pairing * &CycScalar::from_int(k as i64))));
        }
    }
    out
}

/// φ t^m on s ⊗ e^γ; the m = 0 mode multiplies by (φ|γ).
pub fn heisenberg_act(datum: &RootDatum, phi: &[CycScalar], m: i32, x: &LatticeState) -> Result<LatticeState> {
    if m != 0 {
        return Ok(LatticeState::new(heisenberg_fock(datum, phi, m, &x.fock), x.charge.clone()));
    }
    let g = datum.eigen_coords(&x.charge)?;
    let mut pairing = CycScalar::zero();
    for (j, a) in phi.iter().enumerate() {
        pairing += &(a * &g[datum.partner(j)]);
    }
    Ok(LatticeState::new(x.fock.scale(&pairing), x.charge.clone()))
}

/// Coefficients of exp(Σ_{k≥1} βt^{-k} z^k/k) applied to 1, up to z^max.
fn creation_series(beta: &[CycScalar], max: usize) -> Vec<FockElement> {
    let mut c = vec![FockElement::one()];
    for r in 1..=max {
        let mut acc = FockElement::zero();
        for k in 1..=r {
            let mut lin = FockElement::zero();
            for (j, a) in beta.iter().enumerate() {
                lin.add_term(vec![(j as u16, k as u16)], a.clone());
            }
            acc = acc.add(&lin.mul(&c[r - k]));
        }
        c.push(acc.scale_rational(&rat(1, r as i64)));
    }
    c
}

/// Coefficients of exp(-Σ_{k≥1} βt^k z^{-k}/k) applied to s, by powers of z^{-1}.
fn annihilation_series(datum: &RootDatum, beta: &[CycScalar], s: &FockElement) -> Vec<FockElement> {
    let top = s.terms().map(|(m, _)| monomial_degree(m)).max().unwrap_or(0) as usize;
    let mut a = vec![s.clone()];
    for r in 1..=top {
        let mut acc = FockElement::zero();
        for k in 1..=r {
            acc = acc.sub(&heisenberg_fock(datum, beta, k as i32, &a[r - k]));
        }
        a.push(acc.scale_rational(&rat(1, r as i64)));
    }
    a
}

/// The mode e^β_{(n)} of Y_β(z) = e^β z^β exp(Σ βt^{-k}z^k/k) exp(-Σ βt^k z^{-k}/k).
pub fn vertex_mode(datum: &RootDatum, beta: &LatticeVector, n: i64, x: &LatticeState) -> Result<LatticeState> {
    let eps = datum.epsilon(beta, &x.charge)?;
    let bg = datum.pair(beta, &x.charge)?;
    let bg = as_i64(&bg).ok_or_else(|| Error::NonIntegralCocycle(format!("(β|γ) = {bg}")))?;
    let b = datum.eigen_coords(beta)?;
    let charge = beta.add(&x.charge)?;
    // total z-power: (β|γ) + c - a = -n - 1
    let r = -n - 1 - bg;
    let ann = annihilation_series(datum, &b, &x.fock);
    let max_c = (r + ann.len() as i64 - 1).max(-1);
    if max_c < 0 {
        return Ok(LatticeState::new(FockElement::zero(), charge));
    }
    let cre = creation_series(&b, max_c as usize);
    let mut out = FockElement::zero();
    for (a, ann_a) in ann.iter().enumerate() {
        let c = r + a as i64;
        if c < 0 || ann_a.is_zero() {
            continue;
        }
        out = out.add(&cre[c as usize].mul(ann_a));
    }
    if eps < 0 {
        out = out.scale(&CycScalar::from_int(-1));
    }
    Ok(LatticeState::new(out, charge))
}

/// e^{α_i}_{(0)} on s ⊗ e^0, read back in 𝓕 ⊗ e^{α_i}.
pub fn screening(datum: &RootDatum, i: usize, s: &FockElement) -> Result<FockElement> {
    let alpha = LatticeVector::simple_root(datum.rank(), i);
    Ok(vertex_mode(datum, &alpha, 0, &LatticeState::neutral(datum, s.clone()))?.fock)
}

#[derive(Clone, Debug)]
pub struct Verification {
    /// Screening residual for each simple root.
    pub residuals: Vec<FockElement>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(FockElement::is_zero)
    }
}

pub fn verify_in_w(datum: &RootDatum, w: &FockElement) -> Result<Verification> {
    let residuals = (0..datum.rank()).map(|i| screening(datum, i, w)).collect::<Result<_>>()?;
    Ok(Verification { residuals })
}

/// ∂I/∂y_k at y = (1,0,…,0), the quantity normalized to 1 in the normal form.
fn jacobian_entry(p: &Poly, k: usize) -> CycScalar {
    let Some(d) = p.total_degree() else {
        return CycScalar::zero();
    };
    if d == 0 {
        return CycScalar::zero();
    }
    let mut e = vec![0u32; p.nvars()];
    e[0] = d - 1;
    e[k] += 1;
    let c = p.coeff(&e);
    if k == 0 {
        &c * &CycScalar::from_int(d as i64)
    } else {
        c
    }
}

/// Groups candidates by degree and recombines within each degree so that
/// ∂I_i/∂y_{ℓ-1-i}(1,0,…,0) = δ. Returns the recombined list in index order.
fn normalize_by_jacobian<T: Clone>(
    datum: &RootDatum,
    cands: &[(u32, T)],
    entry: impl Fn(&T, usize) -> CycScalar,
    combine: impl Fn(&[(CycScalar, &T)]) -> T,
) -> Result<Vec<T>> {
    let l = datum.rank();
    let mut out: Vec<Option<T>> = vec![None; l];
    let mut degrees: Vec<u32> = datum.exponents.iter().map(|m| m + 1).collect();
    degrees.dedup();
    for d in degrees {
        let targets: Vec<usize> = (0..l).filter(|&i| datum.exponents[i] + 1 == d).collect();
        let gens: Vec<&T> = cands.iter().filter(|(dd, _)| *dd == d).map(|(_, g)| g).collect();
        if gens.len() != targets.len() {
            return Err(Error::DegenerateJacobian(format!(
                "{} candidates of degree {d}, expected {}",
                gens.len(),
                targets.len()
            )));
        }
        // m[t][g] = ∂g/∂y_{partner(t)}(e_0)
        let m: Matrix = targets
            .iter()
            .map(|&t| gens.iter().map(|g| entry(g, datum.partner(t))).collect())
            .collect();
        let inv = linalg::inverse(&linalg::transpose(&m)).map_err(|_| {
            Error::DegenerateJacobian(format!("Jacobian block at degree {d} is singular"))
        })?;
        for (ti, &t) in targets.iter().enumerate() {
            let parts: Vec<(CycScalar, &T)> =
                gens.iter().enumerate().map(|(gi, g)| (inv[ti][gi].clone(), *g)).collect();
            out[t] = Some(combine(&parts));
        }
    }
    Ok(out.into_iter().map(|x| x.expect("every exponent has a generator")).collect())
}

/// Weyl-invariant generators I_1..I_ℓ in eigen-coordinates, in the normal
/// form I_i = c·y_0^{m_i} y_{ℓ-1-i} + (lower powers of y_0) with
/// ∂I_i/∂y_{ℓ-1-i}(1,0,…,0) = 1.
pub fn invariant_generators(datum: &RootDatum) -> Result<Vec<Poly>> {
    let l = datum.rank();
    let x = datum.ambient_coordinate_forms().ok_or_else(|| {
        Error::Unsupported(format!("no classical invariants for {}; use kernel_solve", datum.kind))
    })?;
    let power_sum = |k: u32| x.iter().fold(Poly::zero(l), |acc, xa| acc.add(&xa.pow(k)));
    let raw: Vec<(u32, Poly)> = match datum.kind.family {
        Family::A => (2..=l as u32 + 1).map(|k| (k, power_sum(k))).collect(),
        Family::D => {
            let mut v: Vec<(u32, Poly)> = (1..l as u32).map(|k| (2 * k, power_sum(2 * k))).collect();
            let prod = x.iter().fold(Poly::constant(l, CycScalar::one()), |acc, xa| acc.mul(xa));
            v.push((l as u32, prod));
            v
        }
        Family::E => unreachable!("E types have no ambient lattice"),
    };
    normalize_by_jacobian(datum, &raw, jacobian_entry, |parts| {
        parts.iter().fold(Poly::zero(l), |acc, (c, p)| acc.add(&p.scale(c)))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Builtin,
    KernelSolve,
    ModeConstruction,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Builtin => "builtin",
            Strategy::KernelSolve => "kernel_solve",
            Strategy::ModeConstruction => "mode_construction",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "builtin" => Ok(Strategy::Builtin),
            "kernel_solve" | "kernel" => Ok(Strategy::KernelSolve),
            "mode_construction" | "modes" => Ok(Strategy::ModeConstruction),
            _ => Err(Error::Parse(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Normal-form functional of a Fock element: the Jacobian entry of its
/// t^{-1}-only part.
fn fock_jacobian_entry(datum: &RootDatum, w: &FockElement, k: usize) -> CycScalar {
    jacobian_entry(&w.t1_part(datum.rank()), k)
}

/// Rescales and (for a repeated exponent) recombines generators so their
/// t^{-1}-only parts are in the normal form.
pub fn normalize_generators(datum: &RootDatum, raw: &[FockElement]) -> Result<Vec<FockElement>> {
    let cands: Vec<(u32, FockElement)> = raw
        .iter()
        .map(|w| {
            w.homogeneous_degree()
                .map(|d| (d, w.clone()))
                .ok_or_else(|| Error::Unsupported("generator is not homogeneous".into()))
        })
        .collect::<Result<_>>()?;
    normalize_by_jacobian(datum, &cands, |w, k| fock_jacobian_entry(datum, w, k), |parts| {
        parts.iter().fold(FockElement::zero(), |acc, (c, w)| acc.add(&w.scale(c)))
    })
}

pub fn w_generators(datum: &RootDatum, strategy: Strategy) -> Result<Vec<FockElement>> {
    let kind = datum.kind;
    match strategy {
        Strategy::Builtin => {
            let raw = match (kind.family, kind.rank) {
                (Family::A, 1) => vec![FockElement::gen(0, 1).pow(2)],
                (Family::D, 4) => d4_printed_generators(datum)?,
                _ => {
                    return Err(Error::Unsupported(format!(
                        "no builtin generators for {kind}; builtin covers A1 and D4"
                    )))
                }
            };
            normalize_generators(datum, &raw)
        }
        Strategy::KernelSolve => kernel_solve(datum),
        Strategy::ModeConstruction => {
            if !(kind.family == Family::D && kind.rank == 4) {
                return Err(Error::Unsupported(format!(
                    "mode construction is implemented for D4 only, not {kind}"
                )));
            }
            normalize_generators(datum, &d4_mode_generators(datum)?)
        }
    }
}

/// The construction used when none is requested: the built-in generators
/// where they exist, the kernel of the screenings otherwise.
pub fn default_strategy(datum: &RootDatum) -> Strategy {
    match (datum.kind.family, datum.kind.rank) {
        (Family::A, 1) | (Family::D, 4) => Strategy::Builtin,
        _ => Strategy::KernelSolve,
    }
}

/// Normalized generators together with a record of which indices had to be
/// replaced because the requested construction is not annihilated by the
/// screenings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pub strategy: Strategy,
    pub generators: Vec<FockElement>,
    /// 0-based indices replaced, with the strategy that supplied the replacement.
    pub replaced: Vec<(usize, Strategy)>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorFile {
    schema: String,
    family: String,
    rank: usize,
    conductor: u32,
    strategy: Strategy,
    /// 1-based indices.
    replaced: Vec<(usize, Strategy)>,
    generators: Vec<FockElement>,
}

impl GeneratorSet {
    pub const SCHEMA: &'static str = "wce-generators/1";

    pub fn provenance(&self, i: usize) -> Strategy {
        self.replaced.iter().find(|(k, _)| *k == i).map_or(self.strategy, |(_, s)| *s)
    }

    pub fn to_json(&self, datum: &RootDatum) -> String {
        let file = GeneratorFile {
            schema: Self::SCHEMA.into(),
            family: datum.kind.family.to_string(),
            rank: datum.rank(),
            conductor: datum.conductor,
            strategy: self.strategy,
            replaced: self.replaced.iter().map(|&(i, s)| (i + 1, s)).collect(),
            generators: self.generators.clone(),
        };
        serde_json::to_string_pretty(&file).expect("generators serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeneratorFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema != Self::SCHEMA {
            return Err(Error::Parse(format!("unexpected schema {}", file.schema)));
        }
        if file.replaced.iter().any(|&(i, _)| i == 0 || i > file.generators.len()) {
            return Err(Error::Parse("replaced index out of range".into()));
        }
        Ok(GeneratorSet {
            strategy: file.strategy,
            generators: file.generators,
            replaced: file.replaced.into_iter().map(|(i, s)| (i - 1, s)).collect(),
        })
    }
}

/// Builds generators with `strategy`, screening each one. Builtin generators
/// that fail are swapped for the matching kernel generator.
pub fn resolve_generators(datum: &RootDatum, strategy: Strategy) -> Result<GeneratorSet> {
    let mut generators = w_generators(datum, strategy)?;
    let mut failed = Vec::new();
    for (i, w) in generators.iter().enumerate() {
        if !verify_in_w(datum, w)?.passed() {
            failed.push(i);
        }
    }
    if failed.is_empty() {
        return Ok(GeneratorSet { strategy, generators, replaced: Vec::new() });
    }
    if strategy != Strategy::Builtin {
        return Err(Error::KernelSelection {
            index: failed[0] + 1,
            reason: format!("{} generator fails the screening check", strategy.name()),
            kernel_dim: 0,
        });
    }
    let backup = Strategy::KernelSolve;
    let alt = w_generators(datum, backup)?;
    let mut replaced = Vec::new();
    for i in failed {
        if !verify_in_w(datum, &alt[i])?.passed() {
            return Err(Error::KernelSelection {
                index: i + 1,
                reason: "no construction produced a generator annihilated by the screenings".into(),
                kernel_dim: 0,
            });
        }
        generators[i] = alt[i].clone();
        replaced.push((i, backup));
    }
    Ok(GeneratorSet { strategy, generators, replaced })
}

/// The explicit D4 generators w_1..w_4 as printed, before normalization.
pub fn d4_printed_generators(datum: &RootDatum) -> Result<Vec<FockElement>> {
    let n = datum.conductor;
    let up = |i: usize, k: u32| FockElement::gen(i - 1, k);
    let lo = |i: usize, k: u32| FockElement::gen(datum.partner(i - 1), k);
    let r = |p: i64, q: i64| CycScalar::from_rational(&rat(p, q));
    let sqrt2 = sqrt_of_integer(2, n)?;
    let contract = |a: u32, b: u32| {
        (1..=4).fold(FockElement::zero(), |acc, al| acc.add(&up(al, a).mul(&lo(al, b))))
    };
    let p = |i: usize| up(i, 1);
    let q = |i: usize| up(i, 3);

    let w1 = contract(1, 1);
    let cubes14 = p(1).pow(3).add(&p(4).pow(3));
    let wk = |k: usize| {
        contract(1, 3)
            .scale(&r(2, 1))
            .add(&contract(2, 2).scale(&r(3, 4)))
            .add(&w1.pow(2).scale(&r(1, 8)))
            .add(&p(1).mul(&lo(k, 1).pow(2)).mul(&p(4)))
            .add(&p(k).pow(4).scale(&r(1, 6)))
            .sub(&p(k).mul(&lo(k, 1).pow(3)).scale(&r(1, 3)))
            .sub(&cubes14.mul(&p(k)).scale(&(&sqrt2 * &r(1, 3))))
    };

    let s23 = p(2).add(&p(3));
    let p14 = p(1).mul(&p(4));
    let p23 = p(2).mul(&p(3));
    let inv_sqrt2 = sqrt2.inv()?;
    let mut w4 = contract(5, 1)
        .scale(&r(2, 5))
        .add(&contract(4, 2).scale(&r(1, 4)))
        .add(&contract(3, 3).scale(&r(1, 9)));
    w4 = w4.add(
        &p(1).pow(6).sub(&p(2).pow(6)).sub(&p(3).pow(6)).add(&p(4).pow(6)).scale(&r(1, 3240)),
    );
    w4 = w4.sub(
        &cubes14
            .mul(&s23.pow(3).add(&s23.mul(&p14).scale(&r(3, 1))))
            .scale(&(&inv_sqrt2 * &r(1, 324))),
    );
    let quartic = p(2)
        .pow(4)
        .sub(&p(2).pow(3).mul(&p(3)).scale(&r(2, 1)))
        .sub(&p(2).mul(&p(3).pow(3)).scale(&r(2, 1)))
        .add(&p(3).pow(4));
    let bracket = p14
        .mul(&s23.pow(4))
        .add(&p14.pow(2).mul(&s23.pow(2)).scale(&r(6, 1)))
        .add(&p14.pow(3).scale(&r(8, 3)))
        .add(&p23.mul(&quartic))
        .add(&p23.pow(3).scale(&r(10, 3)));
    w4 = w4.add(&bracket.scale(&r(1, 432)));
    w4 = w4.add(
        &q(1)
            .mul(&p(4))
            .add(&q(4).mul(&p(1)))
            .mul(&s23.pow(2).add(&p14.scale(&r(2, 1))))
            .scale(&r(1, 18)),
    );
    w4 = w4.sub(
        &cubes14
            .mul(&q(2).add(&q(3)))
            .add(&s23.mul(&p(1).pow(2).mul(&q(1)).add(&p(4).pow(2).mul(&q(4)))).scale(&r(3, 1)))
            .scale(&(&inv_sqrt2 * &r(1, 27))),
    );
    for k in 2..=3 {
        let inner = p(k)
            .pow(3)
            .scale(&r(2, 1))
            .sub(&lo(k, 1).pow(3))
            .scale(&r(1, 3))
            .add(&p23.mul(&lo(k, 1).scale(&r(2, 1)).sub(&p(k))))
            .add(&p14.mul(&s23).scale(&r(2, 1)));
        w4 = w4.add(&q(k).mul(&inner).scale(&r(1, 18)));
    }
    let (w2, w3) = (wk(2), wk(3));
    Ok(vec![w1, w2, w3, w4])
}

/// The D4 generators built from vertex operator modes on the ambient
/// lattice: w̃_i = Σ_j e^{±e_j}_{(-m_i-1)} e^{∓e_j}, w̃_3 the product of the
/// four e_j t^{-1}, and the √-3 recombination of w̃_2, w̃_3.
pub fn d4_mode_generators(datum: &RootDatum) -> Result<Vec<FockElement>> {
    let n = datum.conductor;
    let dim = 4;
    let e = |j: usize, s: i64| {
        let mut c = vec![0i64; dim];
        c[j] = s;
        LatticeVector::ambient(&c)
    };
    let tilde = |m: u32| -> Result<FockElement> {
        let mut acc = FockElement::zero();
        for j in 0..dim {
            for s in [1i64, -1] {
                let state = LatticeState::new(FockElement::one(), e(j, -s));
                let out = vertex_mode(datum, &e(j, s), -(m as i64) - 1, &state)?;
                acc = acc.add(&out.fock);
            }
        }
        Ok(acc)
    };
    let mut w3t = FockElement::one();
    for j in 0..dim {
        let b = datum.eigen_coords(&e(j, 1))?;
        let mut lin = FockElement::zero();
        for (k, a) in b.iter().enumerate() {
            lin.add_term(vec![(k as u16, 1)], a.clone());
        }
        w3t = w3t.mul(&lin);
    }
    let w1 = tilde(datum.exponents[0])?;
    let w2t = tilde(datum.exponents[1])?;
    let w4 = tilde(datum.exponents[3])?;
    let sqrt_m3 = sqrt_of_integer(-3, n)?;
    let three = CycScalar::from_int(3);
    let w2 = w2t.scale(&three).add(&w3t.scale(&sqrt_m3));
    let w3 = w2t.scale(&three).sub(&w3t.scale(&sqrt_m3));
    Ok(vec![w1, w2, w3, w4])
}

/// All Fock monomials of degree `d` with Σ m_j ≡ 0 mod h.
pub fn invariant_monomials(datum: &RootDatum, d: u32) -> Vec<FockMonomial> {
    let l = datum.rank() as u16;
    let mut syms: Vec<Sym> = Vec::new();
    for n in 1..=d as u16 {
        for j in 0..l {
            syms.push((j, n));
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(syms: &[Sym], start: usize, left: u32, cur: &mut Vec<Sym>, out: &mut Vec<FockMonomial>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..syms.len() {
            let n = syms[k].1 as u32;
            if n > left {
                continue;
            }
            cur.push(syms[k]);
            rec(syms, k, left - n, cur, out);
            cur.pop();
        }
    }
    rec(&syms, 0, d, &mut cur, &mut out);
    out.retain(|m| sigma_weight(datum, m) == 0);
    for m in out.iter_mut() {
        m.sort_unstable();
    }
    out.sort();
    out
}

/// Joint kernel of the screenings on the σ-invariant degree-d component.
pub fn w_component(datum: &RootDatum, d: u32) -> Result<(Vec<FockMonomial>, Vec<Vec<CycScalar>>)> {
    let basis = invariant_monomials(datum, d);
    let images: Vec<Vec<FockElement>> = basis
        .par_iter()
        .map(|m| {
            let s = FockElement::from_terms([(m.clone(), CycScalar::one())]);
            (0..datum.rank()).map(|i| screening(datum, i, &s)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut row_index: BTreeMap<(usize, FockMonomial), usize> = BTreeMap::new();
    for img in &images {
        for (i, f) in img.iter().enumerate() {
            for (m, _) in f.terms() {
                let next = row_index.len();
                row_index.entry((i, m.clone())).or_insert(next);
            }
        }
    }
    let mut mat: Matrix = vec![vec![CycScalar::zero(); basis.len()]; row_index.len()];
    for (col, img) in images.iter().enumerate() {
        for (i, f) in img.iter().enumerate() {
            for (m, c) in f.terms() {
                mat[row_index[&(i, m.clone())]][col] = c.clone();
            }
        }
    }
    let ker = linalg::kernel(&mat, basis.len());
    Ok((basis, ker))
}

/// Generators from the exact kernel of the screening system.
pub fn kernel_solve(datum: &RootDatum) -> Result<Vec<FockElement>> {
    let l = datum.rank();
    let top = (l - 1) as u16;
    let mut out: Vec<Option<FockElement>> = vec![None; l];
    let mut degrees: Vec<u32> = datum.exponents.iter().map(|m| m + 1).collect();
    degrees.dedup();
    for d in degrees {
        let targets: Vec<usize> = (0..l).filter(|&i| datum.exponents[i] + 1 == d).collect();
        let (basis, ker) = w_component(datum, d)?;
        let top_mono = |i: usize| {
            let mut m = vec![(top, 1u16); d as usize - 1];
            m.push((i as u16, 1));
            m.sort_unstable();
            m
        };
        // reorder columns: leading monomials first
        let mut order: Vec<usize> = Vec::new();
        for &t in &targets {
            let tm = top_mono(t);
            let pos = basis.iter().position(|m| *m == tm).ok_or_else(|| Error::KernelSelection {
                index: t + 1,
                reason: "leading monomial is not σ-invariant".into(),
                kernel_dim: ker.len(),
            })?;
            order.push(pos);
        }
        let rest: Vec<usize> = (0..basis.len()).filter(|c| !order.contains(c)).collect();
        order.extend(rest);
        let mut rows: Matrix =
            ker.iter().map(|v| order.iter().map(|&c| v[c].clone()).collect()).collect();
        let pivots = linalg::rref(&mut rows);
        for (ti, &t) in targets.iter().enumerate() {
            let Some(r) = pivots.iter().position(|&p| p == ti) else {
                return Err(Error::KernelSelection {
                    index: t + 1,
                    reason: "no kernel element carries the normal-form leading monomial".into(),
                    kernel_dim: ker.len(),
                });
            };
            let mut w = FockElement::zero();
            for (k, &c) in order.iter().enumerate() {
                w.add_term(basis[c].clone(), rows[r][k].clone());
            }
            if t == l - 1 {
                w = w.scale_rational(&rat(1, d as i64));
            }
            out[t] = Some(w);
        }
    }
    Ok(out.into_iter().map(|w| w.expect("generator for every index")).collect())
}

/// Leading coefficient data of a generator: its Jacobian entries.
pub fn normal_form_entries(datum: &RootDatum, w: &FockElement) -> Vec<CycScalar> {
    (0..datum.rank()).map(|k| fock_jacobian_entry(datum, w, k)).collect()
}

/// Checks that `p` lies in the span of products of `lower` of total degree d.
pub fn is_decomposable(p: &Poly, lower: &[Poly]) -> bool {
    let Some(d) = p.total_degree() else {
        return true;
    };
    let nv = p.nvars();
    let degs: Vec<u32> = lower.iter().map(|q| q.total_degree().unwrap_or(0)).collect();
    let mut products: Vec<Poly> = Vec::new();
    fn rec(
        lower: &[Poly],
        degs: &[u32],
        start: usize,
        left: u32,
        cur: Poly,
        depth: usize,
        out: &mut Vec<Poly>,
    ) {
        if left == 0 {
            if depth >= 2 {
                out.push(cur);
            }
            return;
        }
        for k in start..lower.len() {
            if degs[k] == 0 || degs[k] > left {
                continue;
            }
            rec(lower, degs, k, left - degs[k], cur.mul(&lower[k]), depth + 1, out);
        }
    }
    rec(lower, &degs, 0, d, Poly::constant(nv, CycScalar::one()), 0, &mut products);
    // solve p = Σ c_k products_k
    let mut monos: Vec<Vec<u32>> = p.terms().map(|(e, _)| e.clone()).collect();
    for q in &products {
        monos.extend(q.terms().map(|(e, _)| e.clone()));
    }
    monos.sort();
    monos.dedup();
    let mut mat: Matrix = monos
        .iter()
        .map(|e| {
            let mut row: Vec<CycScalar> = products.iter().map(|q| q.coeff(e)).collect();
            row.push(p.coeff(e));
            row
        })
        .collect();
    let pivots = linalg::rref(&mut mat);
    !pivots.contains(&products.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> RootDatum {
        RootDatum::build("A1".parse().unwrap()).unwrap()
    }

    /// αt^{-1} in eigen symbols.
    fn alpha_t1(d: &RootDatum) -> FockElement {
        let a = d.eigen_coords(&LatticeVector::root(&[1])).unwrap();
        FockElement::from_terms([(vec![(0, 1)], a[0].clone())])
    }

    #[test]
    fn heisenberg_examples() {
        let d = a1();
        let alpha = d.eigen_coords(&LatticeVector::root(&[1])).unwrap();
        let x = LatticeState::neutral(&d, alpha_t1(&d));
        let y = heisenberg_act(&d, &alpha, 1, &x).unwrap();
        assert_eq!(y.fock, FockElement::scalar(CycScalar::from_int(2)));
        assert!(heisenberg_act(&d, &alpha, 0, &x).unwrap().fock.is_zero());
        let sq = LatticeState::neutral(&d, alpha_t1(&d).pow(2));
        assert!(heisenberg_act(&d, &alpha, 2, &sq).unwrap().fock.is_zero());
    }

    #[test]
    fn a1_screening_examples() {
        let d = a1();
        let s = alpha_t1(&d);
        assert_eq!(screening(&d, 0, &s).unwrap(), FockElement::scalar(CycScalar::from_int(-2)));
        assert!(screening(&d, 0, &s.pow(2)).unwrap().is_zero());
        assert!(screening(&d, 0, &FockElement::one()).unwrap().is_zero());
        let v = verify_in_w(&d, &s).unwrap();
        assert!(!v.passed());
        assert!(verify_in_w(&d, &FockElement::one()).unwrap().passed());
    }

    #[test]
    fn a1_vertex_modes() {
        let d = a1();
        let alpha = LatticeVector::root(&[1]);
        let vac = LatticeState::neutral(&d, FockElement::one());
        assert!(vertex_mode(&d, &alpha, 0, &vac).unwrap().fock.is_zero());
        let x = LatticeState::neutral(&d, alpha_t1(&d));
        let y = vertex_mode(&d, &alpha, 0, &x).unwrap();
        assert_eq!(y.fock, FockElement::scalar(CycScalar::from_int(-2)));
        assert_eq!(y.charge, alpha);
        // e^α_{(-2)} e^{-α}: cubic Taylor coefficient S_3(α) with sign ε(α,-α) = -1
        let x = LatticeState::new(FockElement::one(), alpha.neg());
        let y = vertex_mode(&d, &alpha, -2, &x).unwrap();
        let a = alpha_t1(&d);
        let a2 = FockElement::from_terms([(vec![(0, 2)], d.eigen_coords(&alpha).unwrap()[0].clone())]);
        let a3 = FockElement::from_terms([(vec![(0, 3)], d.eigen_coords(&alpha).unwrap()[0].clone())]);
        let s3 = a
            .pow(3)
            .scale_rational(&rat(1, 6))
            .add(&a.mul(&a2).scale_rational(&rat(1, 2)))
            .add(&a3.scale_rational(&rat(1, 3)));
        assert_eq!(y.fock, s3.scale(&CycScalar::from_int(-1)));
        assert!(y.charge.is_zero());
    }

    #[test]
    fn a1_generators_agree() {
        let d = a1();
        let b = w_generators(&d, Strategy::Builtin).unwrap();
        let k = w_generators(&d, Strategy::KernelSolve).unwrap();
        assert_eq!(b, k);
        assert_eq!(b[0], FockElement::gen(0, 1).pow(2).scale_rational(&rat(1, 2)));
    }

    #[test]
    fn invariants_are_weyl_invariant() {
        for t in ["A1", "A2", "A3", "D4", "D5"] {
            let d = RootDatum::build(t.parse().unwrap()).unwrap();
            let inv = invariant_generators(&d).unwrap();
            for (i, p) in inv.iter().enumerate() {
                assert_eq!(p.total_degree(), Some(d.exponents[i] + 1), "{t} I_{i}");
                for j in 0..d.rank() {
                    let img = p.substitute(&d.reflection_on_coordinates(j));
                    assert_eq!(&img, p, "{t}: I_{i} not invariant under R_{j}");
                }
                let entries: Vec<CycScalar> =
                    (0..d.rank()).map(|k| jacobian_entry(p, k)).collect();
                for (k, e) in entries.iter().enumerate() {
                    let want = if k == d.partner(i) { CycScalar::one() } else { CycScalar::zero() };
                    assert_eq!(e, &want, "{t}: normal form of I_{i}");
                }
            }
        }
    }

    #[test]
    fn fock_text_round_trip() {
        let d = RootDatum::build("D4".parse().unwrap()).unwrap();
        let w = &w_generators(&d, Strategy::Builtin).unwrap()[1];
        let back = FockElement::parse_text(&w.to_text()).unwrap();
        assert_eq!(&back, w);
        let json = serde_json::to_string(w).unwrap();
        let back: FockElement = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, w);
    }
}
