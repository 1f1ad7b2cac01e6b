//! ADE root data: Cartan matrix, Coxeter element σ = R_1⋯R_ℓ, Coxeter number,
//! exponents, a σ-eigenbasis normalized so that (φ^i|φ^j) = δ_{i+j,ℓ+1}, and
//! the bimultiplicative cocycle ε(α,β) = (-1)^{((1-σ)^{-1}α|β)}.
//!
//! Indices are 0-based throughout the crate: eigenvector `j` pairs with
//! `ℓ-1-j`, and the "first" coordinate φ_1 of the literature is `ℓ-1`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::numfield::{rat, rat_int, sqrt_of_integer, sqrt_of_rational, CycScalar, Rational};
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::D => "D",
            Family::E => "E",
        };
        write!(f, "{s}")
    }
}

/// A Dynkin type such as `A1`, `D4`, `E6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DynkinType {
    pub family: Family,
    pub rank: usize,
}

impl DynkinType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
        };
        if ok {
            Ok(DynkinType { family, rank })
        } else {
            Err(Error::Unsupported(format!("root system {family}{rank}")))
        }
    }
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

impl FromStr for DynkinType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad root system type `{s}`"));
        let mut chars = s.chars();
        let family = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Family::A,
            Some('D') => Family::D,
            Some('E') => Family::E,
            _ => return Err(bad()),
        };
        let rank: usize = chars.as_str().trim_start_matches('_').parse().map_err(|_| bad())?;
        DynkinType::new(family, rank)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Coordinates with respect to the simple roots α_1..α_ℓ.
    SimpleRoot,
    /// Standard orthonormal coordinates of the ambient ℤ^n (A and D types).
    Ambient,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeVector {
    pub basis: Basis,
    pub coords: Vec<Rational>,
}

impl LatticeVector {
    pub fn root(coords: &[i64]) -> Self {
        LatticeVector { basis: Basis::SimpleRoot, coords: coords.iter().map(|&c| rat_int(c)).collect() }
    }

    pub fn ambient(coords: &[i64]) -> Self {
        LatticeVector { basis: Basis::Ambient, coords: coords.iter().map(|&c| rat_int(c)).collect() }
    }

    pub fn simple_root(rank: usize, i: usize) -> Self {
        let mut c = vec![0; rank];
        c[i] = 1;
        Self::root(&c)
    }

    pub fn zero_like(&self) -> Self {
        LatticeVector { basis: self.basis, coords: vec![Rational::zero(); self.coords.len()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("adding vectors in different bases".into()));
        }
        Ok(LatticeVector {
            basis: self.basis,
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        LatticeVector { basis: self.basis, coords: self.coords.iter().map(|c| -c).collect() }
    }
}

/// How the simple roots sit inside an orthonormal ambient lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmbientEmbedding {
    pub dim: usize,
    /// `roots[i]` = α_i in ambient coordinates.
    pub roots: Vec<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub kind: DynkinType,
    pub cartan: Vec<Vec<i64>>,
    /// Coxeter element in the simple-root basis (acts on column vectors).
    pub sigma: Vec<Vec<i64>>,
    pub h: u32,
    pub exponents: Vec<u32>,
    pub conductor: u32,
    /// `eigvecs[j]` = φ^{j+1} in simple-root coordinates.
    pub eigvecs: Vec<Vec<CycScalar>>,
    pub ambient: Option<AmbientEmbedding>,
    /// ((1-σ)^{-1})^T A: ε(α,β) = (-1)^{α^T E β}.
    cocycle: Vec<Vec<Rational>>,
}

pub fn cartan_matrix(kind: DynkinType) -> Vec<Vec<i64>> {
    let l = kind.rank;
    let mut a = vec![vec![0i64; l]; l];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match kind.family {
        Family::A => {
            for i in 0..l - 1 {
                link(i, i + 1);
            }
        }
        Family::D => {
            for i in 0..l - 2 {
                link(i, i + 1);
            }
            link(l - 3, l - 1);
        }
        Family::E => {
            // Bourbaki numbering: 1-3-4-5-…-ℓ chain, 2 attached to 4
            link(0, 2);
            link(1, 3);
            for i in 2..l - 1 {
                link(i, i + 1);
            }
        }
    }
    a
}

fn ambient_embedding(kind: DynkinType) -> Option<AmbientEmbedding> {
    let l = kind.rank;
    match kind.family {
        Family::A => {
            let roots = (0..l)
                .map(|i| {
                    let mut v = vec![0; l + 1];
                    v[i] = 1;
                    v[i + 1] = -1;
                    v
                })
                .collect();
            Some(AmbientEmbedding { dim: l + 1, roots })
        }
        Family::D => {
            let mut roots: Vec<Vec<i64>> = (0..l - 1)
                .map(|i| {
                    let mut v = vec![0; l];
                    v[i] = 1;
                    v[i + 1] = -1;
                    v
                })
                .collect();
            let mut last = vec![0; l];
            last[l - 2] = 1;
            last[l - 1] = 1;
            roots.push(last);
            Some(AmbientEmbedding { dim: l, roots })
        }
        Family::E => None,
    }
}

fn int_mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn to_cyc(a: &[Vec<i64>]) -> Matrix {
    a.iter().map(|r| r.iter().map(|&x| CycScalar::from_int(x)).collect()).collect()
}

/// R_i in the simple-root basis: v ↦ v - (α_i|v) α_i.
pub fn simple_reflection(cartan: &[Vec<i64>], i: usize) -> Vec<Vec<i64>> {
    let l = cartan.len();
    let mut r = vec![vec![0i64; l]; l];
    for (k, row) in r.iter_mut().enumerate() {
        row[k] = 1;
    }
    for k in 0..l {
        r[i][k] -= cartan[i][k];
    }
    r
}

impl RootDatum {
    /// Builds the root datum with the default conductor lcm(24, 2h).
    pub fn build(kind: DynkinType) -> Result<Self> {
        Self::build_with_conductor(kind, None)
    }

    pub fn build_with_conductor(kind: DynkinType, conductor: Option<u32>) -> Result<Self> {
        let kind = DynkinType::new(kind.family, kind.rank)?;
        let l = kind.rank;
        let cartan = cartan_matrix(kind);
        let mut sigma = simple_reflection(&cartan, 0);
        for i in 1..l {
            sigma = int_mat_mul(&sigma, &simple_reflection(&cartan, i));
        }
        let identity: Vec<Vec<i64>> =
            (0..l).map(|i| (0..l).map(|j| i64::from(i == j)).collect()).collect();
        let mut h = 1u32;
        let mut power = sigma.clone();
        while power != identity {
            power = int_mat_mul(&power, &sigma);
            h += 1;
            if h > 1000 {
                return Err(Error::Unsupported("Coxeter element of unexpected order".into()));
            }
        }
        let default_n = 24u32.lcm(&(2 * h));
        let n = conductor.unwrap_or(default_n);
        if n % h != 0 {
            return Err(Error::Unsupported(format!(
                "conductor {n} is not a multiple of the Coxeter number {h}"
            )));
        }

        // exponents: multiplicity of ζ_h^k as an eigenvalue
        let sig = to_cyc(&sigma);
        let mut exponents = Vec::new();
        let mut eigenspaces = Vec::new();
        for k in 1..h {
            let z = CycScalar::zeta(h, k as i64).promote(n);
            let mut m = sig.clone();
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = &row[i] - &z;
            }
            let ker = linalg::kernel(&m, l);
            for _ in 0..ker.len() {
                exponents.push(k);
            }
            eigenspaces.push((k, ker));
        }
        if exponents.len() != l {
            return Err(Error::Unsupported("σ is not diagonalizable over the working field".into()));
        }

        let ambient = ambient_embedding(kind);
        let mut datum = RootDatum {
            kind,
            cartan,
            sigma,
            h,
            exponents,
            conductor: n,
            eigvecs: Vec::new(),
            ambient,
            cocycle: Vec::new(),
        };
        datum.eigvecs = if kind.family == Family::D && l == 4 {
            datum.d4_fixed_eigenbasis()?
        } else {
            datum.normalized_eigenbasis(&eigenspaces)?
        };
        datum.cocycle = datum.cocycle_matrix()?;
        Ok(datum)
    }

    pub fn rank(&self) -> usize {
        self.kind.rank
    }

    /// η_{ij} = δ_{i+j,ℓ-1} (0-based).
    pub fn eta(&self, i: usize, j: usize) -> bool {
        i + j + 1 == self.rank()
    }

    pub fn partner(&self, j: usize) -> usize {
        self.rank() - 1 - j
    }

    /// Bilinear form on simple-root coordinates with field entries.
    pub fn pair_root_coords(&self, v: &[CycScalar], w: &[CycScalar]) -> CycScalar {
        let mut acc = CycScalar::zero();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, wj) in w.iter().enumerate() {
                let a = self.cartan[i][j];
                if a != 0 && !wj.is_zero() {
                    acc += &(&(vi * wj) * &CycScalar::from_int(a));
                }
            }
        }
        acc
    }

    /// Exact value of (v|w) for two lattice vectors in the same basis.
    pub fn pair(&self, v: &LatticeVector, w: &LatticeVector) -> Result<Rational> {
        if v.basis != w.basis {
            return Err(Error::BasisMismatch(format!("{:?} vs {:?}", v.basis, w.basis)));
        }
        match v.basis {
            Basis::SimpleRoot => {
                let mut acc = Rational::zero();
                for (i, vi) in v.coords.iter().enumerate() {
                    for (j, wj) in w.coords.iter().enumerate() {
                        acc += vi * wj * rat_int(self.cartan[i][j]);
                    }
                }
                Ok(acc)
            }
            Basis::Ambient => Ok(v.coords.iter().zip(&w.coords).map(|(a, b)| a * b).sum()),
        }
    }

    /// (v|φ^j) for a lattice vector v.
    fn pair_with_eigvec(&self, v: &LatticeVector, j: usize) -> Result<CycScalar> {
        let vc: Vec<CycScalar> = match v.basis {
            Basis::SimpleRoot => v.coords.iter().map(CycScalar::from_rational).collect(),
            Basis::Ambient => self.ambient_to_root(v)?,
        };
        Ok(self.pair_root_coords(&vc, &self.eigvecs[j]))
    }

    /// Coordinates a_j with v = Σ_j a_j φ^j, i.e. a_j = (v|φ^{ℓ-1-j}).
    pub fn eigen_coords(&self, v: &LatticeVector) -> Result<Vec<CycScalar>> {
        (0..self.rank()).map(|j| self.pair_with_eigvec(v, self.partner(j))).collect()
    }

    /// Eigen coordinates of a field vector given in simple-root coordinates.
    pub fn eigen_coords_of_field(&self, v: &[CycScalar]) -> Vec<CycScalar> {
        (0..self.rank())
            .map(|j| self.pair_root_coords(v, &self.eigvecs[self.partner(j)]))
            .collect()
    }

    /// Simple-root coordinates of Σ_j a_j φ^j.
    pub fn field_from_eigen(&self, a: &[CycScalar]) -> Vec<CycScalar> {
        let l = self.rank();
        let mut out = vec![CycScalar::zero(); l];
        for (j, aj) in a.iter().enumerate() {
            if aj.is_zero() {
                continue;
            }
            for (o, e) in out.iter_mut().zip(&self.eigvecs[j]) {
                *o += &(aj * e);
            }
        }
        out
    }

    fn ambient_to_root(&self, v: &LatticeVector) -> Result<Vec<CycScalar>> {
        let amb = self
            .ambient
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("{} has no ambient lattice", self.kind)))?;
        // Project onto span of roots: solve Gram system (α_i|α_j) x = (α_i|v).
        let rhs: Vec<CycScalar> = amb
            .roots
            .iter()
            .map(|r| {
                let s: Rational = r.iter().zip(&v.coords).map(|(&a, b)| rat_int(a) * b).sum();
                CycScalar::from_rational(&s)
            })
            .collect();
        let inv = linalg::inverse(&to_cyc(&self.cartan))?;
        Ok(linalg::mat_vec(&inv, &rhs))
    }

    /// φ^j in ambient coordinates, when an ambient lattice exists.
    pub fn eigvec_ambient(&self, j: usize) -> Option<Vec<CycScalar>> {
        let amb = self.ambient.as_ref()?;
        let mut out = vec![CycScalar::zero(); amb.dim];
        for (i, c) in self.eigvecs[j].iter().enumerate() {
            for (o, &r) in out.iter_mut().zip(&amb.roots[i]) {
                if r != 0 {
                    *o += &(c * &CycScalar::from_int(r));
                }
            }
        }
        Some(out)
    }

    fn d4_fixed_eigenbasis(&self) -> Result<Vec<Vec<CycScalar>>> {
        let n = self.conductor;
        let z = |k: i64| CycScalar::zeta(6, k).promote(n);
        let one = CycScalar::one();
        let zero = CycScalar::zero();
        let inv_sqrt3 = sqrt_of_integer(3, n)?.inv()?;
        let inv_sqrt6 = sqrt_of_integer(6, n)?.inv()?;
        let sqrt_m3 = sqrt_of_integer(-3, n)?;
        let phi1: Vec<CycScalar> =
            [z(2), z(1), one.clone(), zero.clone()].iter().map(|c| c * &inv_sqrt3).collect();
        let phi2: Vec<CycScalar> = [-one.clone(), one.clone(), -one.clone(), sqrt_m3]
            .iter()
            .map(|c| c * &inv_sqrt6)
            .collect();
        let phi3: Vec<CycScalar> = phi2.iter().map(CycScalar::conj).collect();
        let phi4: Vec<CycScalar> = phi1.iter().map(CycScalar::conj).collect();
        // ambient → simple-root coordinates (α's span ℝ^4 for D4)
        let amb = self.ambient.as_ref().expect("D4 has an ambient lattice");
        let e: Matrix = (0..4)
            .map(|r| (0..4).map(|c| CycScalar::from_int(amb.roots[c][r])).collect())
            .collect();
        let einv = linalg::inverse(&e)?;
        Ok([phi1, phi2, phi3, phi4].iter().map(|v| linalg::mat_vec(&einv, v)).collect())
    }

    fn normalized_eigenbasis(&self, spaces: &[(u32, Vec<Vec<CycScalar>>)]) -> Result<Vec<Vec<CycScalar>>> {
        let l = self.rank();
        let n = self.conductor;
        let space = |m: u32| -> &Vec<Vec<CycScalar>> {
            &spaces.iter().find(|(k, _)| *k == m).expect("exponent eigenspace").1
        };
        let mut out: Vec<Option<Vec<CycScalar>>> = vec![None; l];
        for i in 0..l {
            let ip = self.partner(i);
            if ip < i {
                continue;
            }
            let m = self.exponents[i];
            let first_one = |v: &[CycScalar]| -> Result<Vec<CycScalar>> {
                let lead = v.iter().find(|c| !c.is_zero()).expect("nonzero eigenvector").inv()?;
                Ok(v.iter().map(|c| c * &lead).collect())
            };
            if ip == i {
                // self-paired middle exponent: real eigenvector scaled to unit norm
                let v = first_one(&space(m)[0])?;
                let r = self.pair_root_coords(&v, &v).to_rational().ok_or_else(|| {
                    Error::Unsupported("non-rational norm for the middle eigenvector".into())
                })?;
                let s = sqrt_of_rational(&r, n)?.inv()?;
                out[i] = Some(v.iter().map(|c| c * &s).collect());
            } else if self.exponents[ip] == m {
                // degenerate pair (eigenvalue -1 of multiplicity two)
                let sp = space(m);
                let u1 = first_one(&sp[0])?;
                let u2 = &sp[1];
                let r1 = self.pair_root_coords(&u1, &u1);
                let c = self.pair_root_coords(&u1, u2).checked_div(&r1)?;
                let u2: Vec<CycScalar> = u2.iter().zip(&u1).map(|(b, a)| b - &(&c * a)).collect();
                let u2 = first_one(&u2)?;
                let r2 = self.pair_root_coords(&u2, &u2);
                let two = rat_int(2);
                let to_q = |x: CycScalar| {
                    x.to_rational()
                        .ok_or_else(|| Error::Unsupported("non-rational eigenspace norm".into()))
                };
                let a = sqrt_of_rational(&(to_q(r1)? * &two), n)?.inv()?;
                let b = &sqrt_of_rational(&(to_q(r2)? * &two), n)?.inv()? * &CycScalar::zeta(4, 1);
                let v: Vec<CycScalar> =
                    u1.iter().zip(&u2).map(|(x, y)| &(x * &a) + &(y * &b)).collect();
                let w: Vec<CycScalar> =
                    u1.iter().zip(&u2).map(|(x, y)| &(x * &a) - &(y * &b)).collect();
                out[i] = Some(v);
                out[ip] = Some(w);
            } else {
                let v = first_one(&space(m)[0])?;
                let w: Vec<CycScalar> = v.iter().map(CycScalar::conj).collect();
                let r = self.pair_root_coords(&v, &w).inv()?;
                out[i] = Some(v);
                out[ip] = Some(w.iter().map(|c| c * &r).collect());
            }
        }
        Ok(out.into_iter().map(|v| v.expect("all eigenvectors assigned")).collect())
    }

    fn cocycle_matrix(&self) -> Result<Vec<Vec<Rational>>> {
        let l = self.rank();
        let mut one_minus: Matrix = to_cyc(&self.sigma).iter().map(|r| r.iter().map(|c| -c).collect()).collect();
        for (i, row) in one_minus.iter_mut().enumerate() {
            row[i] = &row[i] + &CycScalar::one();
        }
        let b = linalg::inverse(&one_minus)
            .map_err(|_| Error::Unsupported("1 - σ is not invertible".into()))?;
        let e = linalg::mat_mul(&linalg::transpose(&b), &to_cyc(&self.cartan));
        let mut out = vec![vec![Rational::zero(); l]; l];
        for i in 0..l {
            for j in 0..l {
                let r = e[i][j].to_rational().expect("rational cocycle matrix");
                if !r.is_integer() {
                    return Err(Error::NonIntegralCocycle(format!(
                        "((1-σ)^-1 α_{} | α_{}) = {r}",
                        i + 1,
                        j + 1
                    )));
                }
                out[i][j] = r;
            }
        }
        Ok(out)
    }

    /// ε(α, β) ∈ {±1}.
    ///
    /// On the root lattice this is (-1)^{((1-σ)^{-1}α|β)}. On the ambient
    /// lattice of the A/D types it is the upper-triangular bimultiplicative
    /// form with ε(e_a, e_b) = -1 for a ≤ b.
    pub fn epsilon(&self, a: &LatticeVector, b: &LatticeVector) -> Result<i8> {
        if a.basis != b.basis {
            return Err(Error::BasisMismatch("ε arguments in different bases".into()));
        }
        let mut exp = Rational::zero();
        match a.basis {
            Basis::SimpleRoot => {
                for (i, ai) in a.coords.iter().enumerate() {
                    for (j, bj) in b.coords.iter().enumerate() {
                        exp += ai * bj * &self.cocycle[i][j];
                    }
                }
            }
            Basis::Ambient => {
                for (i, ai) in a.coords.iter().enumerate() {
                    for bj in &b.coords[i..] {
                        exp += ai * bj;
                    }
                }
            }
        }
        if !exp.is_integer() {
            return Err(Error::NonIntegralCocycle(exp.to_string()));
        }
        let e = exp.to_integer();
        Ok(if e.is_even() { 1 } else { -1 })
    }

    /// (1-σ)^{-1} composed with the pairing, as a rational matrix.
    pub fn cocycle_exponents(&self) -> &[Vec<Rational>] {
        &self.cocycle
    }

    /// All roots in simple-root coordinates.
    pub fn roots(&self) -> Vec<Vec<i64>> {
        let l = self.rank();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for i in 0..l {
            let mut v = vec![0i64; l];
            v[i] = 1;
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            if !seen.insert(v.clone()) {
                continue;
            }
            for i in 0..l {
                let av: i64 = (0..l).map(|k| self.cartan[i][k] * v[k]).sum();
                let mut w = v.clone();
                w[i] -= av;
                if !seen.contains(&w) {
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Images of the eigen-coordinate functions under v ↦ R_i v, as linear
    /// polynomials in y_0..y_{ℓ-1}, where y_k is the coefficient of φ^k and
    /// so equals (φ^{ℓ-1-k}|·).
    pub fn reflection_on_coordinates(&self, i: usize) -> Vec<Poly> {
        let l = self.rank();
        let r = to_cyc(&simple_reflection(&self.cartan, i));
        (0..l)
            .map(|k| {
                // y_k(Rv) = (R φ_k | v), φ_k = φ^{ℓ-1-k}
                let img = linalg::mat_vec(&r, &self.eigvecs[self.partner(k)]);
                let c = self.eigen_coords_of_field(&img);
                // (φ^j|v) = y_{ℓ-1-j}(v)
                let mut coeffs = vec![CycScalar::zero(); l];
                for (j, cj) in c.into_iter().enumerate() {
                    coeffs[self.partner(j)] = cj;
                }
                Poly::linear(&coeffs)
            })
            .collect()
    }

    /// Ambient coordinate functions x_a as linear forms in the eigen coordinates y.
    pub fn ambient_coordinate_forms(&self) -> Option<Vec<Poly>> {
        let amb = self.ambient.as_ref()?;
        let l = self.rank();
        let ambs: Vec<Vec<CycScalar>> = (0..l).map(|j| self.eigvec_ambient(j).unwrap()).collect();
        Some(
            (0..amb.dim)
                .map(|a| {
                    // v = Σ_j y_j φ^j  ⇒  x_a(v) = Σ_j y_j x_a(φ^j)
                    let coeffs: Vec<CycScalar> = ambs.iter().map(|v| v[a].clone()).collect();
                    Poly::linear(&coeffs)
                })
                .collect(),
        )
    }

    /// Exact (φ^i|φ^j).
    pub fn eigen_pairing(&self, i: usize, j: usize) -> CycScalar {
        self.pair_root_coords(&self.eigvecs[i], &self.eigvecs[j])
    }

    /// Rational m_j / h.
    pub fn exponent_ratio(&self, j: usize) -> Rational {
        rat(self.exponents[j] as i64, self.h as i64)
    }

    /// ĉ = 1 - 2/h.
    pub fn central_charge(&self) -> Rational {
        Rational::one() - rat(2, self.h as i64)
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: h = {}, exponents = {:?}, conductor = {}",
            self.kind, self.h, self.exponents, self.conductor
        )
    }
}

/// Integer value of a rational, if it is one and fits.
pub fn as_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d4() -> RootDatum {
        RootDatum::build(DynkinType::new(Family::D, 4).unwrap()).unwrap()
    }

    #[test]
    fn d4_cartan_and_exponents() {
        let d = d4();
        assert_eq!(
            d.cartan,
            vec![vec![2, -1, 0, 0], vec![-1, 2, -1, -1], vec![0, -1, 2, 0], vec![0, -1, 0, 2]]
        );
        assert_eq!(d.h, 6);
        assert_eq!(d.exponents, vec![1, 3, 3, 5]);
        assert_eq!(d.conductor, 24);
    }

    #[test]
    fn a1_reflection() {
        let d = RootDatum::build("A1".parse().unwrap()).unwrap();
        assert_eq!(d.h, 2);
        assert_eq!(d.exponents, vec![1]);
        assert_eq!(d.sigma, vec![vec![-1]]);
    }

    #[test]
    fn coxeter_numbers() {
        for (t, h, ex) in [
            ("A2", 3, vec![1, 2]),
            ("A3", 4, vec![1, 2, 3]),
            ("D5", 8, vec![1, 3, 4, 5, 7]),
            ("E6", 12, vec![1, 4, 5, 7, 8, 11]),
        ] {
            let d = RootDatum::build(t.parse().unwrap()).unwrap();
            assert_eq!(d.h, h, "{t}");
            assert_eq!(d.exponents, ex, "{t}");
        }
    }

    #[test]
    fn eigen_pairing_is_antidiagonal() {
        for t in ["A1", "A2", "A3", "A4", "D4", "D5", "D6"] {
            let d = RootDatum::build(t.parse().unwrap()).unwrap();
            let l = d.rank();
            for i in 0..l {
                for j in 0..l {
                    let expect = if d.eta(i, j) { CycScalar::one() } else { CycScalar::zero() };
                    assert_eq!(d.eigen_pairing(i, j), expect, "{t}: ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn eigenvalues_match_exponents() {
        for t in ["A2", "D4", "D6"] {
            let d = RootDatum::build(t.parse().unwrap()).unwrap();
            let sig = to_cyc(&d.sigma);
            for (j, v) in d.eigvecs.iter().enumerate() {
                let z = CycScalar::zeta(d.h, d.exponents[j] as i64);
                let sv = linalg::mat_vec(&sig, v);
                let zv: Vec<CycScalar> = v.iter().map(|c| c * &z).collect();
                assert_eq!(sv, zv, "{t} eigvec {j}");
            }
        }
    }

    #[test]
    fn pairings() {
        let d = d4();
        let a1 = LatticeVector::simple_root(4, 0);
        let a2 = LatticeVector::simple_root(4, 1);
        assert_eq!(d.pair(&a1, &a2).unwrap(), rat_int(-1));
        assert_eq!(d.eigen_pairing(0, 3), CycScalar::one());
        assert!(d.eigen_pairing(0, 0).is_zero());
        assert!(d.pair(&a1, &LatticeVector::ambient(&[1, 0, 0, 0])).is_err());
    }

    #[test]
    fn a1_epsilon() {
        let d = RootDatum::build("A1".parse().unwrap()).unwrap();
        let a = LatticeVector::root(&[1]);
        assert_eq!(d.epsilon(&a, &a).unwrap(), -1);
        assert_eq!(d.epsilon(&a.zero_like(), &a).unwrap(), 1);
    }

    #[test]
    fn unsupported_types() {
        assert!("D3".parse::<DynkinType>().is_err());
        assert!("E9".parse::<DynkinType>().is_err());
        assert!("X2".parse::<DynkinType>().is_err());
    }
}
