//! Sparse multivariate polynomials with exact cyclotomic coefficients.
//!
//! Used for Weyl-invariant polynomials on 𝔥 and for Frobenius potentials.

use std::collections::BTreeMap;
use std::fmt;

use crate::numfield::{CycScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, CycScalar>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: CycScalar) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function x_k (0-based).
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, CycScalar::one());
        p
    }

    pub fn monomial(exps: Vec<u32>, c: CycScalar) -> Self {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Linear form Σ c_k x_k.
    pub fn linear(coeffs: &[CycScalar]) -> Self {
        let mut p = Poly::zero(coeffs.len());
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; coeffs.len()];
            e[k] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CycScalar)> {
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

    pub fn coeff(&self, exps: &[u32]) -> CycScalar {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: CycScalar) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &CycScalar) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), x * c);
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> Poly {
        self.scale(&CycScalar::from_rational(r))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, CycScalar::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// ∂/∂x_k.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            out.add_term(e2, c * &CycScalar::from_int(e[k] as i64));
        }
        out
    }

    /// Substitutes x_k ↦ images[k] (polynomials in a common variable set).
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        let nv = images.first().map_or(0, Poly::nvars);
        let mut out = Poly::zero(nv);
        // cache powers per variable
        let mut powers: Vec<Vec<Poly>> =
            images.iter().map(|p| vec![Poly::constant(nv, CycScalar::one()), p.clone()]).collect();
        for (e, c) in &self.terms {
            let mut term = Poly::constant(nv, c.clone());
            for (k, &d) in e.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                while powers[k].len() <= d as usize {
                    let next = powers[k].last().unwrap().mul(&images[k]);
                    powers[k].push(next);
                }
                term = term.mul(&powers[k][d as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    /// Constant value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<CycScalar> {
        match self.terms.len() {
            0 => Some(CycScalar::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (k, &d) in e.iter().enumerate() {
                match d {
                    0 => {}
                    1 => write!(f, "*v{}", k + 1)?,
                    _ => write!(f, "*v{}^{}", k + 1, d)?,
                }
            }
        }
        Ok(())
    }
}
