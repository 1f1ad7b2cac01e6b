//! Exact arithmetic over ℚ and the cyclotomic fields ℚ(ζ_N).
//!
//! A [`CycScalar`] stores an element of ℚ(ζ_N) in the power basis
//! `1, ζ, …, ζ^{φ(N)-1}` of `ℚ[x]/(Φ_N(x))`, as integer numerators over a
//! single positive common denominator. Values of different conductors are
//! promoted to the least common conductor before combining.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = BigRational;

/// Shorthand for building a small rational.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Euler's totient.
pub fn totient(n: u32) -> usize {
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

fn lcm(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

/// Precomputed reduction data for one conductor.
struct CycloField {
    n: u32,
    phi: usize,
    /// `pow[k]` = x^k mod Φ_N, for k in 0..max(N, 2φ-1).
    pow: Vec<Vec<i64>>,
}

impl CycloField {
    fn new(n: u32) -> Self {
        let phi_poly = cyclotomic_poly(n);
        let phi = phi_poly.len() - 1;
        let count = (n as usize).max(2 * phi).max(1);
        let mut pow = Vec::with_capacity(count);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..count {
            pow.push(cur.clone());
            // multiply by x and reduce using the monic Φ_N
            let top = cur[phi - 1];
            let mut next = vec![0i64; phi];
            for k in (1..phi).rev() {
                next[k] = cur[k - 1];
            }
            if top != 0 {
                for k in 0..phi {
                    next[k] -= top * phi_poly[k];
                }
            }
            cur = next;
        }
        CycloField { n, phi, pow }
    }
}

/// Integer coefficients (low to high) of the N-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    // x^n - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let div = cyclotomic_poly(d);
            num = poly_div_exact(&num, &div);
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qlen = num.len() - dn;
    let mut q = vec![0i64; qlen];
    for k in (0..qlen).rev() {
        let c = rem[k + dn] / den[dn];
        q[k] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[k + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn field(n: u32) -> Arc<CycloField> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<CycloField>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(f) = cache.read().expect("field cache poisoned").get(&n) {
        return f.clone();
    }
    let f = Arc::new(CycloField::new(n));
    cache
        .write()
        .expect("field cache poisoned")
        .entry(n)
        .or_insert(f)
        .clone()
}

/// An exact element of ℚ(ζ_N).
#[derive(Clone, Debug)]
pub struct CycScalar {
    n: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycScalar {
    pub fn zero() -> Self {
        CycScalar { n: 1, num: vec![BigInt::zero()], den: BigInt::one() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        CycScalar { n: 1, num: vec![BigInt::from(v)], den: BigInt::one() }
    }

    pub fn from_rational(r: &Rational) -> Self {
        CycScalar { n: 1, num: vec![r.numer().clone()], den: r.denom().clone() }
    }

    /// Builds `Σ coeffs[k] ζ_N^k`; the coefficient list may be any length.
    pub fn from_power_coeffs(n: u32, coeffs: &[Rational]) -> Self {
        assert!(n >= 1, "conductor must be positive");
        let f = field(n);
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut num = vec![BigInt::zero(); f.phi];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&den / c.denom());
            add_power(&f, &mut num, k % n as usize, &scaled);
        }
        CycScalar::normalized(n, num, den)
    }

    /// ζ_N^k.
    pub fn zeta(n: u32, k: i64) -> Self {
        assert!(n >= 1, "conductor must be positive");
        let f = field(n);
        let e = k.rem_euclid(n as i64) as usize;
        let num = f.pow[e].iter().map(|&c| BigInt::from(c)).collect();
        CycScalar::normalized(n, num, BigInt::one())
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    /// Power-basis coefficient of ζ_N^k (0 ≤ k < φ(N)).
    pub fn coeff(&self, k: usize) -> Rational {
        Rational::new(self.num[k].clone(), self.den.clone())
    }

    /// Image under ζ_N ↦ `zeta` in ℤ/pℤ, or `None` if p divides the denominator.
    pub fn mod_image(&self, p: u64, zeta: u64) -> Option<u64> {
        let pb = BigInt::from(p);
        let red = |x: &BigInt| -> u64 {
            let r = x.mod_floor(&pb);
            u64::try_from(r).expect("residue fits in u64")
        };
        let den = red(&self.den);
        if den == 0 {
            return None;
        }
        let mut acc = 0u64;
        let mut zk = 1u64;
        for c in &self.num {
            acc = (acc + red(c) * zk % p) % p;
            zk = zk * zeta % p;
        }
        Some(acc * crate::linalg::mod_pow(den, p - 2, p) % p)
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        (0..self.num.len()).map(|k| self.coeff(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// Returns the value as a rational if it lies in ℚ.
    pub fn to_rational(&self) -> Option<Rational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn normalized(n: u32, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = den.clone();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den /= &g;
        }
        if num.iter().all(Zero::is_zero) {
            den = BigInt::one();
        }
        CycScalar { n, num, den }
    }

    /// Embeds the value into ℚ(ζ_M); requires `conductor() | m`.
    pub fn promote(&self, m: u32) -> Self {
        if m == self.n {
            return self.clone();
        }
        assert!(m % self.n == 0, "cannot promote conductor {} to {}", self.n, m);
        let f = field(m);
        let step = (m / self.n) as usize;
        let mut num = vec![BigInt::zero(); f.phi];
        for (k, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                add_power(&f, &mut num, k * step, c);
            }
        }
        CycScalar::normalized(m, num, self.den.clone())
    }

    fn unify(a: &Self, b: &Self) -> (Self, Self) {
        let n = lcm(a.n, b.n);
        (a.promote(n), b.promote(n))
    }

    fn scale_int(&self, p: &BigInt, q: &BigInt) -> Self {
        let num = self.num.iter().map(|c| c * p).collect();
        CycScalar::normalized(self.n, num, &self.den * q)
    }

    /// Multiplies by a rational number.
    pub fn scale(&self, r: &Rational) -> Self {
        self.scale_int(r.numer(), r.denom())
    }

    fn add_impl(&self, other: &Self, sign: i32) -> Self {
        if self.n == 1 && other.n != 1 || self.n != other.n && self.n != 1 && other.n != 1 {
            let (a, b) = Self::unify(self, other);
            return a.add_impl(&b, sign);
        }
        if other.n == 1 && self.n != 1 {
            // rational other: only the constant coefficient moves
            let mut out = self.clone();
            let r = Rational::new(other.num[0].clone(), other.den.clone());
            let r = if sign < 0 { -r } else { r };
            let den = self.den.lcm(r.denom());
            let f1 = &den / &self.den;
            for c in out.num.iter_mut() {
                *c = &*c * &f1;
            }
            out.num[0] += r.numer() * (&den / r.denom());
            return CycScalar::normalized(self.n, out.num, den);
        }
        let den = self.den.lcm(&other.den);
        let f1 = &den / &self.den;
        let f2 = &den / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| if sign < 0 { a * &f1 - b * &f2 } else { a * &f1 + b * &f2 })
            .collect();
        CycScalar::normalized(self.n, num, den)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.n == 1 {
            return other.scale_int(&self.num[0], &self.den);
        }
        if other.n == 1 {
            return self.scale_int(&other.num[0], &other.den);
        }
        if self.n != other.n {
            let (a, b) = Self::unify(self, other);
            return a.mul_impl(&b);
        }
        let f = field(self.n);
        let phi = f.phi;
        let mut wide = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    wide[i + j] += a * b;
                }
            }
        }
        let mut num: Vec<BigInt> = wide[..phi].to_vec();
        for (k, c) in wide.iter().enumerate().skip(phi) {
            if !c.is_zero() {
                add_power(&f, &mut num, k, c);
            }
        }
        CycScalar::normalized(self.n, num, &self.den * &other.den)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in ℚ[x].
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.n == 1 {
            return Ok(CycScalar::normalized(1, vec![self.den.clone()], self.num[0].clone()));
        }
        let modulus: Vec<Rational> =
            cyclotomic_poly(self.n).into_iter().map(rat_int).collect();
        let a: Vec<Rational> = self.coeffs();
        let s = poly_inverse_mod(&a, &modulus);
        Ok(CycScalar::from_power_coeffs(self.n, &s))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    /// Image under the Galois automorphism ζ_N ↦ ζ_N^{-1}.
    pub fn conj(&self) -> Self {
        if self.n <= 2 {
            return self.clone();
        }
        let f = field(self.n);
        let n = self.n as usize;
        let mut num = vec![BigInt::zero(); f.phi];
        for (k, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                add_power(&f, &mut num, (n - k) % n, c);
            }
        }
        CycScalar::normalized(self.n, num, self.den.clone())
    }

    /// Evaluation under the embedding ζ_N ↦ exp(2πi/N), as (re, im).
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = c.to_f64().unwrap_or(f64::NAN) / den;
            let ang = 2.0 * std::f64::consts::PI * k as f64 / self.n as f64;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = CycScalar::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Canonical text form `N;e0:p0/q0,e1:p1/q1,...` (nonzero terms only).
    pub fn to_text(&self) -> String {
        let terms: Vec<String> = self
            .num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let r = Rational::new(c.clone(), self.den.clone());
                format!("{}:{}/{}", k, r.numer(), r.denom())
            })
            .collect();
        format!("{};{}", self.n, terms.join(","))
    }

    pub fn parse_text(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad cyclotomic scalar `{s}`"));
        let (n, rest) = s.split_once(';').ok_or_else(bad)?;
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        let phi = totient(n);
        let mut coeffs = vec![Rational::zero(); phi];
        for term in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (e, r) = term.split_once(':').ok_or_else(bad)?;
            let e: usize = e.trim().parse().map_err(|_| bad())?;
            if e >= phi {
                return Err(bad());
            }
            coeffs[e] = parse_rational(r).ok_or_else(bad)?;
        }
        Ok(CycScalar::from_power_coeffs(n, &coeffs))
    }
}

/// num += c · (x^k mod Φ_N)
fn add_power(f: &CycloField, num: &mut [BigInt], k: usize, c: &BigInt) {
    if k < f.phi {
        num[k] += c;
        return;
    }
    let row = if k < f.pow.len() { &f.pow[k] } else { &f.pow[k % f.n as usize] };
    for (dst, &r) in num.iter_mut().zip(row) {
        match r {
            0 => {}
            1 => *dst += c,
            -1 => *dst -= c,
            _ => *dst += c * r,
        }
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => Some(Rational::from_integer(BigInt::from_str(s).ok()?)),
    }
}

fn poly_trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem = a.to_vec();
    poly_trim(&mut rem);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() < b.len() {
        return (vec![Rational::zero()], rem);
    }
    let mut q = vec![Rational::zero(); rem.len() - db];
    for k in (0..q.len()).rev() {
        let c = &rem[k + db] / &lead;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                rem[k + j] -= &c * bj;
            }
        }
        q[k] = c;
    }
    rem.truncate(db.max(1));
    poly_trim(&mut rem);
    (q, rem)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let len = a.len().max(b.len());
    let mut out = vec![Rational::zero(); len];
    for (k, x) in a.iter().enumerate() {
        out[k] += x;
    }
    for (k, y) in b.iter().enumerate() {
        out[k] -= y;
    }
    poly_trim(&mut out);
    out
}

/// Inverse of `a` modulo the irreducible `m`; `a` must be nonzero mod `m`.
fn poly_inverse_mod(a: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    poly_trim(&mut r1);
    let (mut s0, mut s1) = (vec![Rational::zero()], vec![Rational::one()]);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divmod(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r0 is a nonzero constant gcd
    let c = r0[0].clone();
    let (_, s) = poly_divmod(&s0, m);
    s.into_iter().map(|x| x / &c).collect()
}

fn is_squarefree_factorization(n: u64) -> (u64, u64) {
    // returns (square part root, squarefree part) with n = root² · sf
    let mut root = 1u64;
    let mut sf = 1u64;
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            root *= p;
        }
        if e % 2 == 1 {
            sf *= p;
        }
        p += 1;
    }
    sf *= n;
    (root, sf)
}

/// Smallest conductor whose field contains √n (n a nonzero integer).
pub fn sqrt_conductor(n: i64) -> u32 {
    let (_, sf) = is_squarefree_factorization(n.unsigned_abs());
    let d = if n < 0 { -(sf as i64) } else { sf as i64 };
    if d == 1 {
        1
    } else if d.rem_euclid(4) == 1 {
        d.unsigned_abs() as u32
    } else {
        4 * d.unsigned_abs() as u32
    }
}

fn legendre(a: u64, p: u64) -> i64 {
    // Euler's criterion
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if result == 1 {
        1
    } else if result == 0 {
        0
    } else {
        -1
    }
}

/// A square root of the integer `n` inside ℚ(ζ_N).
///
/// The root is chosen with positive real part, or positive imaginary part
/// when it is purely imaginary, under ζ_N ↦ exp(2πi/N).
pub fn sqrt_of_integer(n: i64, conductor: u32) -> Result<CycScalar> {
    if n == 0 {
        return Ok(CycScalar::zero());
    }
    let needed = sqrt_conductor(n);
    if conductor % needed != 0 {
        return Err(Error::NoSquareRoot { n, conductor, needed });
    }
    let (root, sf) = is_squarefree_factorization(n.unsigned_abs());
    let mut value = CycScalar::from_int(root as i64);
    // √(±sf) = Π_p √p · (ζ_4 if negative)
    let mut rest = sf;
    let mut p = 2u64;
    let mut factors = Vec::new();
    while rest > 1 {
        if rest % p == 0 {
            factors.push(p);
            rest /= p;
        } else {
            p += 1;
        }
    }
    let mut imag_units = if n < 0 { 1u32 } else { 0 };
    for p in factors {
        if p == 2 {
            // √2 = ζ_8 + ζ_8^{-1}
            value = &value * &(CycScalar::zeta(8, 1) + CycScalar::zeta(8, -1));
        } else {
            // Gauss sum g with g² = (-1)^{(p-1)/2} p
            let mut g = CycScalar::zero();
            for a in 1..p {
                let l = legendre(a, p);
                if l != 0 {
                    g = &g + &CycScalar::zeta(p as u32, a as i64).scale(&rat_int(l));
                }
            }
            value = &value * &g;
            if p % 4 == 3 {
                // g = ±i√p, so absorb one factor of i
                imag_units += 3;
            }
        }
    }
    if imag_units % 4 != 0 {
        value = &value * &CycScalar::zeta(4, (imag_units % 4) as i64);
    }
    let value = value.promote(conductor);
    let (re, im) = value.to_complex();
    let positive = if re.abs() > 1e-9 { re > 0.0 } else { im > 0.0 };
    let value = if positive { value } else { -value };
    debug_assert!(&value * &value == CycScalar::from_int(n));
    Ok(value)
}

/// √r for a rational r, or an error naming the conductor it would need.
pub fn sqrt_of_rational(r: &Rational, conductor: u32) -> Result<CycScalar> {
    // √(p/q) = √(pq)/q
    let prod = r.numer() * r.denom();
    let prod = prod
        .to_i64()
        .ok_or_else(|| Error::Unsupported(format!("square root of large rational {r}")))?;
    let s = sqrt_of_integer(prod, conductor)?;
    Ok(s.scale(&Rational::new(BigInt::one(), r.denom().clone())))
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.n == other.n {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = Self::unify(self, other);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for CycScalar {}

impl Default for CycScalar {
    fn default() -> Self {
        CycScalar::zero()
    }
}

impl From<i64> for CycScalar {
    fn from(v: i64) -> Self {
        CycScalar::from_int(v)
    }
}

impl From<Rational> for CycScalar {
    fn from(r: Rational) -> Self {
        CycScalar::from_rational(&r)
    }
}

impl From<&Rational> for CycScalar {
    fn from(r: &Rational) -> Self {
        CycScalar::from_rational(r)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&CycScalar> for &CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                let f: fn(&CycScalar, &CycScalar) -> CycScalar = $body;
                f(self, rhs)
            }
        }
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: CycScalar) -> CycScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<CycScalar> for &CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: CycScalar) -> CycScalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_impl(b, 1));
binop!(Sub, sub, |a, b| a.add_impl(b, -1));
binop!(Mul, mul, |a, b| a.mul_impl(b));

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, rhs: &CycScalar) {
        *self = self.add_impl(rhs, 1);
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, rhs: &CycScalar) {
        *self = self.add_impl(rhs, -1);
    }
}

impl MulAssign<&CycScalar> for CycScalar {
    fn mul_assign(&mut self, rhs: &CycScalar) {
        *self = self.mul_impl(rhs);
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(mut self) -> CycScalar {
        for c in self.num.iter_mut() {
            *c = -&*c;
        }
        self
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        -self.clone()
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = Rational::new(c.clone(), self.den.clone());
            let (sign, mag) = if r.is_negative() { ("-", -r) } else { ("+", r) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        write!(f, "z{}", self.n)?;
                    } else {
                        write!(f, "z{}^{}", self.n, k)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for CycScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for CycScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CycScalar::parse_text(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: (f64, f64), b: (f64, f64), tol: f64) -> bool {
        (a.0 - b.0).abs() < tol && (a.1 - b.1).abs() < tol
    }

    #[test]
    fn rational_sum() {
        let a = CycScalar::from_rational(&rat(1, 2));
        let b = CycScalar::from_rational(&rat(1, 3));
        assert_eq!(a + b, CycScalar::from_rational(&rat(5, 6)));
    }

    #[test]
    fn root_of_unity_law() {
        let z = CycScalar::zeta(6, 1);
        assert_eq!(&z * &CycScalar::zeta(6, 2), CycScalar::from_int(-1));
        assert_eq!(CycScalar::zeta(2, 1), CycScalar::from_int(-1));
        assert_eq!(CycScalar::zeta(6, 3), CycScalar::from_int(-1));
        let i = CycScalar::zeta(24, 6);
        assert_eq!(&i * &i, CycScalar::from_int(-1));
    }

    #[test]
    fn zeta8_pair_squares_to_two() {
        let s = CycScalar::zeta(8, 1) + CycScalar::zeta(8, 7);
        assert_eq!(&s * &s, CycScalar::from_int(2));
        let (re, im) = s.to_complex();
        assert!((re * re - im * im - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_roots() {
        let s2 = sqrt_of_integer(2, 24).unwrap();
        assert_eq!(s2, CycScalar::zeta(8, 1) + CycScalar::zeta(8, -1));
        assert_eq!(sqrt_of_integer(1, 24).unwrap(), CycScalar::one());
        let s3 = sqrt_of_integer(-3, 24).unwrap();
        assert_eq!(s3, CycScalar::zeta(3, 1).scale(&rat_int(2)) + CycScalar::one());
        for n in [-3, -1, 2, 3, 6, -6, 12, -2, 8] {
            let s = sqrt_of_integer(n, 24).unwrap();
            assert_eq!(&s * &s, CycScalar::from_int(n), "sqrt({n})");
        }
        let (re, _) = sqrt_of_integer(6, 24).unwrap().to_complex();
        assert!((re - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn square_root_outside_field() {
        match sqrt_of_integer(5, 24) {
            Err(Error::NoSquareRoot { needed, .. }) => assert_eq!(needed, 5),
            other => panic!("expected error, got {other:?}"),
        }
        assert!(sqrt_of_integer(7, 24).is_err());
        assert_eq!(sqrt_conductor(-7), 7);
        assert_eq!(sqrt_conductor(2), 8);
    }

    #[test]
    fn conjugation() {
        assert_eq!(CycScalar::zeta(6, 1).conj(), CycScalar::zeta(6, 5));
        let r = CycScalar::from_rational(&rat(-7, 3));
        assert_eq!(r.conj(), r);
        let s = sqrt_of_integer(-3, 24).unwrap();
        assert_eq!(s.conj(), -s);
    }

    #[test]
    fn float_embedding() {
        assert!(close(CycScalar::from_rational(&rat(1, 2)).to_complex(), (0.5, 0.0), 1e-15));
        assert!(close(CycScalar::zeta(4, 1).to_complex(), (0.0, 1.0), 1e-15));
        let s = sqrt_of_integer(2, 24).unwrap().to_complex();
        assert!((s.0 * s.0 - s.1 * s.1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(CycScalar::zero().inv(), Err(Error::DivisionByZero)));
        assert!(CycScalar::one().checked_div(&CycScalar::zero()).is_err());
    }

    #[test]
    fn inverse_of_irrational() {
        let a = CycScalar::zeta(24, 1) + CycScalar::from_int(3) + CycScalar::zeta(24, 5);
        let inv = a.inv().unwrap();
        assert!((&a * &inv).is_one());
    }

    #[test]
    fn promotion_round_trip() {
        let a = CycScalar::zeta(6, 1) + CycScalar::from_rational(&rat(2, 5));
        let big = a.promote(24);
        assert_eq!(big.conductor(), 24);
        assert_eq!(big, a);
    }

    #[test]
    fn text_form() {
        let a = CycScalar::zeta(24, 3).scale(&rat(-1, 2)) + CycScalar::from_int(4);
        let t = a.to_text();
        assert_eq!(t, "24;0:4/1,3:-1/2");
        assert_eq!(CycScalar::parse_text(&t).unwrap(), a);
        assert_eq!(CycScalar::zero().to_text(), "1;");
        assert!(CycScalar::parse_text("24;9:1/2").is_err());
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(24), vec![1, 0, 0, 0, -1, 0, 0, 0, 1]);
        assert_eq!(totient(24), 8);
    }
}
