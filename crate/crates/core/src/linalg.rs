//! Dense exact linear algebra over [`CycScalar`].

use crate::error::{Error, Result};
use crate::numfield::CycScalar;

pub type Matrix = Vec<Vec<CycScalar>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { CycScalar::one() } else { CycScalar::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = CycScalar::zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc += &(x * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, v: &[CycScalar]) -> Vec<CycScalar> {
    a.iter()
        .map(|row| {
            let mut acc = CycScalar::zero();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    acc += &(x * y);
                }
            }
            acc
        })
        .collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
///
/// Pivots are taken in column order, so the column order of `m` fixes which
/// unknowns become bound variables.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("nonzero pivot");
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

/// A basis of the right kernel {x : m x = 0}.
///
/// Tall sparse systems are first reduced to a set of independent rows found
/// modulo a prime; the exact kernel of that subsystem is then checked against
/// every row, and the full elimination is used if the check fails.
pub fn kernel(m: &Matrix, cols: usize) -> Vec<Vec<CycScalar>> {
    if m.len() > cols {
        if let Some(rows) = independent_rows_mod_p(m, cols) {
            let sub: Matrix = rows.iter().map(|&r| m[r].clone()).collect();
            let ker = kernel_dense(&sub, cols);
            let ok = ker.iter().all(|v| {
                m.iter().all(|row| {
                    let mut acc = CycScalar::zero();
                    for (x, y) in row.iter().zip(v) {
                        if !x.is_zero() && !y.is_zero() {
                            acc += &(x * y);
                        }
                    }
                    acc.is_zero()
                })
            });
            if ok {
                return ker;
            }
        }
    }
    kernel_dense(m, cols)
}

fn kernel_dense(m: &Matrix, cols: usize) -> Vec<Vec<CycScalar>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![CycScalar::zero(); cols];
            v[f] = CycScalar::one();
            for (row, &pc) in a.iter().zip(&pivots) {
                v[pc] = -&row[f];
            }
            v
        })
        .collect()
}

pub(crate) fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A prime p ≡ 1 mod n below 2^31 together with a primitive n-th root of unity.
fn prime_with_root(n: u64) -> Option<(u64, u64)> {
    let mut k = ((1u64 << 31) - 1) / n;
    while k > 0 {
        let p = k * n + 1;
        k -= 1;
        if !is_prime(p) {
            continue;
        }
        let qs = prime_factors(n);
        for x in 2..p {
            let w = mod_pow(x, (p - 1) / n, p);
            if qs.iter().all(|&q| mod_pow(w, n / q, p) != 1) {
                return Some((p, w));
            }
        }
    }
    None
}

/// Row indices forming a basis of the row space modulo a suitable prime.
fn independent_rows_mod_p(m: &Matrix, cols: usize) -> Option<Vec<usize>> {
    let n = m
        .iter()
        .flatten()
        .filter(|x| !x.is_zero())
        .fold(1u64, |acc, x| num_integer::lcm(acc, x.conductor() as u64));
    let (p, w) = prime_with_root(n)?;
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (ri, row) in m.iter().enumerate() {
        let mut v = Vec::with_capacity(cols);
        for x in row {
            if x.is_zero() {
                v.push(0);
            } else {
                let zeta = mod_pow(w, n / x.conductor() as u64, p);
                v.push(x.mod_image(p, zeta)?);
            }
        }
        for (pc, b) in &basis {
            let f = v[*pc];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        if let Some(pc) = v.iter().position(|&x| x != 0) {
            let inv = mod_pow(v[pc], p - 2, p);
            for x in v.iter_mut() {
                *x = *x * inv % p;
            }
            basis.push((pc, v));
            chosen.push(ri);
            if basis.len() == cols {
                break;
            }
        }
    }
    Some(chosen)
}

pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::DivisionByZero);
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}
