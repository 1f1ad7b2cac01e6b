mod common;

use proptest::prelude::*;
use wce_core::numfield::{rat_int, CycScalar};
use wce_core::rootdata::{LatticeVector, RootDatum};

const TYPES: [&str; 9] = ["A1", "A2", "A3", "A4", "D4", "D5", "E6", "E7", "E8"];

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn norm(d: &RootDatum, v: &[i64]) -> i64 {
    let l = d.rank();
    (0..l).flat_map(|i| (0..l).map(move |j| (i, j))).map(|(i, j)| v[i] * d.cartan[i][j] * v[j]).sum()
}

#[test]
fn d4_cartan_matrix() {
    let d = common::d4();
    assert_eq!(d.cartan, vec![vec![2, -1, 0, 0], vec![-1, 2, -1, -1], vec![0, -1, 2, 0], vec![0, -1, 0, 2]]);
    assert_eq!(d.h, 6);
    assert_eq!(d.exponents, vec![1, 3, 3, 5]);
    let a1 = common::a1();
    assert_eq!((a1.h, a1.exponents.clone()), (2, vec![1]));
    assert_eq!(a1.sigma, vec![vec![-1]]);
}

#[test]
fn coxeter_element_has_exact_order_h() {
    for name in TYPES {
        let d = common::datum(name);
        let l = d.rank();
        let id: Vec<Vec<i64>> = (0..l).map(|i| (0..l).map(|j| (i == j) as i64).collect()).collect();
        let mut p = id.clone();
        for k in 1..=d.h {
            p = mat_mul(&p, &d.sigma);
            assert_eq!(p == id, k == d.h, "{name}: σ^{k}");
        }
    }
}

#[test]
fn eigenvectors_match_exponent_spectrum() {
    for name in TYPES {
        let d = common::datum(name);
        let l = d.rank();
        for j in 0..l {
            let v = &d.eigvecs[j];
            let zeta = CycScalar::zeta(d.conductor, (d.conductor / d.h * d.exponents[j]) as i64);
            for r in 0..l {
                let mut acc = CycScalar::zero();
                for c in 0..l {
                    acc += &(&CycScalar::from_int(d.sigma[r][c]) * &v[c]);
                }
                assert_eq!(acc, &zeta * &v[r], "{name}: σφ^{}", j + 1);
            }
            assert_eq!(d.exponents[j] + d.exponents[d.partner(j)], d.h);
        }
    }
}

#[test]
fn eigen_pairing_is_antidiagonal() {
    for name in TYPES {
        let d = common::datum(name);
        let l = d.rank();
        for i in 0..l {
            for j in 0..l {
                let want = if i + j == l - 1 { CycScalar::one() } else { CycScalar::zero() };
                assert_eq!(d.eigen_pairing(i, j), want, "{name}: (φ^{}|φ^{})", i + 1, j + 1);
            }
        }
    }
}

#[test]
fn eigenbasis_change_round_trips() {
    let d = common::d4();
    let v: Vec<CycScalar> = [3, -1, 4, 1].iter().map(|&x| CycScalar::from_int(x)).collect();
    let y = d.eigen_coords_of_field(&v);
    assert_eq!(d.field_from_eigen(&y), v);
}

#[test]
fn d4_pairings() {
    let d = common::d4();
    let a = LatticeVector::simple_root(4, 0);
    let b = LatticeVector::simple_root(4, 1);
    assert_eq!(d.pair(&a, &b).unwrap(), rat_int(-1));
    assert!(d.eigen_pairing(0, 3).is_one());
    assert!(d.eigen_pairing(0, 0).is_zero());
}

#[test]
fn cocycle_exponents_are_integral_on_simple_roots() {
    for name in TYPES {
        let d = common::datum(name);
        for row in d.cocycle_exponents() {
            for x in row {
                // the pairing is integral even though (1-σ)^{-1} alone is not
                assert!(x.is_integer(), "{name}: {x}");
            }
        }
    }
}

#[test]
fn epsilon_diagonal_law_on_all_roots() {
    for name in TYPES {
        let d = common::datum(name);
        for r in d.roots() {
            let a = LatticeVector::root(&r);
            let n = norm(&d, &r);
            let want = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(d.epsilon(&a, &a).unwrap(), want, "{name}: {r:?}");
        }
    }
}

#[test]
fn epsilon_is_bimultiplicative_on_all_root_pairs() {
    for name in ["A2", "A3", "D4"] {
        let d = common::datum(name);
        let roots = d.roots();
        for x in &roots {
            for y in &roots {
                for z in &roots {
                    let s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                    let (x, y, z, s) =
                        (LatticeVector::root(x), LatticeVector::root(y), LatticeVector::root(z), LatticeVector::root(&s));
                    let e = |a: &LatticeVector, b: &LatticeVector| d.epsilon(a, b).unwrap();
                    assert_eq!(e(&s, &z), e(&x, &z) * e(&y, &z));
                    assert_eq!(e(&z, &s), e(&z, &x) * e(&z, &y));
                }
            }
        }
        let zero = LatticeVector::root(&vec![0; d.rank()]);
        for r in &roots {
            assert_eq!(d.epsilon(&zero, &LatticeVector::root(r)).unwrap(), 1);
        }
    }
}

#[test]
fn a1_epsilon_of_root_with_itself() {
    let a = LatticeVector::root(&[1]);
    assert_eq!(common::a1().epsilon(&a, &a).unwrap(), -1);
}

#[test]
fn basis_mismatch_is_rejected() {
    let d = common::d4();
    assert!(d.epsilon(&LatticeVector::root(&[1, 0, 0, 0]), &LatticeVector::ambient(&[1, 0, 0, 0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn epsilon_bimultiplicative_on_lattice_vectors(
        x in proptest::collection::vec(-4i64..=4, 6),
        y in proptest::collection::vec(-4i64..=4, 6),
        z in proptest::collection::vec(-4i64..=4, 6),
    ) {
        let d = common::datum("E6");
        let s: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let v = |c: &[i64]| LatticeVector::root(c);
        let e = |a: &[i64], b: &[i64]| d.epsilon(&v(a), &v(b)).unwrap();
        prop_assert_eq!(e(&s, &z), e(&x, &z) * e(&y, &z));
        prop_assert_eq!(e(&z, &s), e(&z, &x) * e(&z, &y));
    }
}
