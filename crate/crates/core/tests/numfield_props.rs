use proptest::prelude::*;
use wce_core::numfield::{rat, sqrt_of_integer, CycScalar, Rational};

/// Random elements of ℚ(ζ_24) with small numerators and denominators.
fn element() -> impl Strategy<Value = CycScalar> {
    proptest::collection::vec((-9i64..=9, 1i64..=6), 8)
        .prop_map(|cs| CycScalar::from_power_coeffs(24, &cs.iter().map(|&(p, q)| rat(p, q)).collect::<Vec<Rational>>()))
}

fn sub_element() -> impl Strategy<Value = (u32, CycScalar)> {
    prop_oneof![Just(3u32), Just(4), Just(6), Just(8), Just(12)].prop_flat_map(|n| {
        let phi = match n {
            3 | 4 | 6 => 2,
            _ => 4,
        };
        proptest::collection::vec((-9i64..=9, 1i64..=4), phi).prop_map(move |cs| {
            (n, CycScalar::from_power_coeffs(n, &cs.iter().map(|&(p, q)| rat(p, q)).collect::<Vec<_>>()))
        })
    })
}

fn near(a: (f64, f64), b: (f64, f64)) -> bool {
    let scale = 1.0 + a.0.abs() + a.1.abs() + b.0.abs() + b.1.abs();
    (a.0 - b.0).abs() < 1e-10 * scale && (a.1 - b.1).abs() < 1e-10 * scale
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in element(), b in element(), c in element()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a + &(-&a), CycScalar::zero());
    }

    #[test]
    fn nonzero_elements_are_invertible(a in element()) {
        prop_assume!(!a.is_zero());
        let inv = a.inv().unwrap();
        prop_assert!((&a * &inv).is_one());
        prop_assert_eq!(a.checked_div(&a).unwrap(), CycScalar::one());
    }

    #[test]
    fn text_round_trip(a in element()) {
        prop_assert_eq!(CycScalar::parse_text(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn promotion_preserves_value((n, a) in sub_element()) {
        let big = a.promote(24);
        prop_assert_eq!(big.conductor(), 24);
        prop_assert_eq!(&big, &a);
        prop_assert!(near(big.to_complex(), a.to_complex()));
        let _ = n;
    }

    #[test]
    fn float_embedding_is_a_homomorphism(a in element(), b in element()) {
        let (x, y) = (a.to_complex(), b.to_complex());
        let sum = (&a + &b).to_complex();
        let prod = (&a * &b).to_complex();
        prop_assert!(near(sum, (x.0 + y.0, x.1 + y.1)));
        prop_assert!(near(prod, (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)));
    }

    #[test]
    fn conjugation_is_a_field_automorphism(a in element(), b in element()) {
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        prop_assert_eq!(a.conj().conj(), a);
    }
}

#[test]
fn square_roots_square_back() {
    for n in [-6i64, -3, -2, -1, 1, 2, 3, 6, 8, 12, 18, 24] {
        let s = sqrt_of_integer(n, 24).unwrap();
        assert_eq!(&s * &s, CycScalar::from_int(n), "√{n}");
    }
}
