//! Property tests over the parameter plumbing and the series ring.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use jacobi_gap::params::{parse_rational, phi_to_t, t_to_phi};
use jacobi_gap::ratseries::{RationalSeries, INF_PREC};
use jacobi_gap::EnsembleParams;

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=12)
        .prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn exponent_rational() -> impl Strategy<Value = BigRational> {
    // a, b > -1 with a modest denominator
    (1i64..=12, -11i64..=36).prop_map(|(q, scaled)| {
        BigRational::new(BigInt::from(scaled.max(-q + 1)), BigInt::from(q))
    })
}

fn series(max_len: usize) -> impl Strategy<Value = RationalSeries> {
    prop::collection::vec(small_rational(), 0..max_len)
        .prop_map(|coeffs| RationalSeries::from_coeffs(coeffs, 16))
}

proptest! {
    #[test]
    fn quadruple_identities(a in exponent_rational(), b in exponent_rational(), n in 1i64..=6) {
        let n = BigRational::new(BigInt::from(n), BigInt::one());
        let p = EnsembleParams::from_rationals(a.clone(), b.clone(), n.clone()).unwrap();
        let ex = p.exact.as_ref().unwrap();
        // b1 + b4 = 0, b2 + b3 = -b, so the quadruple sums to -b
        prop_assert!((&ex.bvec[0] + &ex.bvec[3]).is_zero());
        prop_assert_eq!(&ex.bvec[1] + &ex.bvec[2], -&b);
        let sum = ex.bvec.iter().fold(BigRational::zero(), |s, v| s + v);
        prop_assert_eq!(sum, -&b);
        // e2 really is the second elementary symmetric function
        let mut e2 = BigRational::zero();
        for i in 0..4 {
            for j in (i + 1)..4 {
                e2 += &ex.bvec[i] * &ex.bvec[j];
            }
        }
        prop_assert_eq!(&e2, &ex.e2);
        // and the float mirrors agree with the exact values
        prop_assert!((num_traits::ToPrimitive::to_f64(&ex.e2).unwrap() - p.e2).abs() < 1e-9);
    }

    #[test]
    fn angle_substitution_round_trip(phi in 0.0..std::f64::consts::PI) {
        let t = phi_to_t(phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        let back = t_to_phi(t).unwrap();
        prop_assert!((back - phi).abs() < 1e-7, "phi {phi} -> t {t} -> {back}");
    }

    #[test]
    fn rational_parse_round_trip(p in -9999i64..=9999, q in 1i64..=999) {
        let r = BigRational::new(BigInt::from(p), BigInt::from(q));
        let parsed = parse_rational(&format!("{}/{}", p, q)).unwrap();
        prop_assert_eq!(parsed, r);
    }

    #[test]
    fn series_ring_commutes(x in series(8), y in series(8)) {
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.add(&y), y.add(&x));
    }

    #[test]
    fn series_distributive(x in series(6), y in series(6), z in series(6)) {
        // precision metadata follows min/valuation rules and need not agree
        // between the two sides; the trusted coefficients must
        let lhs = x.mul(&y.add(&z));
        let rhs = x.mul(&y).add(&x.mul(&z));
        for k in 0..lhs.prec().min(rhs.prec()).min(16) {
            prop_assert_eq!(lhs.coeff(k), rhs.coeff(k), "coefficient {}", k);
        }
    }

    #[test]
    fn series_product_rule(x in series(6), y in series(6)) {
        // (xy)' = x'y + xy'
        let lhs = x.mul(&y).derivative();
        let rhs = x.derivative().mul(&y).add(&x.mul(&y.derivative()));
        // precision bookkeeping may differ by the valuation rules; compare
        // on the common trusted range
        let prec = lhs.prec().min(rhs.prec());
        for k in 0..prec.min(16) {
            prop_assert_eq!(lhs.coeff(k), rhs.coeff(k), "coefficient {}", k);
        }
    }

    #[test]
    fn exp_of_integral_has_unit_constant(x in series(6)) {
        // exp(∫x) is well-defined with constant term 1
        let e = x.integrate().exp().unwrap();
        prop_assert_eq!(e.coeff(0), BigRational::one());
    }

    #[test]
    fn polynomial_eval_matches_horner(coeffs in prop::collection::vec(small_rational(), 1..6),
                                      at in small_rational()) {
        let s = RationalSeries::poly(coeffs.clone());
        let mut horner = BigRational::zero();
        for c in coeffs.iter().rev() {
            horner = horner * &at + c;
        }
        prop_assert_eq!(s.eval_rational(&at), horner);
        prop_assert_eq!(s.prec(), INF_PREC);
    }
}
