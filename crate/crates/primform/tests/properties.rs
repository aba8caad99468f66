//! Property tests for the exact-arithmetic substrate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use std::collections::BTreeMap;

use primform::milnor::MilnorRing;
use primform::lg::LGSystem;
use primform::poly::LaurentPoly;
use primform::ratfunc::{ExpandAt, RatFunc};
use primform::scalar::{ExactScalar, ParamMono};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Small Laurent polynomials in z with coefficients c + c' q.
fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
    proptest::collection::vec((-3i64..=3, -4i64..=4, -2i64..=2), 0..6).prop_map(|terms| {
        let mut p = LaurentPoly::zero();
        for (e, c, cq) in terms {
            let mut s = ExactScalar::from_int(c);
            s = s.add(&ExactScalar::monomial(
                ParamMono::var("q"),
                BigRational::from_integer(cq.into()),
            ));
            p = p.add(&LaurentPoly::var_pow("z", e).scale(&s));
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        // associativity
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        // distributivity
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        // commutativity
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn theta_is_a_derivation(a in arb_poly(), b in arb_poly()) {
        let lhs = a.mul(&b).log_derivative("z");
        let rhs = a.log_derivative("z").mul(&b).add(&a.mul(&b.log_derivative("z")));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn s_reduction_confluence(e in 0i64..=5, c in -5i64..=5) {
        // (s^2) x and P x normalize identically for s^2 = P = q.
        let p = ParamMono::var("q");
        let s = ExactScalar::root_gen("s", p.clone());
        let x = ExactScalar::monomial(ParamMono::var("q").pow(e), rat(c, 1))
            .with_root("s", p.clone());
        let via_s2 = s.mul(&s).mul(&x);
        let via_p = ExactScalar::monomial(p, rat(1, 1))
            .with_root("s", ParamMono::var("q"))
            .mul(&x);
        prop_assert_eq!(via_s2, via_p);
    }

    #[test]
    fn expand_then_evaluate(num in arb_poly(), tail in arb_poly(), order in 1i64..=6) {
        // denominator 1 + z * tail has unit leading coefficient at zero
        let den = LaurentPoly::one().add(&LaurentPoly::var("z").mul(&tail.map_coeffs(|c| {
            // strip negative exponents from the tail to keep the
            // denominator's lowest term at z^0
            c.clone()
        }).filter_total_degree(&["z".into()], |d| d >= 0)));
        let r = RatFunc::new(num.clone(), den.clone()).unwrap();
        let series = r.laurent_expand("z", ExpandAt::Zero, order).unwrap().to_poly();
        // Exactness: num - den * series has z-valuation above the order.
        let resid = num.sub(&den.mul(&series));
        if let Some((lo, _)) = resid.degree_range("z") {
            prop_assert!(resid.is_zero() || lo > order);
        }
        // Numeric consistency at z = 1/10, q = 1/3: the difference is bounded
        // by the exact tail estimate sum |c_i| (1/10)^{v_i}.
        let mut values: BTreeMap<String, BigRational> = BTreeMap::new();
        values.insert("z".into(), rat(1, 10));
        values.insert("q".into(), rat(1, 3));
        let den_val = den.eval_rational(&values).unwrap();
        prop_assume!(!den_val.is_zero());
        let diff = (num.eval_rational(&values).unwrap() / den_val.clone()
            - series.eval_rational(&values).unwrap()).abs();
        let mut bound = BigRational::zero();
        for (mono, c) in resid.terms() {
            let v = mono.get("z").copied().unwrap_or(0);
            let mut term = BigRational::zero();
            for (_, r) in c.terms() {
                term += r.abs();
            }
            let mut pow = BigRational::from_integer(BigInt::from(1));
            for _ in 0..v {
                pow *= rat(1, 10);
            }
            bound += term * pow;
        }
        bound /= den_val.abs();
        prop_assert!(diff <= bound);
    }

    #[test]
    fn normal_form_idempotent(g in arb_poly()) {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        let once = ring.normal_form(&g).unwrap();
        let twice = ring.normal_form(&once).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn residue_vanishes_on_jacobian_ideal(g in arb_poly()) {
        // Elements g * theta F lie in the ideal; their residue is zero.
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        let ideal_elt = g.mul(&lg.jacobian_generator().unwrap());
        let res = ring.residue(&ideal_elt).unwrap();
        prop_assert!(res.is_zero(), "residue {} for {}", res, ideal_elt);
    }

    #[test]
    fn ratfunc_reduction_idempotent(num in arb_poly(), den in arb_poly()) {
        prop_assume!(!den.is_zero());
        let r = RatFunc::new(num, den).unwrap();
        let r2 = RatFunc::new(r.num().clone(), r.den().clone()).unwrap();
        prop_assert_eq!(r, r2);
    }
}
