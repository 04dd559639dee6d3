use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use tailbound::bounds::{binom_half_upper, binom_sharp_lower, binom_universal_lower, ShiftQuery};
use tailbound::exact::{
    binom_lower_tail, binom_pmf, binom_upper_tail, poisson_binomial_pmf, BinomialSpec, IndicatorVector,
};
use tailbound::reflection::{ReflectionMap, UnitPoint};
use tailbound::special::{poisson_pmf, poisson_upper_tail, regularized_incomplete_beta, BetaParams, PoissonSpec};

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `(n, μ)` with `μ = j/d ∈ [0, n]`.
fn binomial() -> impl Strategy<Value = (u32, BigRational)> {
    (1u32..=30, 1i64..=12)
        .prop_flat_map(|(n, d)| (Just(n), 0..=i64::from(n) * d).prop_map(move |(n, j)| (n, rat(j, d))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_sums_to_one((n, mu) in binomial()) {
        let spec = BinomialSpec::new(n, mu).unwrap();
        let total: BigRational = (0..=i64::from(n)).map(|k| binom_pmf(&spec, k).unwrap()).sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn mirror_symmetry((n, mu) in binomial(), k in 0i64..=31) {
        let spec = BinomialSpec::new(n, mu.clone()).unwrap();
        let mirror = BinomialSpec::new(n, BigRational::from_integer(n.into()) - mu).unwrap();
        prop_assert_eq!(binom_upper_tail(&spec, k), binom_lower_tail(&mirror, i64::from(n) - k));
    }

    #[test]
    fn tails_increase_with_mean((n, mu) in binomial(), bump in 0i64..=12, k in 0i64..=31) {
        let nn = BigRational::from_integer(n.into());
        let higher = std::cmp::min(&mu + rat(bump, 4), nn);
        let lo = BinomialSpec::new(n, mu).unwrap();
        let hi = BinomialSpec::new(n, higher).unwrap();
        prop_assert!(binom_upper_tail(&lo, k) <= binom_upper_tail(&hi, k));
    }

    #[test]
    fn constant_vector_is_binomial(n in 1usize..=12, j in 0i64..=12) {
        let p = rat(j, 12);
        let v = IndicatorVector::constant(n, p.clone()).unwrap();
        let spec = BinomialSpec::new(n as u32, p * BigRational::from_integer(n.into())).unwrap();
        let pmf = poisson_binomial_pmf(&v);
        for (k, x) in pmf.iter().enumerate() {
            prop_assert_eq!(x, &binom_pmf(&spec, k as i64).unwrap());
        }
    }

    #[test]
    fn integer_chain(mu in 1u32..=20, l in 1u32..=4, extra in 0u32..=30) {
        let n = mu + l + extra;
        let spec = BinomialSpec::with_integer_mean(n, mu).unwrap();
        let tail = binom_upper_tail(&spec, i64::from(mu + l));
        let sharp = binom_sharp_lower(mu, l).exact.unwrap();
        let universal = binom_universal_lower(l).exact.unwrap();
        let half = binom_half_upper(&ShiftQuery::new(BigRational::from_integer(mu.into()), l, Some(n))).exact.unwrap();
        prop_assert!(tail <= half);
        prop_assert!(tail >= sharp);
        prop_assert!(sharp >= universal);
        prop_assert_eq!(tail == sharp, extra == 0);
    }

    #[test]
    fn beta_complement_symmetry(a in 0.5f64..20.0, b in 0.5f64..20.0, x in 0.0f64..=1.0) {
        let lhs = regularized_incomplete_beta(&BetaParams::new(a, b).unwrap(), x).unwrap();
        let rhs = regularized_incomplete_beta(&BetaParams::new(b, a).unwrap(), 1.0 - x).unwrap();
        prop_assert!((lhs + rhs - 1.0).abs() <= 1e-13, "{} + {}", lhs, rhs);
    }

    #[test]
    fn beta_cdf_monotone_in_shapes(a in 0.5f64..20.0, b in 0.5f64..20.0, da in 0.01f64..5.0, x in 0.01f64..0.99) {
        let cdf = |a, b| regularized_incomplete_beta(&BetaParams::new(a, b).unwrap(), x).unwrap();
        prop_assert!(cdf(a + da, b) <= cdf(a, b) + 1e-15);
        prop_assert!(cdf(a, b + da) >= cdf(a, b) - 1e-15);
    }

    #[test]
    fn poisson_tail_non_increasing(lambda in 0.01f64..100.0, k in 0i64..200) {
        let spec = PoissonSpec::new(lambda).unwrap();
        prop_assert!(poisson_upper_tail(&spec, k + 1) <= poisson_upper_tail(&spec, k));
    }

    #[test]
    fn poisson_pmf_normalized(lambda in 0.01f64..100.0) {
        let spec = PoissonSpec::new(lambda).unwrap();
        let total: f64 = (0..400).map(|k| poisson_pmf(&spec, k)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-14, "{}", total);
    }

    #[test]
    fn reflection_involution(p in 0.02f64..0.98, x in 0.0f64..=1.0) {
        let map = ReflectionMap::new(p).unwrap();
        let r = map.reflect_point(UnitPoint::new(x));
        prop_assert!((map.reflect_point(r).value() - x).abs() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&r.value()));
        prop_assert_eq!(r.value() < p, x > p);
    }
}

#[test]
fn pmf_of_empty_mean_is_a_point_mass() {
    let spec = BinomialSpec::new(7, BigRational::zero()).unwrap();
    assert!(binom_pmf(&spec, 0).unwrap().is_one());
    assert!(binom_upper_tail(&spec, 1).is_zero());
}
