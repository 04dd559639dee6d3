//! Binomial suites: the dominance chain, corollary bounds, Hoeffding's
//! lattice and majorization results, and the beta-function links.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sweep, Param, Relation, Tally, VerificationReport};
use crate::bounds::{
    beta_interpolation, binom_corollary_lower, binom_half_upper, binom_lower_tail_bound, binom_sharp_lower,
    binom_universal_lower, uniform_beta_lower, ShiftQuery,
};
use crate::exact::{
    is_integer, poisson_binomial_pmf, rational_pow, to_f64, BinomialSpec, BinomialTable, IndicatorVector,
};
use crate::special::ibeta_pair;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn table(n: u32, mu: &BigRational) -> BinomialTable {
    BinomialSpec::new(n, mu.clone()).expect("mean within [0, n]").table()
}

/// Means `j/10` for `j = from..=10n`.
fn tenth_grid(n: u32, from: u32) -> impl Iterator<Item = BigRational> {
    (from..=10 * n).map(|j| rat(j.into(), 10))
}

/// The binomial chain: `P(X_{n,μ} ≥ μ+l) ≥ (μ/(μ+l))^(μ+l) ≥ (1+l)^−(1+l)` exactly,
/// with equality in the first step exactly when `n = μ + l`.
pub fn verify_theorem1_chain(max_n: u32, max_l: u32) -> VerificationReport {
    let tally = sweep((2..=max_n).collect(), |n, t: &mut Tally| {
        for mu in 1..n {
            let tails = table(n, &int(mu.into())).upper_tails();
            for l in 1..=max_l.min(n - mu) {
                let tail = &tails[(mu + l) as usize];
                let sharp = binom_sharp_lower(mu, l).exact.expect("rational bound");
                let floor = binom_universal_lower(l).exact.expect("rational bound");
                let params = || {
                    vec![
                        Param::int("n", n.into()),
                        Param::int("mu", mu.into()),
                        Param::int("l", l.into()),
                    ]
                };
                t.check_exact("tail >= sharp", tail, Relation::Ge, &sharp, params);
                t.check_exact("sharp >= universal", &sharp, Relation::Ge, &floor, params);
                if n == mu + l {
                    t.check_exact("tail == sharp at n = mu + l", tail, Relation::Eq, &sharp, params);
                } else {
                    t.check_exact("tail > sharp for n > mu + l", tail, Relation::Gt, &sharp, params);
                }
            }
        }
    });
    tally.into_report(
        "theorem1",
        None,
        format!("integer 1 <= l <= {max_l}, 1 <= mu <= n - l, 2 <= n <= {max_n}"),
    )
}

/// `P(X_{n,μ} ≥ μ + l) ≤ 1/2` on the binomial chain grid.
pub fn verify_half_upper(max_n: u32, max_l: u32) -> VerificationReport {
    let tally = sweep((2..=max_n).collect(), |n, t: &mut Tally| {
        for mu in 1..n {
            let mu_r = int(mu.into());
            let tails = table(n, &mu_r).upper_tails();
            for l in 1..=max_l.min(n - mu) {
                let bound = binom_half_upper(&ShiftQuery::new(mu_r.clone(), l, Some(n)));
                debug_assert!(bound.validity.valid);
                let half = bound.exact.expect("rational bound");
                t.check_exact("tail <= 1/2", &tails[(mu + l) as usize], Relation::Le, &half, || {
                    vec![
                        Param::int("n", n.into()),
                        Param::int("mu", mu.into()),
                        Param::int("l", l.into()),
                    ]
                });
            }
        }
    });
    tally.into_report(
        "half-upper",
        None,
        format!("integer 1 <= l <= {max_l}, 1 <= mu <= n - l, 2 <= n <= {max_n}"),
    )
}

/// Both floor-based corollary bounds on `μ ∈ {0, 1/10, …, n}` inside their
/// validity ranges, and each bound against its universal floor.
pub fn verify_corollary_bounds(max_n: u32, max_l: u32) -> VerificationReport {
    let tally = sweep((1..=max_n).collect(), |n, t: &mut Tally| {
        for mu in tenth_grid(n, 0) {
            let tab = table(n, &mu);
            for l in 0..=max_l {
                let q = ShiftQuery::new(mu.clone(), l, Some(n));
                let params = || {
                    vec![
                        Param::int("n", n.into()),
                        Param::rat("mu", &mu),
                        Param::int("l", l.into()),
                    ]
                };
                let upper = binom_corollary_lower(&q);
                if upper.validity.valid {
                    let bound = upper.exact.as_ref().expect("rational bound");
                    let tail = tab.upper_tail(q.upper_threshold());
                    t.check_exact("P(X >= mu + l) >= floor bound", &tail, Relation::Ge, bound, params);
                    let floor = upper.universal_floor.as_ref().expect("floor");
                    t.check_exact(
                        "upper-tail bound >= universal floor",
                        bound,
                        Relation::Ge,
                        floor,
                        params,
                    );
                }
                let lower = binom_lower_tail_bound(&q);
                if lower.validity.valid {
                    let bound = lower.exact.as_ref().expect("rational bound");
                    let tail = tab.lower_tail(q.lower_threshold());
                    t.check_exact("P(X <= mu - l) >= floor bound", &tail, Relation::Ge, bound, params);
                    let floor = lower.universal_floor.as_ref().expect("floor");
                    t.check_exact(
                        "lower-tail bound >= universal floor",
                        bound,
                        Relation::Ge,
                        floor,
                        params,
                    );
                }
            }
        }
    });
    tally.into_report(
        "corollary",
        None,
        format!("mu in steps of 1/10, 1 <= n <= {max_n}, 0 <= l <= {max_l}"),
    )
}

/// `P(X_{n,μ} ≥ ⌈μ + l⌉)` at `n = l + 2`, the minimizing trial count.
fn floor_sequence_tail(l: u32, mu: &BigRational) -> BigRational {
    let q = ShiftQuery::new(mu.clone(), l, Some(l + 2));
    table(l + 2, mu).upper_tail(q.upper_threshold())
}

fn floor_value(l: u32) -> BigRational {
    rational_pow(&rat(1, i64::from(l) + 2), l + 2)
}

/// The floors `1/4` (`l = 0`) and `1/27` (`l = 1`) as infima of
/// `P(X_{l+2,μ} ≥ μ + l)` over `μ → 1⁺`.
///
/// The one-sided limit is evaluated exactly: for `μ ∈ (1, 2)` the threshold
/// is `l + 2 = n` and `P(X_{n,μ} = n) = (μ/n)^n` is continuous in `μ`. The
/// sampled sequence `μ = 1 + 10^−j` must stay strictly above the floor and
/// decrease towards it.
pub fn verify_floor_infimum() -> VerificationReport {
    let mut t = Tally::new();
    for l in 0..=1u32 {
        let n = l + 2;
        let floor = floor_value(l);
        let limit = table(n, &BigRational::one()).upper_tail(n.into());
        t.check_exact(
            "one-sided limit at mu = 1+ equals floor",
            &limit,
            Relation::Eq,
            &floor,
            || vec![Param::int("l", l.into())],
        );
        let mut previous: Option<BigRational> = None;
        for j in 1..=6u32 {
            let mu = BigRational::one() + rat(1, 10i64.pow(j));
            let tail = floor_sequence_tail(l, &mu);
            let params = || vec![Param::int("l", l.into()), Param::rat("mu", &mu)];
            t.check_exact("sampled tail > floor", &tail, Relation::Gt, &floor, params);
            if let Some(prev) = &previous {
                t.check_exact(
                    "sampled tail decreases towards floor",
                    &tail,
                    Relation::Lt,
                    prev,
                    params,
                );
            }
            previous = Some(tail);
        }
    }
    t.into_report(
        "floor-infimum",
        None,
        "l in {0, 1}, n = l + 2, mu = 1 + 10^-j for j = 1..6",
    )
}

/// The floors read as values: `|P(X_{l+2,μ} ≥ μ + l) − floor| ≤ 1e−12` at the
/// single sample `μ = 1 + 10^−6`.
pub fn verify_floor_sampled() -> VerificationReport {
    let mut t = Tally::new();
    let mu = BigRational::one() + rat(1, 1_000_000);
    for l in 0..=1u32 {
        let tail = to_f64(&floor_sequence_tail(l, &mu));
        let floor = to_f64(&floor_value(l));
        t.check(
            "tail at mu = 1 + 1e-6 within 1e-12 of floor",
            tail,
            Relation::Eq,
            floor,
            1e-12,
            || vec![Param::int("l", l.into()), Param::rat("mu", &mu)],
        );
    }
    t.into_report("floor-sampled", None, "l in {0, 1}, n = l + 2, mu = 1 + 1e-6")
}

/// Hoeffding's lattice comparisons for integer `μ`:
/// `P(X_{n,μ} ≥ a)` against `P(X_{n−1,μ−1} ≥ a−1)` and `P(X_{n−1,μ} ≥ a)`,
/// "≥" when `a > μ` and "≤" when `a ≤ μ`. With `max_l` set only thresholds
/// with `|a − μ| ≤ max_l` are checked.
pub fn verify_hoeffding_lattice(max_n: u32, max_l: Option<u32>) -> VerificationReport {
    let tally = sweep((2..=max_n).collect(), |n, t: &mut Tally| {
        let prev: Vec<Vec<BigRational>> = (0..n).map(|mu| table(n - 1, &int(mu.into())).upper_tails()).collect();
        for mu in 1..n {
            let cur = table(n, &int(mu.into())).upper_tails();
            let below = &prev[(mu - 1) as usize];
            let same = &prev[mu as usize];
            for a in 1..=n {
                if max_l.is_some_and(|m| a.abs_diff(mu) > m) {
                    continue;
                }
                let lhs = &cur[a as usize];
                let params = || {
                    vec![
                        Param::int("n", n.into()),
                        Param::int("mu", mu.into()),
                        Param::int("a", a.into()),
                    ]
                };
                let (rel, c2, c3) = if a > mu {
                    (Relation::Ge, "vs (n-1, mu-1, a-1): a > mu", "vs (n-1, mu, a): a > mu")
                } else {
                    (
                        Relation::Le,
                        "vs (n-1, mu-1, a-1) reversed: mu >= a",
                        "vs (n-1, mu, a) reversed: mu >= a",
                    )
                };
                t.check_exact(c2, lhs, rel, &below[(a - 1) as usize], params);
                // X_{n−1,μ} has no mass at n
                let same_tail = same.get(a as usize).cloned().unwrap_or_else(BigRational::zero);
                t.check_exact(c3, lhs, rel, &same_tail, params);
            }
        }
    });
    let thresholds = match max_l {
        Some(m) => format!("|a - mu| <= {m}"),
        None => "all thresholds 1 <= a <= n".to_string(),
    };
    tally.into_report(
        "lattice",
        None,
        format!("integer 1 <= mu <= n - 1, 2 <= n <= {max_n}, {thresholds}"),
    )
}

/// One random indicator vector with an integer mean.
#[derive(Debug, Clone)]
struct MajorizationCase {
    index: u32,
    mu: u32,
    probs: Vec<BigRational>,
}

/// Draws `n − 1` probabilities `k/d` with a common denominator `d ≤ 64`,
/// picks an integer mean `μ ∈ [1, n−1]` and sets the last probability to
/// `μ − Σ`; the draw is rejected when that falls outside `[0, 1]`.
fn draw_case(rng: &mut ChaCha8Rng, index: u32, n_max: u32) -> MajorizationCase {
    loop {
        let n = rng.gen_range(2..=n_max);
        let d: i64 = rng.gen_range(1..=64);
        let mut nums: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..=d)).collect();
        let mu: u32 = rng.gen_range(1..n);
        let last = i64::from(mu) * d - nums.iter().sum::<i64>();
        if (0..=d).contains(&last) {
            nums.push(last);
            let probs = nums.into_iter().map(|k| rat(k, d)).collect();
            return MajorizationCase { index, mu, probs };
        }
    }
}

/// Hoeffding's comparison of binomial and Poisson-binomial intervals:
/// `P(a ≤ Bin(n, μ/n) ≤ b) ≤ P(a ≤ ΣY_i ≤ b)` for every `0 ≤ a ≤ μ − 1` and
/// `μ ≤ b ≤ n`, over seeded random rational vectors with integer mean `μ`.
pub fn verify_hoeffding_theorem5(trials: u32, n_max: u32, seed: u64) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_max = n_max.max(2);
    let cases: Vec<MajorizationCase> = (0..trials).map(|i| draw_case(&mut rng, i, n_max)).collect();
    let tally = sweep(cases, |case, t: &mut Tally| {
        let n = case.probs.len() as u32;
        let v = IndicatorVector::new(case.probs.clone()).expect("probabilities in [0, 1]");
        debug_assert_eq!(v.mean(), int(case.mu.into()));
        let mixed = poisson_binomial_pmf(&v);
        let binom = table(n, &int(case.mu.into())).pmf_all();
        for a in 0..case.mu {
            for b in case.mu..=n {
                let range = a as usize..=b as usize;
                let lhs = binom[range.clone()].iter().fold(BigRational::zero(), |s, m| s + m);
                let rhs = mixed[range].iter().fold(BigRational::zero(), |s, m| s + m);
                t.check_exact(
                    "P(a <= binomial <= b) <= P(a <= sum <= b)",
                    &lhs,
                    Relation::Le,
                    &rhs,
                    || {
                        let mut p = vec![
                            Param::int("trial", case.index.into()),
                            Param::int("a", a.into()),
                            Param::int("b", b.into()),
                        ];
                        p.extend(case.probs.iter().map(|x| Param::rat("y", x)));
                        p
                    },
                );
            }
        }
    });
    tally.into_report(
        "theorem5",
        Some(seed),
        format!("{trials} vectors, 2 <= n <= {n_max}, common denominators <= 64, all (a, b)"),
    )
}

/// `I_{μ/n}(k, n−k+1) = P(X_{n,μ} ≥ k)` for `1 ≤ k ≤ n`, within `1e−12`.
pub fn verify_beta_binomial_bridge(max_n: u32) -> VerificationReport {
    let tally = sweep((1..=max_n).collect(), |n, t: &mut Tally| {
        for mu in tenth_grid(n, 0) {
            let tails = table(n, &mu).upper_tails();
            let p = &mu / int(n.into());
            let (x, y) = (to_f64(&p), to_f64(&(BigRational::one() - &p)));
            for k in 1..=n {
                let a = f64::from(k);
                let b = f64::from(n - k + 1);
                let beta = ibeta_pair(a, b, x, y).0;
                let exact = to_f64(&tails[k as usize]);
                t.check(
                    "I_{mu/n}(k, n-k+1) == P(X >= k)",
                    beta,
                    Relation::Eq,
                    exact,
                    1e-12,
                    || {
                        vec![
                            Param::int("n", n.into()),
                            Param::rat("mu", &mu),
                            Param::int("k", k.into()),
                        ]
                    },
                );
            }
        }
    });
    tally.into_report("bridge", None, format!("1 <= k <= n <= {max_n}, mu in steps of 1/10"))
}

/// The beta interpolations around `P(X_{n,μ} ≥ μ + l)`: lower strictly
/// below, upper above within `1e−10`, equal to the tail at integer `μ`
/// within `1e−12`, and within `1e−3` of it at `μ = k − 10^−4`.
pub fn verify_sandwich(max_n: u32, max_l: u32) -> VerificationReport {
    let tally = sweep((1..=max_n).collect(), |n, t: &mut Tally| {
        let n_r = int(n.into());
        for mu in tenth_grid(n, 1) {
            let tab = table(n, &mu);
            for l in 0..=max_l {
                if &mu + int(l.into()) >= n_r {
                    continue;
                }
                let q = ShiftQuery::new(mu.clone(), l, Some(n));
                let exact = to_f64(&tab.upper_tail(q.upper_threshold()));
                let sandwich = beta_interpolation(&q).expect("positive shapes");
                let params = || {
                    vec![
                        Param::int("n", n.into()),
                        Param::rat("mu", &mu),
                        Param::int("l", l.into()),
                    ]
                };
                t.check("lower < exact", sandwich.lower, Relation::Lt, exact, 0.0, params);
                t.check("exact <= upper", exact, Relation::Le, sandwich.upper, 1e-10, params);
                if is_integer(&mu) {
                    t.check(
                        "upper == exact at integer mu",
                        sandwich.upper,
                        Relation::Eq,
                        exact,
                        1e-12,
                        params,
                    );
                }
            }
        }
        // approach to each integer from below
        for k in 1..n {
            let mu = int(k.into()) - rat(1, 10_000);
            let tab = table(n, &mu);
            for l in 0..=max_l {
                if k + l > n {
                    continue;
                }
                let q = ShiftQuery::new(mu.clone(), l, Some(n));
                let exact = to_f64(&tab.upper_tail(q.upper_threshold()));
                let sandwich = beta_interpolation(&q).expect("positive shapes");
                t.check(
                    "upper - exact <= 1e-3 at mu = k - 1e-4",
                    sandwich.upper - exact,
                    Relation::Le,
                    1e-3,
                    0.0,
                    || {
                        vec![
                            Param::int("n", n.into()),
                            Param::rat("mu", &mu),
                            Param::int("l", l.into()),
                        ]
                    },
                );
            }
        }
    });
    tally.into_report(
        "sandwich",
        None,
        format!("0 < mu in steps of 1/10, mu + l < n <= {max_n}, 0 <= l <= {max_l}; mu = k - 1e-4"),
    )
}

/// `I_{μ/n}(μ/n + 1, 1 − μ/n) ≤ P(X_{n,μ} ≥ μ + 1)` within `1e−10` wherever
/// the bound reports itself valid (`μ/n ≤ 1/2`).
pub fn verify_uniform_beta(max_n: u32) -> VerificationReport {
    let tally = sweep((1..=max_n).collect(), |n, t: &mut Tally| {
        for mu in tenth_grid(n, 1) {
            let q = ShiftQuery::new(mu.clone(), 1, Some(n));
            let bound = uniform_beta_lower(&q);
            if !bound.validity.valid {
                continue;
            }
            let exact = to_f64(&table(n, &mu).upper_tail(q.upper_threshold()));
            t.check(
                "uniform beta bound <= exact",
                bound.value,
                Relation::Le,
                exact,
                1e-10,
                || vec![Param::int("n", n.into()), Param::rat("mu", &mu)],
            );
        }
    });
    tally.into_report(
        "uniform-beta",
        None,
        format!("l = 1, mu in steps of 1/10, mu/n <= 1/2, n <= {max_n}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_on_a_small_grid() {
        let r = verify_theorem1_chain(12, 3);
        assert!(r.passed, "{:?}", r.violations);
        // sharpness contributes a zero slack
        assert_eq!(r.worst_slack, Some(0.0));
    }

    #[test]
    fn lattice_examples() {
        // (n=3, μ=2, a=2): 20/27 ≤ 3/4
        let lhs = table(3, &int(2)).upper_tail(2);
        let rhs = table(2, &int(1)).upper_tail(1);
        assert_eq!(lhs, rat(20, 27));
        assert_eq!(rhs, rat(3, 4));
        // (n=3, μ=1, a=2): same-mean instance
        assert!(table(3, &int(1)).upper_tail(2) >= table(2, &int(1)).upper_tail(2));
        assert!(verify_hoeffding_lattice(10, Some(2)).passed);
    }

    #[test]
    fn theorem5_example_and_constant_vector() {
        let v = IndicatorVector::new(vec![int(1), rat(1, 2), rat(1, 2)]).unwrap();
        let pmf = poisson_binomial_pmf(&v);
        assert_eq!(&pmf[1] + &pmf[2], rat(3, 4));
        assert_eq!(table(3, &int(2)).interval(1, 2), rat(18, 27));
        let c = IndicatorVector::constant(4, rat(1, 2)).unwrap();
        assert_eq!(poisson_binomial_pmf(&c), table(4, &int(2)).pmf_all());
    }

    #[test]
    fn theorem5_draws_are_seeded() {
        let a = verify_hoeffding_theorem5(20, 6, 7);
        let b = verify_hoeffding_theorem5(20, 6, 7);
        assert_eq!(a, b);
        assert!(a.passed);
        assert_eq!(a.seed, Some(7));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..50 {
            let c = draw_case(&mut rng, i, 8);
            let sum = c.probs.iter().fold(BigRational::zero(), |s, p| s + p);
            assert_eq!(sum, int(c.mu.into()));
            assert!(c
                .probs
                .iter()
                .all(|p| *p >= BigRational::zero() && *p <= BigRational::one()));
        }
    }

    #[test]
    fn floor_limit_is_exact() {
        let r = verify_floor_infimum();
        assert!(r.passed, "{:?}", r.violations);
        // at μ = 1 + 1e−6 the tail still sits (1+1e−6)²/4 − 1/4 above 1/4
        let gap = floor_sequence_tail(0, &(BigRational::one() + rat(1, 1_000_000))) - rat(1, 4);
        assert_eq!(
            gap,
            (rat(1_000_001, 1_000_000) * rat(1_000_001, 1_000_000) - BigRational::one()) / int(4)
        );
    }
}
