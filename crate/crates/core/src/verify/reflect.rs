//! Reflection suites: properties of `r_p`, the weight ratio `h`, and the
//! odds identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sweep, Param, Relation, Tally, VerificationReport};
use crate::reflection::{Direction, ReflectionMap, UnitPoint, WeightFunction, FIXED_POINT_BAND};

const P_STEPS: u32 = 20;
const X_STEPS: u32 = 1000;

fn grid_p(i: u32) -> f64 {
    f64::from(i) / f64::from(P_STEPS)
}

fn grid_x(j: u32) -> f64 {
    f64::from(j) / f64::from(X_STEPS)
}

/// Central difference of `f` at `x` with step `h`, Richardson-extrapolated.
fn richardson_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn richardson_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let fx = f(x);
    let d = |h: f64| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// The reflection properties on `p ∈ {0.05, …, 0.95}`, `x ∈ {0.001, …, 0.999}`:
/// involution, defining equation, ordering in `p`, skew bounds, the first-
/// order ODE, derivatives against finite differences, and convexity.
pub fn verify_reflection() -> VerificationReport {
    let maps: Vec<ReflectionMap> = (1..P_STEPS)
        .map(|i| ReflectionMap::new(grid_p(i)).expect("p in (0, 1)"))
        .collect();
    let tally = sweep((1..X_STEPS).collect(), |j, t: &mut Tally| {
        let x = grid_x(j);
        let xp = UnitPoint::new(x);
        let mut previous: Option<(f64, UnitPoint)> = None;
        for map in &maps {
            let p = map.p();
            let params = || vec![Param::num("p", p), Param::num("x", x)];
            let r = map.reflect_point(xp);
            let back = map.reflect_point(r);
            t.check("involution", back.value(), Relation::Eq, x, 1e-10, params);
            let fx = map.ln_height(xp).exp();
            let fr = map.ln_height(r).exp();
            t.check("f_p(r(x)) == f_p(x)", fr, Relation::Eq, fx, 1e-13, params);

            if let Some((p_prev, r_prev)) = previous {
                let order = || vec![Param::num("p", p_prev), Param::num("q", p), Param::num("x", x)];
                // near 1 only the complements resolve the ordering
                if r.value() > 0.5 {
                    t.check(
                        "r increasing in p",
                        r.complement(),
                        Relation::Lt,
                        r_prev.complement(),
                        0.0,
                        order,
                    );
                } else {
                    t.check("r increasing in p", r.value(), Relation::Gt, r_prev.value(), 0.0, order);
                }
            }
            previous = Some((p, r));

            let mirror = 2.0 * p - x;
            if p < 0.5 {
                t.check(
                    "2p - x <= r",
                    r.value(),
                    Relation::Ge,
                    mirror,
                    4.0 * f64::EPSILON,
                    params,
                );
                // r < 1 − x, compared through complements
                t.check("r < 1 - x", r.complement(), Relation::Gt, x, 0.0, params);
            } else if p > 0.5 {
                t.check(
                    "2p - x >= r",
                    r.value(),
                    Relation::Le,
                    mirror,
                    4.0 * f64::EPSILON,
                    params,
                );
                t.check("r > 1 - x", r.complement(), Relation::Lt, x, 0.0, params);
            } else {
                t.check("r == 1 - x at p = 1/2", r.complement(), Relation::Eq, x, 1e-15, params);
            }

            let d1 = map.derivative(x).expect("x in (0, 1)");
            let ode = (p - r.value()) * x * (1.0 - x) * d1 - (p - x) * r.value() * r.complement();
            t.check("first-order ODE residual", ode, Relation::Eq, 0.0, 1e-10, params);
            let reflect = |y: f64| map.reflect(y).expect("y in [0, 1]");
            // differences of whichever of r, 1 − r is small keep their precision
            let upper = r.value() > 0.5;
            let smooth = |y: f64| {
                let ry = map.reflect_point(UnitPoint::new(y));
                if upper {
                    -ry.complement()
                } else {
                    ry.value()
                }
            };
            let step = 1e-3 * x.min(1.0 - x);
            let fd1 = richardson_first(smooth, x, step);
            t.check("r' matches finite differences", d1, Relation::Eq, fd1, 1e-6, params);

            if (x - p).abs() >= FIXED_POINT_BAND {
                let d2 = map.second_derivative(x).expect("away from p");
                if p == 0.5 {
                    t.check("r'' == 0 at p = 1/2", d2, Relation::Eq, 0.0, 1e-12, params);
                } else {
                    let fd2 = richardson_second(smooth, x, 10.0 * step);
                    let rel = (d2 - fd2).abs() / d2.abs();
                    t.check(
                        "r'' matches finite differences (relative)",
                        rel,
                        Relation::Le,
                        1e-4,
                        0.0,
                        params,
                    );
                    if p < 0.5 {
                        t.check("r'' >= 0 for p < 1/2", d2, Relation::Ge, 0.0, 0.0, params);
                    } else {
                        t.check("r'' <= 0 for p > 1/2", d2, Relation::Le, 0.0, 0.0, params);
                    }
                }
            }

            if p <= 0.5 && j > 1 && j + 1 < X_STEPS {
                let second = reflect(grid_x(j - 1)) - 2.0 * r.value() + reflect(grid_x(j + 1));
                t.check("convex for p <= 1/2", second, Relation::Ge, 0.0, 1e-9, params);
            }
        }
    });
    tally.into_report(
        "reflection",
        None,
        "p = 0.05..0.95 step 0.05, x = 0.001..0.999 step 0.001",
    )
}

/// Sign regimes for the weight ratio `h = g∘r_p / g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// `a ≥ 0 ≥ b`: non-increasing.
    PositiveNegative,
    /// `a ≤ 0 ≤ b`: non-decreasing.
    NegativePositive,
    /// `(a+b)(a/(a+b) − p) > 0`: decreasing.
    ProductPositive,
    /// `(a+b)(a/(a+b) − p) < 0`: increasing.
    ProductNegative,
}

impl Regime {
    const ALL: [Regime; 4] = [
        Regime::PositiveNegative,
        Regime::NegativePositive,
        Regime::ProductPositive,
        Regime::ProductNegative,
    ];

    fn name(self) -> &'static str {
        match self {
            Regime::PositiveNegative => "a >= 0 >= b",
            Regime::NegativePositive => "a <= 0 <= b",
            Regime::ProductPositive => "(a+b)(a/(a+b) - p) > 0",
            Regime::ProductNegative => "(a+b)(a/(a+b) - p) < 0",
        }
    }

    fn expected(self) -> Direction {
        match self {
            Regime::PositiveNegative | Regime::ProductPositive => Direction::Decreasing,
            Regime::NegativePositive | Regime::ProductNegative => Direction::Increasing,
        }
    }

    /// Draws `(p, a, b)` inside the regime.
    fn draw(self, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
        loop {
            let p = rng.gen_range(0.05..0.95);
            let (a, b) = match self {
                Regime::PositiveNegative => (rng.gen_range(0.0..3.0), rng.gen_range(-3.0..0.0)),
                Regime::NegativePositive => (rng.gen_range(-3.0..0.0), rng.gen_range(0.0..3.0)),
                _ => (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            };
            let s = a - p * (a + b);
            let keep = match self {
                Regime::PositiveNegative | Regime::NegativePositive => true,
                Regime::ProductPositive => s > 0.0,
                Regime::ProductNegative => s < 0.0,
            };
            if keep {
                return (p, a, b);
            }
        }
    }
}

const H_STEPS: u32 = 200;

/// Monotonicity of `ln h` over `x ∈ {0.005, …, 0.995}` in each sign regime,
/// `draws` seeded draws per regime, plus the residual of the first-order
/// equation for `h` divided through by `h`.
pub fn verify_hmono(draws: u32, seed: u64) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::new();
    for regime in Regime::ALL {
        for k in 0..draws {
            cells.push((regime, k, regime.draw(&mut rng)));
        }
    }
    let tally = sweep(cells, |(regime, k, (p, a, b)), t: &mut Tally| {
        let map = ReflectionMap::new(p).expect("p in (0, 1)");
        let w = WeightFunction::power(a, b);
        let params = |x: f64| {
            move || {
                vec![
                    Param::num("draw", f64::from(k)),
                    Param::num("p", p),
                    Param::num("a", a),
                    Param::num("b", b),
                    Param::num("x", x),
                ]
            }
        };
        let claim = format!("ln h monotone ({})", regime.name());
        let ln_h = |x: f64| map.ln_density_ratio(&w, UnitPoint::new(x));
        let mut last = ln_h(1.0 / f64::from(H_STEPS));
        for i in 2..H_STEPS {
            let x = f64::from(i) / f64::from(H_STEPS);
            let cur = ln_h(x);
            let rel = match regime.expected() {
                Direction::Decreasing => Relation::Le,
                _ => Relation::Ge,
            };
            t.check(&claim, cur, rel, last, 1e-10, params(x));
            last = cur;

            // (p − r) x (1−x) (ln h)' = (a − p(a+b)) (r − x)
            let r = map.reflect_point(UnitPoint::new(x)).value();
            let slope = richardson_first(ln_h, x, 1e-3 * x.min(1.0 - x));
            let residual = (p - r) * x * (1.0 - x) * slope - (a - p * (a + b)) * (r - x);
            t.check("h equation residual", residual, Relation::Eq, 0.0, 1e-8, params(x));
        }
    });
    tally.into_report(
        "hmono",
        Some(seed),
        format!("{draws} draws per regime, p in [0.05, 0.95), |a|, |b| < 3, x = 0.005..0.995 step 0.005"),
    )
}

/// Weight exponents, `f_p` powers and fixed points of the odds grid. The
/// weights cover both ratio directions and the constant case.
const ODDS_P: [f64; 5] = [0.2, 0.3, 0.5, 2.0 / 3.0, 0.7];
const ODDS_WEIGHTS: [(f64, f64); 8] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (0.0, 1.0),
    (2.0, 1.0),
    (1.0, 3.0),
    (-0.5, 0.5),
    (0.5, -0.5),
    (3.0, 3.0),
];
const ODDS_POWERS: [f64; 3] = [0.0, 3.0, 10.0];

/// Both odds identities, `|lhs − rhs| ≤ 1e−8 (1 + |lhs|)`, on the grid of
/// integrable `(p, a, b, fpow)`.
pub fn verify_odds_identity() -> VerificationReport {
    let mut cells = Vec::new();
    for p in ODDS_P {
        for (a, b) in ODDS_WEIGHTS {
            for fpow in ODDS_POWERS {
                if p * fpow + a > -1.0 && (1.0 - p) * fpow + b > -1.0 {
                    cells.push((p, a, b, fpow));
                }
            }
        }
    }
    let tally = sweep(cells, |(p, a, b, fpow), t: &mut Tally| {
        let params = || {
            vec![
                Param::num("p", p),
                Param::num("a", a),
                Param::num("b", b),
                Param::num("fpow", fpow),
            ]
        };
        let map = ReflectionMap::new(p).expect("p in (0, 1)");
        match map.odds_functional(&WeightFunction::power(a, b), fpow, 1e-12) {
            Ok(o) => {
                let tol = |lhs: f64| 1e-8 * (1.0 + lhs.abs());
                t.check(
                    "odds above p",
                    o.upper_expectation,
                    Relation::Eq,
                    o.upper_odds,
                    tol(o.upper_odds),
                    params,
                );
                t.check(
                    "odds below p",
                    o.lower_expectation,
                    Relation::Eq,
                    o.lower_odds,
                    tol(o.lower_odds),
                    params,
                );
            }
            Err(_) => t.fail("odds functional evaluates", params),
        }
    });
    tally.into_report(
        "odds",
        None,
        "p in {0.2, 0.3, 0.5, 2/3, 0.7}, (a, b) in 8 weights, fpow in {0, 3, 10}, integrable only",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_accurate() {
        let d = richardson_first(|x: f64| x.sin(), 0.7, 1e-3);
        assert!((d - 0.7f64.cos()).abs() < 1e-12);
        let s = richardson_second(|x: f64| x.exp(), 0.3, 1e-2);
        assert!((s - 0.3f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn regimes_draw_inside_their_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for regime in Regime::ALL {
            for _ in 0..50 {
                let (p, a, b) = regime.draw(&mut rng);
                let w = WeightFunction::power(a, b);
                match regime {
                    Regime::PositiveNegative => assert!(a >= 0.0 && b <= 0.0),
                    Regime::NegativePositive => assert!(a <= 0.0 && b >= 0.0),
                    _ => assert_eq!(w.ratio_direction(p), regime.expected()),
                }
            }
        }
    }

    #[test]
    fn small_hmono_run_passes() {
        let r = verify_hmono(3, 11);
        assert!(r.passed, "{:?}", r.violations.first());
    }
}
