//! The reflection `r_p` around the maximum of `f_p(x) = x^p (1−x)^(1−p)`.
//!
//! `r_p(x)` is the point on the other side of `p` with the same height
//! `f_p`. Points are carried as [`UnitPoint`]s, a value together with its
//! complement `1 − x`, because reflections of points near one endpoint land
//! extremely close to the other: for `p = 0.95`, `1 − r_p(0.001)` is about
//! `1e−57`, which `1.0 − r` cannot represent.
//!
//! The solver works in the coordinate `w = ln(s/m)`, where `s` is the
//! distance of the unknown from the endpoint on its side of `p` and `m` is
//! that side's mass (`p` or `1 − p`). In this coordinate the log-height drop
//! below the maximum is convex and decreasing, and it is evaluated as a sum
//! of two non-negative terms, so neither the flat top near `p` nor the
//! endpoint singularities cost precision.

use thiserror::Error;

use crate::special::{ln_beta, log1pmx, IntegrationError, TanhSinh};

const MAX_ITER: usize = 200;
/// Below this distance from `p` the ODE forms are 0/0.
pub const FIXED_POINT_BAND: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReflectionError {
    #[error("p = {0} must lie strictly between 0 and 1")]
    InvalidP(f64),
    #[error("x = {x} outside {domain}")]
    OutOfDomain { x: f64, domain: &'static str },
    #[error("second derivative is not evaluated within 1e-8 of the fixed point (x = {x})")]
    AtFixedPoint { x: f64 },
    #[error("weight scale c = {0} must be positive")]
    InvalidScale(f64),
    #[error("density x^{alpha} (1-x)^{beta} is not integrable on (0, 1)")]
    NonIntegrable { alpha: f64, beta: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// A point of `[0, 1]` stored with its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPoint {
    value: f64,
    complement: f64,
}

impl UnitPoint {
    pub fn new(x: f64) -> Self {
        Self {
            value: x,
            complement: 1.0 - x,
        }
    }

    pub fn from_complement(c: f64) -> Self {
        Self {
            value: 1.0 - c,
            complement: c,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }

    /// `x − p`, taken from whichever coordinate is accurate.
    fn offset(&self, p: f64, q: f64) -> f64 {
        if self.value <= 0.5 {
            self.value - p
        } else {
            q - self.complement
        }
    }
}

/// `e^w − 1 − w`.
fn expm1mx(w: f64) -> f64 {
    if w.abs() >= 0.5 {
        return w.exp_m1() - w;
    }
    let mut term = w * w / 2.0;
    let mut sum = term;
    let mut k = 3.0;
    loop {
        term *= w / k;
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1.0;
    }
}

/// `ln f_p(p) − ln f_p(y)` for `y` at log-coordinate `w` on the side of mass
/// `m`; `o` is the other mass.
fn depth(m: f64, o: f64, w: f64) -> f64 {
    let delta = -m * w.exp_m1();
    -o * log1pmx(delta / o) + m * expm1mx(w)
}

/// Derivative of [`depth`] in `w`.
fn depth_slope(m: f64, o: f64, w: f64) -> f64 {
    let delta = -m * w.exp_m1();
    -delta / (o + delta)
}

/// Monotonicity of `h = g∘r_p / g` in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

/// `g(x) = c x^a (1−x)^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl WeightFunction {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, ReflectionError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ReflectionError::InvalidScale(c));
        }
        Ok(Self { a, b, c })
    }

    /// Unit-scale weight `x^a (1−x)^b`.
    pub fn power(a: f64, b: f64) -> Self {
        Self { a, b, c: 1.0 }
    }

    pub fn ln_value(&self, x: UnitPoint) -> f64 {
        self.c.ln() + self.a * x.value.ln() + self.b * x.complement.ln()
    }

    /// Direction of `g(r_p(x))/g(x)` in `x`, from the sign of
    /// `(a+b)(a/(a+b) − p) = a − p(a+b)`.
    pub fn ratio_direction(&self, p: f64) -> Direction {
        let s = self.a - p * (self.a + self.b);
        if s > 0.0 {
            Direction::Decreasing
        } else if s < 0.0 {
            Direction::Increasing
        } else {
            Direction::Constant
        }
    }
}

/// Odds of the two halves next to their reflected expectations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OddsIdentity {
    /// `P(X ≥ p) / P(X < p)`.
    pub upper_odds: f64,
    /// `E(−r'(X) g(r(X))/g(X) | X < p)`.
    pub upper_expectation: f64,
    /// `P(X ≤ p) / P(X > p)`.
    pub lower_odds: f64,
    /// `E(−r'(X) g(r(X))/g(X) | X > p)`.
    pub lower_expectation: f64,
}

/// `r_p` for a fixed `p ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionMap {
    p: f64,
    q: f64,
}

impl ReflectionMap {
    pub fn new(p: f64) -> Result<Self, ReflectionError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ReflectionError::InvalidP(p));
        }
        Ok(Self { p, q: 1.0 - p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `ln f_p(x)`.
    pub fn ln_height(&self, x: UnitPoint) -> f64 {
        self.p * x.value.ln() + self.q * x.complement.ln()
    }

    /// `ln f_p(p) − ln f_p(x)`, accurate near `p` and near the endpoints.
    pub fn depth(&self, x: UnitPoint) -> f64 {
        if x.value == self.p {
            return 0.0;
        }
        if x.value < self.p {
            depth(self.p, self.q, self.side_log(x.value, self.p))
        } else {
            depth(self.q, self.p, self.side_log(x.complement, self.q))
        }
    }

    /// `ln(s/m)` for a side coordinate `s`.
    fn side_log(&self, s: f64, m: f64) -> f64 {
        if s > 0.5 * m {
            ((s - m) / m).ln_1p()
        } else {
            (s / m).ln()
        }
    }

    /// `r_p(x)` for `x ∈ [0, 1]`.
    pub fn reflect(&self, x: f64) -> Result<f64, ReflectionError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ReflectionError::OutOfDomain { x, domain: "[0, 1]" });
        }
        Ok(self.reflect_point(UnitPoint::new(x)).value)
    }

    /// `r_p` on a point with its complement.
    pub fn reflect_point(&self, x: UnitPoint) -> UnitPoint {
        if x.value == self.p {
            return x;
        }
        if x.value <= 0.0 {
            return UnitPoint::from_complement(0.0);
        }
        if x.complement <= 0.0 {
            return UnitPoint::new(0.0);
        }
        if x.value < self.p {
            let target = depth(self.p, self.q, self.side_log(x.value, self.p));
            let w = solve(self.q, self.p, target);
            UnitPoint {
                value: self.p - self.q * w.exp_m1(),
                complement: self.q * w.exp(),
            }
        } else {
            let target = depth(self.q, self.p, self.side_log(x.complement, self.q));
            let w = solve(self.p, self.q, target);
            UnitPoint {
                value: self.p * w.exp(),
                complement: self.q - self.p * w.exp_m1(),
            }
        }
    }

    /// `r_p'(x)` from `(p − r) x (1−x) r' = (p − x) r (1−r)`; `−1` within
    /// `1e−8` of `p`.
    pub fn derivative(&self, x: f64) -> Result<f64, ReflectionError> {
        if !(x > 0.0 && x < 1.0) {
            return Err(ReflectionError::OutOfDomain { x, domain: "(0, 1)" });
        }
        Ok(self.derivative_at(UnitPoint::new(x)))
    }

    fn derivative_at(&self, x: UnitPoint) -> f64 {
        let dx = x.offset(self.p, self.q);
        if dx.abs() < FIXED_POINT_BAND {
            return -1.0;
        }
        let r = self.reflect_point(x);
        let dr = r.offset(self.p, self.q);
        // (p − x)/(p − r) · r(1−r) / (x(1−x))
        (dx / dr) * ((r.value / x.complement) * (r.complement / x.value))
    }

    /// `ln(−r_p'(x))`, finite even where `r_p'` itself overflows.
    fn ln_neg_derivative(&self, x: UnitPoint) -> f64 {
        let dx = x.offset(self.p, self.q);
        if dx.abs() < FIXED_POINT_BAND {
            return 0.0;
        }
        let r = self.reflect_point(x);
        let dr = r.offset(self.p, self.q);
        (dx / dr).abs().ln() + r.value.ln() + r.complement.ln() - x.value.ln() - x.complement.ln()
    }

    /// `r_p''(x)` from the second-order relation; refused within `1e−8` of `p`.
    pub fn second_derivative(&self, x: f64) -> Result<f64, ReflectionError> {
        if !(x > 0.0 && x < 1.0) {
            return Err(ReflectionError::OutOfDomain { x, domain: "(0, 1)" });
        }
        let pt = UnitPoint::new(x);
        let dx = pt.offset(self.p, self.q);
        if dx.abs() < FIXED_POINT_BAND {
            return Err(ReflectionError::AtFixedPoint { x });
        }
        let r = self.reflect_point(pt);
        let dr = r.offset(self.p, self.q);
        let r1 = self.derivative_at(pt);
        // p q (2p − x − r)(r − x) r' / ((p − x) x (1−x) (p − r)²)
        let num = self.p * self.q * (-(dx + dr)) * (dr - dx) * r1;
        let den = (-dx) * pt.value * pt.complement * dr * dr;
        Ok(num / den)
    }

    /// `ln h(x)` with `h(x) = g(r_p(x)) / g(x)`.
    pub fn ln_density_ratio(&self, w: &WeightFunction, x: UnitPoint) -> f64 {
        if x.value == self.p {
            return 0.0;
        }
        let r = self.reflect_point(x);
        let ln_ratio = |num: f64, den: f64| {
            let t = (num - den) / den;
            if t.abs() < 0.5 {
                t.ln_1p()
            } else {
                num.ln() - den.ln()
            }
        };
        let mut out = 0.0;
        if w.a != 0.0 {
            out += w.a * ln_ratio(r.value, x.value);
        }
        if w.b != 0.0 {
            out += w.b * ln_ratio(r.complement, x.complement);
        }
        out
    }

    /// `h(x) = g(r_p(x)) / g(x)` for `x ∈ (0, 1)`.
    pub fn density_ratio(&self, w: &WeightFunction, x: f64) -> Result<f64, ReflectionError> {
        if !(x > 0.0 && x < 1.0) {
            return Err(ReflectionError::OutOfDomain { x, domain: "(0, 1)" });
        }
        Ok(self.ln_density_ratio(w, UnitPoint::new(x)).exp())
    }

    /// Both odds identities for the density `∝ f_p^fpow · g` on `(0, 1)`,
    /// each side computed by its own quadrature.
    pub fn odds_functional(&self, w: &WeightFunction, fpow: f64, tol: f64) -> Result<OddsIdentity, ReflectionError> {
        let alpha = self.p * fpow + w.a;
        let beta = self.q * fpow + w.b;
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(ReflectionError::NonIntegrable { alpha, beta });
        }
        let ln_norm = ln_beta(alpha + 1.0, beta + 1.0);
        let ln_density = |x: UnitPoint| alpha * x.value.ln() + beta * x.complement.ln() - ln_norm;
        let weighted = |x: UnitPoint| {
            let r = self.reflect_point(x);
            // r underflowed to an endpoint: the integrand behaves like
            // r^(alpha+1) or (1−r)^(beta+1) there and vanishes
            if r.value == 0.0 || r.complement == 0.0 {
                return 0.0;
            }
            (ln_density(x) + self.ln_neg_derivative(x) + self.ln_density_ratio(w, x)).exp()
        };
        let rule = TanhSinh::default();
        // the upper half is integrated in y = 1 − x so points near 1 keep
        // their complement
        let below = |y: f64| ln_density(UnitPoint::new(y)).exp();
        let above = |y: f64| ln_density(UnitPoint::from_complement(y)).exp();
        let mass_below = rule.integrate(below, 0.0, self.p, tol)?.value;
        let mass_above = rule.integrate(above, 0.0, self.q, tol)?.value;
        let moved_below = rule.integrate(|y| weighted(UnitPoint::new(y)), 0.0, self.p, tol)?.value;
        let moved_above = rule
            .integrate(|y| weighted(UnitPoint::from_complement(y)), 0.0, self.q, tol)?
            .value;
        Ok(OddsIdentity {
            upper_odds: mass_above / mass_below,
            upper_expectation: moved_below / mass_below,
            lower_odds: mass_below / mass_above,
            lower_expectation: moved_above / mass_above,
        })
    }
}

/// Root of `depth(m, o, w) = target` for `w ≤ 0`.
///
/// `depth` is convex and decreasing in `w`, so Newton steps taken from a
/// point left of the root stay left of it; a bisection fallback guards
/// against rounding.
fn solve(m: f64, o: f64, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let mut hi = 0.0;
    let mut lo = -1.0;
    while depth(m, o, lo) < target {
        hi = lo;
        lo *= 2.0;
        if lo < -1e6 {
            return lo;
        }
    }
    let mut w = lo;
    for _ in 0..MAX_ITER {
        let residual = depth(m, o, w) - target;
        if residual == 0.0 {
            return w;
        }
        if residual > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let slope = depth_slope(m, o, w);
        let mut next = w - residual / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * w.abs() {
            return next;
        }
        w = next;
    }
    w
}

pub fn reflect(map: &ReflectionMap, x: f64) -> Result<f64, ReflectionError> {
    map.reflect(x)
}

pub fn reflect_derivative(map: &ReflectionMap, x: f64) -> Result<f64, ReflectionError> {
    map.derivative(x)
}

pub fn reflect_second_derivative(map: &ReflectionMap, x: f64) -> Result<f64, ReflectionError> {
    map.second_derivative(x)
}

pub fn density_ratio(map: &ReflectionMap, w: &WeightFunction, x: f64) -> Result<f64, ReflectionError> {
    map.density_ratio(w, x)
}

/// [`ReflectionMap::odds_functional`] at tolerance `1e−12`.
pub fn odds_functional(map: &ReflectionMap, w: &WeightFunction, fpow: f64) -> Result<OddsIdentity, ReflectionError> {
    map.odds_functional(w, fpow, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(p: f64) -> ReflectionMap {
        ReflectionMap::new(p).unwrap()
    }

    #[test]
    fn half_is_the_mirror() {
        let m = map(0.5);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((m.reflect(x).unwrap() - (1.0 - x)).abs() < 1e-15);
            assert!((m.derivative(x).unwrap() + 1.0).abs() < 1e-15);
        }
        assert!(m.second_derivative(0.2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn endpoints_and_fixed_point_are_exact() {
        for &p in &[0.05, 0.3, 0.5, 0.95] {
            let m = map(p);
            assert_eq!(m.reflect(0.0).unwrap(), 1.0);
            assert_eq!(m.reflect(1.0).unwrap(), 0.0);
            assert_eq!(m.reflect(p).unwrap(), p);
            assert_eq!(m.derivative(p).unwrap(), -1.0);
            assert!(matches!(
                m.second_derivative(p),
                Err(ReflectionError::AtFixedPoint { .. })
            ));
        }
    }

    #[test]
    fn reflects_to_equal_height_by_bisection() {
        // plain bisection on the defining equation as an independent oracle
        let (p, x) = (0.3f64, 0.1f64);
        let f = |y: f64| p * y.ln() + (1.0 - p) * (1.0 - y).ln();
        let target = f(x);
        let (mut lo, mut hi) = (p, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = map(p).reflect(x).unwrap();
        assert!((r - lo).abs() < 1e-14, "{r} vs {lo}");
    }

    #[test]
    fn extreme_reflections_keep_the_complement() {
        let m = map(0.95);
        let r = m.reflect_point(UnitPoint::new(0.001));
        assert!(r.complement() > 0.0 && r.complement() < 1e-50);
        // q ln(1−r) = p ln x + q ln(1−x) − p ln r
        let lhs = 0.05 * r.complement().ln();
        let rhs = 0.95 * 0.001f64.ln() + 0.05 * 0.999f64.ln() - 0.95 * r.value().ln();
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
        let back = m.reflect_point(r);
        assert!((back.value() - 0.001).abs() < 1e-15);
    }

    #[test]
    fn near_fixed_point_is_linear() {
        let m = map(0.3);
        for &d in &[1e-12, 1e-9, 1e-6] {
            let x = 0.3 - d;
            let dd = 0.3 - x;
            let r = m.reflect(x).unwrap();
            assert!(((r - 0.3) - dd).abs() <= 10.0 * dd * dd + 2e-16, "d = {d}");
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let m = map(0.3);
        let h = 1e-6;
        for &x in &[0.05, 0.1, 0.25, 0.5, 0.9] {
            let fd = (m.reflect(x + h).unwrap() - m.reflect(x - h).unwrap()) / (2.0 * h);
            assert!((m.derivative(x).unwrap() - fd).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn second_derivative_signs_and_difference() {
        let h = 1e-4;
        for &(p, x) in &[(0.3, 0.1), (0.7, 0.9), (0.3, 0.6)] {
            let m = map(p);
            let r2 = m.second_derivative(x).unwrap();
            let fd = (m.reflect(x + h).unwrap() - 2.0 * m.reflect(x).unwrap() + m.reflect(x - h).unwrap()) / (h * h);
            assert!(((r2 - fd) / r2).abs() < 1e-4, "p={p} x={x}: {r2} vs {fd}");
            if p < 0.5 {
                assert!(r2 > 0.0);
            } else {
                assert!(r2 < 0.0);
            }
        }
    }

    #[test]
    fn density_ratio_examples() {
        let half = map(0.5);
        for &a in &[0.5, 2.0, 7.0] {
            let g = WeightFunction::power(a, a);
            for i in 1..20 {
                let x = i as f64 / 20.0;
                assert!((half.density_ratio(&g, x).unwrap() - 1.0).abs() < 1e-13);
            }
        }
        let m = map(0.3);
        let g = WeightFunction::power(1.0, 0.0);
        assert!(m.density_ratio(&g, 1e-6).unwrap() > 1e5);
        assert_eq!(g.ratio_direction(0.3), Direction::Decreasing);
        let mut last = f64::INFINITY;
        for i in 1..100 {
            let v = m.density_ratio(&g, i as f64 / 100.0).unwrap();
            assert!(v < last);
            last = v;
        }
        let g = WeightFunction::power(0.0, 1.0);
        assert_eq!(g.ratio_direction(0.3), Direction::Increasing);
        assert_eq!(m.density_ratio(&g, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn odds_identity_examples() {
        let half = map(0.5);
        let sym = half
            .odds_functional(&WeightFunction::power(2.0, 2.0), 0.0, 1e-12)
            .unwrap();
        assert!((sym.upper_odds - 1.0).abs() < 1e-10);
        assert!((sym.upper_expectation - 1.0).abs() < 1e-10);

        let m = map(0.3);
        let o = m
            .odds_functional(&WeightFunction::power(0.0, 0.0), 10.0, 1e-12)
            .unwrap();
        assert!((o.upper_odds - o.upper_expectation).abs() < 1e-8 * (1.0 + o.upper_odds));
        assert!((o.lower_odds - o.lower_expectation).abs() < 1e-8 * (1.0 + o.lower_odds));

        // Beta(3, 2) with p = 2/3
        let m = map(2.0 / 3.0);
        let o = m.odds_functional(&WeightFunction::power(2.0, 1.0), 0.0, 1e-12).unwrap();
        assert!((o.upper_odds - o.upper_expectation).abs() < 1e-8 * (1.0 + o.upper_odds));
        // I_{2/3}(3, 2) = 4x³ − 3x⁴ = 16/27, so P(W ≥ 2/3) = 11/27
        assert!((o.upper_odds - 11.0 / 16.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ReflectionMap::new(0.0).is_err());
        assert!(ReflectionMap::new(1.0).is_err());
        assert!(map(0.3).reflect(1.5).is_err());
        assert!(map(0.3).derivative(0.0).is_err());
        assert!(WeightFunction::new(1.0, 1.0, 0.0).is_err());
        let err = map(0.3).odds_functional(&WeightFunction::power(-2.0, 0.0), 0.0, 1e-10);
        assert!(matches!(err, Err(ReflectionError::NonIntegrable { .. })));
    }
}
