//! Closed-form lower and upper bounds for tails near the mean.
//!
//! Each bound comes back as a [`BoundResult`] carrying its float value, the
//! exact rational when there is one, and a validity flag. Queries outside a
//! bound's range are not errors: they return `valid = false` with a reason so
//! that sweeps can chart where a bound stops applying.
//!
//! Non-integer thresholds follow the discrete reduction: `P(X ≥ μ + l)` means
//! `P(X ≥ ⌈μ + l⌉)` and `P(X ≤ μ − l)` means `P(X ≤ ⌊μ − l⌋)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::{ceil_int, floor_int, is_integer, rational_pow, to_f64};
use crate::special::{ibeta_pair, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("this bound needs the number of trials n")]
    MissingTrials,
    #[error("beta shape {name} = {value} must be positive")]
    Shape { name: &'static str, value: f64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// A threshold `μ ± l`, optionally with a trial count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftQuery {
    pub mu: BigRational,
    pub l: u32,
    pub n: Option<u32>,
}

impl ShiftQuery {
    pub fn new(mu: BigRational, l: u32, n: Option<u32>) -> Self {
        Self { mu, l, n }
    }

    /// `⌈μ + l⌉`, the integer threshold behind `P(X ≥ μ + l)`.
    pub fn upper_threshold(&self) -> i64 {
        to_i64(&ceil_int(&(&self.mu + BigRational::from_integer(self.l.into()))))
    }

    /// `⌊μ − l⌋`, the integer threshold behind `P(X ≤ μ − l)`.
    pub fn lower_threshold(&self) -> i64 {
        to_i64(&floor_int(&(&self.mu - BigRational::from_integer(self.l.into()))))
    }
}

fn to_i64(x: &BigInt) -> i64 {
    x.to_i64().expect("threshold fits in i64")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Parameters at which a sharp bound is attained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attainment {
    #[serde(serialize_with = "ser_rational")]
    pub mu: BigRational,
    pub n: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validity {
    pub valid: bool,
    pub reason: Option<String>,
}

impl Validity {
    fn ok() -> Self {
        Self {
            valid: true,
            reason: None,
        }
    }

    fn fail(reason: impl Into<String>) -> Self {
        Self {
            valid: false,
            reason: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    #[serde(serialize_with = "ser_rational_opt")]
    pub exact: Option<BigRational>,
    pub kind: BoundKind,
    pub attained_at: Option<Attainment>,
    pub validity: Validity,
    /// Parameter-free floor that the bound itself never drops below.
    #[serde(serialize_with = "ser_rational_opt")]
    pub universal_floor: Option<BigRational>,
}

impl BoundResult {
    fn exact(value: BigRational, kind: BoundKind, validity: Validity) -> Self {
        Self {
            value: to_f64(&value),
            exact: Some(value),
            kind,
            attained_at: None,
            validity,
            universal_floor: None,
        }
    }

    fn float(value: f64, kind: BoundKind, validity: Validity) -> Self {
        Self {
            value,
            exact: None,
            kind,
            attained_at: None,
            validity,
            universal_floor: None,
        }
    }

    fn attained(mut self, mu: BigRational, n: Option<u32>) -> Self {
        self.attained_at = Some(Attainment { mu, n });
        self
    }
}

fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_rational_opt<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

fn int(k: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// `(m / (m + s))^(m + s)`; zero when `m = 0`.
fn power_ratio(m: u64, s: u64) -> BigRational {
    let total = m + s;
    rational_pow(&(int(m) / int(total)), total as u32)
}

/// `(μ/(μ+l))^(μ+l)`, the minimum over `n ≥ μ + l` of `P(X_{n,μ} ≥ μ + l)`,
/// attained at `n = μ + l`.
pub fn binom_sharp_lower(mu: u32, l: u32) -> BoundResult {
    let validity = if mu == 0 {
        Validity::fail("needs μ ≥ 1")
    } else if l == 0 {
        Validity::fail("needs l ≥ 1")
    } else {
        Validity::ok()
    };
    BoundResult::exact(power_ratio(mu.into(), l.into()), BoundKind::Lower, validity)
        .attained(int(mu.into()), Some(mu + l))
}

/// `(1 + l)^−(1 + l)`, the minimum of [`binom_sharp_lower`] over `μ`.
pub fn binom_universal_lower(l: u32) -> BoundResult {
    let validity = if l == 0 {
        Validity::fail("needs l ≥ 1")
    } else {
        Validity::ok()
    };
    BoundResult::exact(power_ratio(1, l.into()), BoundKind::Lower, validity).attained(BigRational::one(), Some(1 + l))
}

/// Floor-based bound `(⌊μ⌋/(⌊μ⌋+l+1))^(⌊μ⌋+l+1)` on `P(X_{n,μ} ≥ μ + l)`
/// for real `1 ≤ μ ≤ n − l`, together with the floor `(2 + l)^−(2 + l)`.
pub fn binom_corollary_lower(q: &ShiftQuery) -> BoundResult {
    let l = u64::from(q.l);
    let validity = if q.mu < BigRational::one() {
        Validity::fail("needs μ ≥ 1; P(X ≥ μ + l) tends to 0 as μ → 0")
    } else if q.n.is_some_and(|n| q.mu > int(u64::from(n)) - int(l)) {
        Validity::fail("needs μ ≤ n − l")
    } else {
        Validity::ok()
    };
    let m = floor_int(&q.mu.clone().max(BigRational::zero()));
    let m = m.to_u64().expect("μ fits in u64");
    let mut result = BoundResult::exact(power_ratio(m, l + 1), BoundKind::Lower, validity);
    result.universal_floor = Some(power_ratio(1, l + 1));
    result
}

/// `(m/(m+l+1))^(m+l+1)` with `m = ⌊n − μ⌋` on `P(X_{n,μ} ≤ μ − l)`, for
/// `l ≤ μ ≤ n − 1`.
pub fn binom_lower_tail_bound(q: &ShiftQuery) -> BoundResult {
    let l = u64::from(q.l);
    let Some(n) = q.n else {
        return BoundResult::exact(
            BigRational::zero(),
            BoundKind::Lower,
            Validity::fail("needs the number of trials n"),
        );
    };
    let n_rat = int(n.into());
    let validity = if q.mu < int(l) {
        Validity::fail("needs μ ≥ l")
    } else if q.mu > &n_rat - BigRational::one() {
        Validity::fail("needs μ ≤ n − 1")
    } else {
        Validity::ok()
    };
    let m = floor_int(&(n_rat - &q.mu).max(BigRational::zero()));
    let m = m.to_u64().expect("n − μ fits in u64");
    let mut result = BoundResult::exact(power_ratio(m, l + 1), BoundKind::Lower, validity);
    result.universal_floor = Some(power_ratio(1, l + 1));
    result
}

/// `1 − e^−1 Σ_{k ≤ l} 1/k!`, the minimum over `λ ≥ 1` of
/// `P(Z_λ ≥ λ + l)` for `l ≥ 1`, attained at `λ = 1`.
///
/// Summed as `e^−1 Σ_{k > l} 1/k!`, which has no cancellation.
pub fn poisson_sharp_lower(l: u32) -> BoundResult {
    let mut term = 1.0;
    for k in 1..=l {
        term /= f64::from(k);
    }
    let mut sum = 0.0;
    let mut k = f64::from(l) + 1.0;
    loop {
        term /= k;
        let next = sum + term;
        if next == sum {
            break;
        }
        sum = next;
        k += 1.0;
    }
    let value = sum * (-1.0f64).exp();
    BoundResult::float(value, BoundKind::Lower, Validity::ok()).attained(BigRational::one(), None)
}

/// `e^−l` on `P(Z_λ ≤ λ − l)` for integer `λ > l ≥ 1`.
pub fn poisson_lower_tail_bound(l: u32) -> BoundResult {
    let validity = if l == 0 {
        Validity::fail("needs l ≥ 1")
    } else {
        Validity::ok()
    };
    BoundResult::float((-f64::from(l)).exp(), BoundKind::Lower, validity)
}

/// The constant `1/2` above `P(X_{n,μ} ≥ μ + l)` for integer `μ ≥ 1`,
/// `l ≥ 1`.
pub fn binom_half_upper(q: &ShiftQuery) -> BoundResult {
    let validity = if q.l == 0 {
        Validity::fail("needs l ≥ 1")
    } else if !is_integer(&q.mu) || q.mu < BigRational::one() {
        Validity::fail("needs integer μ ≥ 1")
    } else {
        Validity::ok()
    };
    BoundResult::exact(BigRational::new(1.into(), 2.into()), BoundKind::Upper, validity)
}

/// The constant `1/2` above `P(Z_λ ≥ λ + l)` for `l ≥ 1`.
pub fn poisson_half_upper(l: u32) -> BoundResult {
    let validity = if l == 0 {
        Validity::fail("needs l ≥ 1; P(Z_λ ≥ λ) > 1/2")
    } else {
        Validity::ok()
    };
    BoundResult::exact(BigRational::new(1.into(), 2.into()), BoundKind::Upper, validity)
}

/// Beta-CDF interpolations around `P(X_{n,μ} ≥ μ + l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interpolation {
    /// `I_{μ/n}(μ+l+1, n−μ−l)`, strictly below the tail.
    pub lower: f64,
    /// `I_{μ/n}(μ+l, n−μ−l+1)`, equal to the tail when `μ` is an integer.
    pub upper: f64,
}

/// Brackets `P(X_{n,μ} ≥ μ + l)` between two regularized incomplete beta
/// values at `μ/n` whose shapes move continuously with `μ`.
pub fn beta_interpolation(q: &ShiftQuery) -> Result<Interpolation, BoundsError> {
    let n = q.n.ok_or(BoundsError::MissingTrials)?;
    let shifted = &q.mu + int(q.l.into());
    let k = to_f64(&shifted);
    let rest = to_f64(&(int(n.into()) - &shifted));
    if k <= 0.0 {
        return Err(BoundsError::Shape {
            name: "μ + l",
            value: k,
        });
    }
    if rest <= 0.0 {
        return Err(BoundsError::Shape {
            name: "n − μ − l",
            value: rest,
        });
    }
    let p = &q.mu / int(n.into());
    let (x, y) = (to_f64(&p), to_f64(&(BigRational::one() - &p)));
    Ok(Interpolation {
        lower: ibeta_pair(k + 1.0, rest, x, y).0,
        upper: ibeta_pair(k, rest + 1.0, x, y).0,
    })
}

/// `I_{μ/n}(μ/n + l, 2 − μ/n − l)`, a lower bound on `P(X_{n,μ} ≥ μ + l)`
/// that does not depend on `n` once `μ/n` is fixed.
///
/// Valid for integer `μ` with `μ/n ≤ 1/2`, `μ + l < n` and both shapes
/// positive; the second shape rules out every `l ≥ 2`.
pub fn uniform_beta_lower(q: &ShiftQuery) -> BoundResult {
    let Some(n) = q.n else {
        return BoundResult::float(0.0, BoundKind::Lower, Validity::fail("needs the number of trials n"));
    };
    let p = &q.mu / int(n.into());
    let a = to_f64(&(&p + int(q.l.into())));
    let b_rat = BigRational::from_integer(2.into()) - &p - int(q.l.into());
    let b = to_f64(&b_rat);
    if !b_rat.is_positive() || !p.is_positive() {
        let reason = if b_rat.is_positive() {
            "needs μ > 0".to_string()
        } else {
            format!("second beta shape 2 − μ/n − l = {b} is not positive")
        };
        return BoundResult::float(0.0, BoundKind::Lower, Validity::fail(reason));
    }
    let validity = if p > BigRational::new(1.into(), 2.into()) {
        Validity::fail("needs μ/n ≤ 1/2")
    } else if &q.mu + int(q.l.into()) >= int(n.into()) {
        Validity::fail("needs μ + l < n")
    } else if !is_integer(&q.mu) {
        Validity::fail("holds for integer μ only")
    } else {
        Validity::ok()
    };
    let x = to_f64(&p);
    let y = to_f64(&(BigRational::one() - &p));
    BoundResult::float(ibeta_pair(a, b, x, y).0, BoundKind::Lower, validity)
}

/// `ln(4/3)`: for every `μ ≥ ln(4/3)` and every `n`, `P(X_{n,μ} ≥ μ) ≥ 1/4`.
pub fn small_mu_threshold() -> f64 {
    (1.0f64 / 3.0).ln_1p()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::exact::{binom_upper_tail, parse_rational, BinomialSpec};

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn q(mu: &str, l: u32, n: Option<u32>) -> ShiftQuery {
        ShiftQuery::new(r(mu), l, n)
    }

    #[test]
    fn sharp_lower_examples() {
        assert_eq!(binom_sharp_lower(1, 1).exact, Some(r("1/4")));
        assert_eq!(binom_sharp_lower(2, 1).exact, Some(r("8/27")));
        let b = binom_sharp_lower(3, 2);
        assert_eq!(b.exact, Some(r("243/3125")));
        assert_eq!(b.attained_at.unwrap().n, Some(5));
        let spec = BinomialSpec::new(5, r("3")).unwrap();
        assert_eq!(binom_upper_tail(&spec, 5), r("243/3125"));
        assert!(!binom_sharp_lower(0, 1).validity.valid);
    }

    #[test]
    fn universal_lower_examples() {
        assert_eq!(binom_universal_lower(1).exact, Some(r("1/4")));
        assert_eq!(binom_universal_lower(2).exact, Some(r("1/27")));
        assert_eq!(binom_universal_lower(3).exact, Some(r("1/256")));
    }

    #[test]
    fn corollary_examples() {
        let a = binom_corollary_lower(&q("1", 0, None));
        assert_eq!(a.exact, Some(r("1/4")));
        assert!(a.validity.valid);
        assert_eq!(binom_corollary_lower(&q("2.5", 0, None)).exact, Some(r("8/27")));
        let c = binom_corollary_lower(&q("1", 1, None));
        assert_eq!(c.exact, Some(r("1/27")));
        assert_eq!(c.universal_floor, Some(r("1/27")));
        assert!(!binom_corollary_lower(&q("0.5", 0, None)).validity.valid);
        assert!(!binom_corollary_lower(&q("4.5", 1, Some(5))).validity.valid);
        assert!(!binom_corollary_lower(&q("0", 0, None)).validity.valid);
    }

    #[test]
    fn lower_tail_examples() {
        assert_eq!(binom_lower_tail_bound(&q("4", 0, Some(5))).exact, Some(r("1/4")));
        assert_eq!(binom_lower_tail_bound(&q("2", 2, Some(4))).exact, Some(r("32/3125")));
        // ⌊5 − 2.5⌋ = 2
        assert_eq!(binom_lower_tail_bound(&q("2.5", 1, Some(5))).exact, Some(r("1/16")));
        assert!(!binom_lower_tail_bound(&q("0.5", 1, Some(5))).validity.valid);
        assert!(!binom_lower_tail_bound(&q("4.5", 1, Some(5))).validity.valid);
        assert!(!binom_lower_tail_bound(&q("2", 1, None)).validity.valid);
    }

    #[test]
    fn poisson_examples() {
        let e = (-1.0f64).exp();
        assert!((poisson_sharp_lower(0).value - (1.0 - e)).abs() < 4e-16);
        assert!((poisson_sharp_lower(1).value - (1.0 - 2.0 * e)).abs() < 4e-16);
        assert!((poisson_sharp_lower(2).value - (1.0 - 2.5 * e)).abs() < 4e-16);
        assert!((poisson_sharp_lower(0).value - 0.632121).abs() < 1e-6);
        assert!((poisson_sharp_lower(2).value - 0.080301).abs() < 1e-6);
        for l in 1..=3 {
            assert_eq!(poisson_lower_tail_bound(l).value, (-f64::from(l)).exp());
        }
        assert!(!poisson_lower_tail_bound(0).validity.valid);
    }

    #[test]
    fn interpolation_examples() {
        let s = beta_interpolation(&q("1", 0, Some(2))).unwrap();
        assert!((s.upper - 0.75).abs() < 1e-15);
        let s = beta_interpolation(&q("2", 1, Some(5))).unwrap();
        let exact = to_f64(&binom_upper_tail(&BinomialSpec::new(5, r("2")).unwrap(), 3));
        assert!((s.upper - exact).abs() < 1e-14);
        assert!(s.lower < exact);
        let s = beta_interpolation(&q("1.5", 1, Some(5))).unwrap();
        let exact = to_f64(&binom_upper_tail(&BinomialSpec::new(5, r("1.5")).unwrap(), 3));
        assert!(s.lower < exact && exact < s.upper);
        assert!(beta_interpolation(&q("4", 1, Some(5))).is_err());
        assert!(beta_interpolation(&q("1", 1, None)).is_err());
    }

    #[test]
    fn uniform_beta_examples() {
        let b = uniform_beta_lower(&q("2", 1, Some(5)));
        assert!(b.validity.valid);
        assert!((b.value - 0.16759232337780648518).abs() < 1e-14);
        assert!(b.value <= 0.31744);
        let b = uniform_beta_lower(&q("2", 1, Some(10)));
        assert!((b.value - 0.11569903668658917587).abs() < 1e-14);
        assert!(b.value <= 0.3222005);
        assert!(!uniform_beta_lower(&q("2", 2, Some(4))).validity.valid);
        assert!(!uniform_beta_lower(&q("1.5", 1, Some(5))).validity.valid);
    }

    #[test]
    fn small_mu_threshold_value() {
        let t = small_mu_threshold();
        assert!((t - 0.2876820724517809).abs() < 1e-15);
        assert!((1.0 - (-t).exp() - 0.25).abs() < 1e-15);
        let tail = |mu: &str| to_f64(&binom_upper_tail(&BinomialSpec::new(10, r(mu)).unwrap(), 1));
        assert!(tail("0.29") >= 0.25);
        assert!(tail("0.20") < 0.25);
    }

    #[test]
    fn thresholds_round_outward() {
        assert_eq!(q("1.5", 1, None).upper_threshold(), 3);
        assert_eq!(q("2", 1, None).upper_threshold(), 3);
        assert_eq!(q("2.5", 1, None).lower_threshold(), 1);
        assert_eq!(q("0.5", 1, None).lower_threshold(), -1);
    }
}
