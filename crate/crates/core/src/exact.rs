//! Exact rational binomial and Poisson-binomial probabilities.
//!
//! Every discrete probability in this crate is rational whenever the mean is
//! rational, so these routines never round. They are the ground truth that the
//! floating-point code in [`crate::special`] and the bounds in
//! [`crate::bounds`] are checked against.
//!
//! For `X ~ Binom(n, μ/n)` with `μ = a/d` in lowest terms every mass
//! `C(n,k) (a/dn)^k ((dn−a)/dn)^(n−k)` shares the denominator `(dn)^n`, so a
//! whole distribution is carried as integer numerators over one denominator
//! ([`BinomialTable`]) and only reduced when a single value is handed out.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("binomial needs at least one trial")]
    NoTrials,
    #[error("mean {mu} outside [0, {n}]")]
    MeanOutOfRange { mu: String, n: u32 },
    #[error("k = {k} outside 0..={n}")]
    KOutOfRange { k: i64, n: u32 },
    #[error("indicator probability {value} at index {index} outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: String },
    #[error("indicator vector is empty")]
    EmptyVector,
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

/// `Binom(n, μ/n)`: `n` trials with expected value `μ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinomialSpec {
    n: u32,
    mu: BigRational,
}

impl BinomialSpec {
    pub fn new(n: u32, mu: BigRational) -> Result<Self, ExactError> {
        if n == 0 {
            return Err(ExactError::NoTrials);
        }
        if mu.is_negative() || mu > BigRational::from_integer(n.into()) {
            return Err(ExactError::MeanOutOfRange { mu: mu.to_string(), n });
        }
        Ok(Self { n, mu })
    }

    pub fn with_integer_mean(n: u32, mu: u32) -> Result<Self, ExactError> {
        Self::new(n, BigRational::from_integer(mu.into()))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mu(&self) -> &BigRational {
        &self.mu
    }

    /// Success probability `μ/n`.
    pub fn p(&self) -> BigRational {
        &self.mu / BigInt::from(self.n)
    }

    /// The law of `n − X`, i.e. `Binom(n, (n−μ)/n)`.
    pub fn mirrored(&self) -> Self {
        Self {
            n: self.n,
            mu: BigRational::from_integer(self.n.into()) - &self.mu,
        }
    }

    pub fn table(&self) -> BinomialTable {
        BinomialTable::new(self)
    }

    /// Integer pieces `(a, dn − a, dn)` with `p = a/(dn)`.
    fn integer_parts(&self) -> (BigInt, BigInt, BigInt) {
        let d = self.mu.denom().clone();
        let a = self.mu.numer().clone();
        let total = d * BigInt::from(self.n);
        let b = &total - &a;
        (a, b, total)
    }
}

/// Full distribution of one binomial as integer numerators over a shared
/// denominator. Tail sums are cumulative sums of the numerators.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    n: u32,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl BinomialTable {
    pub fn new(spec: &BinomialSpec) -> Self {
        let n = spec.n as usize;
        let (a, b, total) = spec.integer_parts();

        let mut pow_a = Vec::with_capacity(n + 1);
        let mut pow_b = Vec::with_capacity(n + 1);
        pow_a.push(BigInt::one());
        pow_b.push(BigInt::one());
        for i in 1..=n {
            let next_a = &pow_a[i - 1] * &a;
            let next_b = &pow_b[i - 1] * &b;
            pow_a.push(next_a);
            pow_b.push(next_b);
        }

        let mut numerators = Vec::with_capacity(n + 1);
        let mut choose = BigInt::one();
        for k in 0..=n {
            numerators.push(&choose * &pow_a[k] * &pow_b[n - k]);
            choose = choose * BigInt::from(n - k) / BigInt::from(k + 1);
        }

        Self {
            n: spec.n,
            numerators,
            denominator: num_traits::pow(total, n),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn pmf(&self, k: u32) -> Result<BigRational, ExactError> {
        if k > self.n {
            return Err(ExactError::KOutOfRange { k: k.into(), n: self.n });
        }
        Ok(self.ratio(self.numerators[k as usize].clone()))
    }

    pub fn pmf_all(&self) -> Vec<BigRational> {
        self.numerators.iter().map(|x| self.ratio(x.clone())).collect()
    }

    /// `P(X ≥ k)` for `k = 0..=n+1`; index `n+1` holds 0.
    pub fn upper_tails(&self) -> Vec<BigRational> {
        let n = self.n as usize;
        let mut acc = BigInt::zero();
        let mut out = vec![BigRational::zero(); n + 2];
        for k in (0..=n).rev() {
            acc += &self.numerators[k];
            out[k] = self.ratio(acc.clone());
        }
        out
    }

    /// `P(X ≥ k)` for any integer `k`.
    pub fn upper_tail(&self, k: i64) -> BigRational {
        let n = i64::from(self.n);
        if k <= 0 {
            return BigRational::one();
        }
        if k > n {
            return BigRational::zero();
        }
        let k = k as usize;
        let upper_terms = self.n as usize - k + 1;
        if upper_terms <= k {
            let s: BigInt = self.numerators[k..].iter().sum();
            self.ratio(s)
        } else {
            let s: BigInt = self.numerators[..k].iter().sum();
            BigRational::one() - self.ratio(s)
        }
    }

    /// `P(X ≤ k)` for any integer `k`.
    pub fn lower_tail(&self, k: i64) -> BigRational {
        BigRational::one() - self.upper_tail(k + 1)
    }

    /// `P(lo ≤ X ≤ hi)`, zero for an empty range.
    pub fn interval(&self, lo: i64, hi: i64) -> BigRational {
        let lo = lo.max(0);
        let hi = hi.min(i64::from(self.n));
        if lo > hi {
            return BigRational::zero();
        }
        let s: BigInt = self.numerators[lo as usize..=hi as usize].iter().sum();
        self.ratio(s)
    }

    fn ratio(&self, numer: BigInt) -> BigRational {
        BigRational::new(numer, self.denominator.clone())
    }
}

/// Exact `P(X = k)` for `X ~ Binom(n, μ/n)`.
pub fn binom_pmf(spec: &BinomialSpec, k: i64) -> Result<BigRational, ExactError> {
    let n = spec.n;
    if k < 0 || k > i64::from(n) {
        return Err(ExactError::KOutOfRange { k, n });
    }
    let k = k as u32;
    let (a, b, total) = spec.integer_parts();
    let numer = binomial_coefficient(n, k) * num_traits::pow(a, k as usize) * num_traits::pow(b, (n - k) as usize);
    Ok(BigRational::new(numer, num_traits::pow(total, n as usize)))
}

/// Exact `P(X ≥ k)`; 1 for `k ≤ 0` and 0 for `k > n`.
///
/// Sums whichever of the two tails has fewer terms.
pub fn binom_upper_tail(spec: &BinomialSpec, k: i64) -> BigRational {
    let n = i64::from(spec.n);
    if k <= 0 {
        return BigRational::one();
    }
    if k > n {
        return BigRational::zero();
    }
    let (a, b, total) = spec.integer_parts();
    let term = |j: u32| {
        binomial_coefficient(spec.n, j)
            * num_traits::pow(a.clone(), j as usize)
            * num_traits::pow(b.clone(), (spec.n - j) as usize)
    };
    let denom = num_traits::pow(total, spec.n as usize);
    let k = k as u32;
    if spec.n - k < k {
        let s: BigInt = (k..=spec.n).map(term).sum();
        BigRational::new(s, denom)
    } else {
        let s: BigInt = (0..k).map(term).sum();
        BigRational::one() - BigRational::new(s, denom)
    }
}

/// Exact `P(X ≤ k)`.
pub fn binom_lower_tail(spec: &BinomialSpec, k: i64) -> BigRational {
    BigRational::one() - binom_upper_tail(spec, k + 1)
}

pub fn binomial_coefficient(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// Success probabilities of independent indicators `Y_1, …, Y_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorVector {
    probs: Vec<BigRational>,
}

impl IndicatorVector {
    pub fn new(probs: Vec<BigRational>) -> Result<Self, ExactError> {
        if probs.is_empty() {
            return Err(ExactError::EmptyVector);
        }
        for (index, p) in probs.iter().enumerate() {
            if p.is_negative() || *p > BigRational::one() {
                return Err(ExactError::ProbabilityOutOfRange {
                    index,
                    value: p.to_string(),
                });
            }
        }
        Ok(Self { probs })
    }

    /// `n` copies of `p`.
    pub fn constant(n: usize, p: BigRational) -> Result<Self, ExactError> {
        Self::new(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    /// `μ = Σ p_i`.
    pub fn mean(&self) -> BigRational {
        self.probs.iter().fold(BigRational::zero(), |acc, p| acc + p)
    }
}

/// Exact law of `Σ Y_i`, built one indicator at a time.
pub fn poisson_binomial_pmf(v: &IndicatorVector) -> Vec<BigRational> {
    let mut dist = vec![BigRational::one()];
    for p in v.probs() {
        let q = BigRational::one() - p;
        let mut next = vec![BigRational::zero(); dist.len() + 1];
        for (k, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            if !q.is_zero() {
                next[k] += mass * &q;
            }
            if !p.is_zero() {
                next[k + 1] += mass * p;
            }
        }
        dist = next;
    }
    dist
}

/// Exact `P(a ≤ Σ Y_i ≤ b)`.
pub fn poisson_binomial_interval(v: &IndicatorVector, a: i64, b: i64) -> BigRational {
    let pmf = poisson_binomial_pmf(v);
    let lo = a.max(0);
    let hi = b.min(pmf.len() as i64 - 1);
    if lo > hi {
        return BigRational::zero();
    }
    pmf[lo as usize..=hi as usize]
        .iter()
        .fold(BigRational::zero(), |acc, m| acc + m)
}

/// Parses `"3"`, `"-1.25"`, `"2.5e-3"` or `"7/3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ExactError> {
    let err = || ExactError::Parse(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = t.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn floor_int(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_int(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

pub fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one()
}

/// `x^k` for a non-negative integer power.
pub fn rational_pow(x: &BigRational, k: u32) -> BigRational {
    let (n, d) = (x.numer(), x.denom());
    BigRational::new(
        num_traits::pow(n.clone(), k as usize),
        num_traits::pow(d.clone(), k as usize),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn gcd_reduced(x: &BigRational) -> bool {
        x.numer().gcd(x.denom()).is_one() && x.denom().is_positive()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn spec(n: u32, mu: BigRational) -> BinomialSpec {
        BinomialSpec::new(n, mu).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(binom_pmf(&spec(2, r(1, 1)), 2).unwrap(), r(1, 4));
        assert_eq!(binom_pmf(&spec(3, r(2, 1)), 3).unwrap(), r(8, 27));
        assert_eq!(binom_pmf(&spec(5, r(2, 1)), 0).unwrap(), r(243, 3125));
    }

    #[test]
    fn pmf_rejects_out_of_range_k() {
        let s = spec(4, r(1, 1));
        assert_eq!(binom_pmf(&s, -1), Err(ExactError::KOutOfRange { k: -1, n: 4 }));
        assert_eq!(binom_pmf(&s, 5), Err(ExactError::KOutOfRange { k: 5, n: 4 }));
    }

    #[test]
    fn spec_validation() {
        assert_eq!(BinomialSpec::new(0, r(0, 1)), Err(ExactError::NoTrials));
        assert!(matches!(
            BinomialSpec::new(3, r(7, 2)),
            Err(ExactError::MeanOutOfRange { .. })
        ));
        assert!(matches!(
            BinomialSpec::new(3, r(-1, 2)),
            Err(ExactError::MeanOutOfRange { .. })
        ));
        assert!(BinomialSpec::new(3, r(3, 1)).is_ok());
    }

    #[test]
    fn upper_tail_examples() {
        assert_eq!(binom_upper_tail(&spec(5, r(5, 2)), 3), r(1, 2));
        assert_eq!(binom_upper_tail(&spec(5, r(2, 1)), 2), r(2072, 3125));
        assert_eq!(binom_upper_tail(&spec(2, r(1, 1)), 1), r(3, 4));
    }

    #[test]
    fn upper_tail_clamps() {
        let s = spec(5, r(7, 3));
        assert_eq!(binom_upper_tail(&s, -3), BigRational::one());
        assert_eq!(binom_upper_tail(&s, 0), BigRational::one());
        assert_eq!(binom_upper_tail(&s, 6), BigRational::zero());
        assert_eq!(binom_upper_tail(&s, 100), BigRational::zero());
    }

    #[test]
    fn degenerate_means() {
        let zero = spec(4, r(0, 1));
        assert_eq!(binom_upper_tail(&zero, 1), BigRational::zero());
        assert_eq!(binom_pmf(&zero, 0).unwrap(), BigRational::one());
        let full = spec(4, r(4, 1));
        assert_eq!(binom_upper_tail(&full, 4), BigRational::one());
        assert_eq!(binom_pmf(&full, 4).unwrap(), BigRational::one());
    }

    #[test]
    fn table_agrees_with_direct_sums() {
        for n in 1..=12u32 {
            for t in 0..=(3 * n) {
                let s = spec(n, r(t.into(), 3));
                let table = s.table();
                let tails = table.upper_tails();
                for k in -1..=(n as i64 + 2) {
                    let direct = binom_upper_tail(&s, k);
                    assert_eq!(table.upper_tail(k), direct);
                    if (0..=n as i64 + 1).contains(&k) {
                        assert_eq!(tails[k as usize], direct);
                    }
                }
            }
        }
    }

    #[test]
    fn normalization_grid() {
        for n in [1u32, 2, 7, 19, 33, 60] {
            for t in 0..=10 {
                let mu = r(i64::from(n) * t, 10);
                let s = spec(n, mu);
                let total = (0..=n as i64)
                    .map(|k| binom_pmf(&s, k).unwrap())
                    .fold(BigRational::zero(), |a, b| a + b);
                assert_eq!(total, BigRational::one(), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn results_are_reduced() {
        let s = spec(6, r(9, 4));
        for k in 0..=6 {
            assert!(gcd_reduced(&binom_pmf(&s, k).unwrap()));
            assert!(gcd_reduced(&binom_upper_tail(&s, k)));
        }
    }

    #[test]
    fn poisson_binomial_examples() {
        let v = IndicatorVector::new(vec![r(1, 1), r(1, 2)]).unwrap();
        assert_eq!(poisson_binomial_pmf(&v), vec![r(0, 1), r(1, 2), r(1, 2)]);
        let v = IndicatorVector::new(vec![r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(poisson_binomial_pmf(&v), vec![r(1, 4), r(1, 2), r(1, 4)]);
        let v = IndicatorVector::new(vec![r(1, 1), r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(poisson_binomial_pmf(&v), vec![r(0, 1), r(1, 4), r(1, 2), r(1, 4)]);
    }

    #[test]
    fn poisson_binomial_interval_examples() {
        let v = IndicatorVector::new(vec![r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(poisson_binomial_interval(&v, 0, 2), BigRational::one());
        let v = IndicatorVector::new(vec![r(1, 1), r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(poisson_binomial_interval(&v, 2, 3), r(3, 4));
        let v = IndicatorVector::constant(3, r(2, 3)).unwrap();
        assert_eq!(poisson_binomial_interval(&v, 2, 3), r(20, 27));
        assert_eq!(
            poisson_binomial_interval(&v, 2, 3),
            binom_upper_tail(&spec(3, r(2, 1)), 2)
        );
        assert_eq!(poisson_binomial_interval(&v, 5, 9), BigRational::zero());
        assert_eq!(poisson_binomial_interval(&v, 2, 1), BigRational::zero());
        assert_eq!(poisson_binomial_interval(&v, -4, 0), r(1, 27));
    }

    #[test]
    fn indicator_validation() {
        assert_eq!(IndicatorVector::new(vec![]), Err(ExactError::EmptyVector));
        assert!(matches!(
            IndicatorVector::new(vec![r(1, 2), r(3, 2)]),
            Err(ExactError::ProbabilityOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            IndicatorVector::new(vec![r(-1, 5)]),
            Err(ExactError::ProbabilityOutOfRange { index: 0, .. })
        ));
        let v = IndicatorVector::new(vec![r(1, 3), r(1, 6), r(1, 2)]).unwrap();
        assert_eq!(v.mean(), BigRational::one());
    }

    #[test]
    fn constant_vector_matches_binomial() {
        for n in 1..=12usize {
            for t in 0..=4 {
                let p = r(t, 4);
                let v = IndicatorVector::constant(n, p.clone()).unwrap();
                let s = spec(n as u32, p * BigInt::from(n));
                let dp = poisson_binomial_pmf(&v);
                for (k, mass) in dp.iter().enumerate() {
                    assert_eq!(*mass, binom_pmf(&s, k as i64).unwrap());
                }
            }
        }
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert_eq!(parse_rational("2.5").unwrap(), r(5, 2));
        assert_eq!(parse_rational("0.29").unwrap(), r(29, 100));
        assert_eq!(parse_rational("-1.25").unwrap(), r(-5, 4));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        assert_eq!(parse_rational("1e-6").unwrap(), r(1, 1_000_000));
        assert_eq!(parse_rational("1.5E2").unwrap(), r(150, 1));
        assert_eq!(parse_rational(" 7/21 ").unwrap(), r(1, 3));
        for bad in ["", "abc", "1/0", "1.2.3", ".", "1e", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn f64_conversion_is_accurate() {
        let x = binom_upper_tail(&spec(60, r(7, 3)), 5);
        let approx = to_f64(&x);
        let back = BigRational::from_float(approx).unwrap();
        let err = to_f64(&((back - &x).abs() / &x));
        assert!(err < 2e-16, "{err}");
    }
}
