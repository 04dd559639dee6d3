//! Series behind the two tail-probability figures.
//!
//! Figure 1 plots `P(X_{n,μ} ≥ μ + l)` against `μ ∈ [0, n]`, figure 2 plots
//! `P(Z_λ ≥ λ + l)` against `λ ∈ (0, λ_max]`. Both are step functions that
//! jump where `μ + l` crosses an integer. The value there equals the left
//! limit; each such point gets two rows, `left` and `right`, so plots can
//! draw the vertical segment.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{binom_corollary_lower, poisson_sharp_lower, ShiftQuery};
use crate::exact::{ceil_int, is_integer, to_f64, BinomialSpec};
use crate::special::{poisson_upper_tail, PoissonSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub mu_or_lambda: BigRational,
    pub limit: Option<Limit>,
    pub probability: f64,
    pub probability_exact: Option<BigRational>,
    pub lower_bound: f64,
    pub lower_bound_exact: Option<BigRational>,
    pub bound_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FigureError {
    #[error("grid step {0} must be positive")]
    Step(String),
    #[error("{0}")]
    Range(String),
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// Grid points `0, h, 2h, …` up to and including `end`, plus `end` itself.
fn grid(step: &BigRational, end: &BigRational) -> Result<Vec<BigRational>, FigureError> {
    if !step.is_positive() {
        return Err(FigureError::Step(step.to_string()));
    }
    let count = (end / step).floor().to_integer().to_u64().unwrap_or(0);
    if count > 10_000_000 {
        return Err(FigureError::Range(format!("grid of {count} points is too large")));
    }
    let mut out: Vec<BigRational> = (0..=count).map(|i| step * int(i as i64)).collect();
    if out.last() != Some(end) {
        out.push(end.clone());
    }
    Ok(out)
}

/// Figure 1: `Binom(n, μ/n)` with the universal floor `(2+l)^−(2+l)` as the
/// bound line; `bound_valid` marks `1 ≤ μ ≤ n − l`.
pub fn binomial_rows(n: u32, l: u32, step: &BigRational) -> Result<Vec<FigureRow>, FigureError> {
    if n == 0 {
        return Err(FigureError::Range("n must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for mu in grid(step, &int(n.into()))? {
        let tab = BinomialSpec::new(n, mu.clone()).expect("mean within [0, n]").table();
        let q = ShiftQuery::new(mu.clone(), l, Some(n));
        let bound = binom_corollary_lower(&q);
        let floor = bound.universal_floor.clone().expect("floor");
        let row = |limit, threshold: i64| {
            let p = tab.upper_tail(threshold);
            FigureRow {
                mu_or_lambda: mu.clone(),
                limit,
                probability: to_f64(&p),
                probability_exact: Some(p),
                lower_bound: to_f64(&floor),
                lower_bound_exact: Some(floor.clone()),
                bound_valid: bound.validity.valid,
            }
        };
        let threshold = q.upper_threshold();
        if is_integer(&mu) {
            rows.push(row(Some(Limit::Left), threshold));
            rows.push(row(Some(Limit::Right), threshold + 1));
        } else {
            rows.push(row(None, threshold));
        }
    }
    Ok(rows)
}

/// Figure 2: `Poisson(λ)` for `λ ∈ (0, λ_max]` with the sharp lower bound of
/// the Poisson chain as the bound line; `bound_valid` marks `λ ≥ 1`.
pub fn poisson_rows(l: u32, step: &BigRational, max_lambda: &BigRational) -> Result<Vec<FigureRow>, FigureError> {
    if !max_lambda.is_positive() {
        return Err(FigureError::Range("maximum λ must be positive".into()));
    }
    let bound = poisson_sharp_lower(l).value;
    let mut rows = Vec::new();
    for lambda in grid(step, max_lambda)? {
        if lambda.is_zero() {
            continue;
        }
        let spec = PoissonSpec::new(to_f64(&lambda)).expect("positive mean");
        let threshold = ceil_int(&(&lambda + int(l.into())))
            .to_i64()
            .expect("threshold fits in i64");
        let row = |limit, k: i64| FigureRow {
            mu_or_lambda: lambda.clone(),
            limit,
            probability: poisson_upper_tail(&spec, k),
            probability_exact: None,
            lower_bound: bound,
            lower_bound_exact: None,
            bound_valid: lambda >= BigRational::one(),
        };
        if is_integer(&lambda) {
            rows.push(row(Some(Limit::Left), threshold));
            rows.push(row(Some(Limit::Right), threshold + 1));
        } else {
            rows.push(row(None, threshold));
        }
    }
    Ok(rows)
}
