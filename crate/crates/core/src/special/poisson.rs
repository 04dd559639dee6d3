//! Poisson probabilities and tails by compensated summation.

use std::f64::consts::PI;

use super::gamma::stirling_correction;
use super::{domain, log1pmx, CompensatedSum, SpecialError};

// ln k! − [(k + ½) ln k − k + ½ ln 2π] for k = 1..=15
const STIRLERR: [f64; 15] = [
    0.08106146679532725822,
    0.041340695955409294094,
    0.027677925684998339149,
    0.020790672103765093112,
    0.016644691189821192163,
    0.013876128823070747999,
    0.011896709945891770095,
    0.010411265261972096497,
    0.0092554621827127329177,
    0.0083305634333628712565,
    0.007573675487951840795,
    0.0069428401072095298657,
    0.0064089941880042070684,
    0.0059513701127588477356,
    0.005554733551962801371,
];

/// `Poisson(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSpec {
    lambda: f64,
}

impl PoissonSpec {
    pub fn new(lambda: f64) -> Result<Self, SpecialError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain("lambda", lambda, "λ > 0"));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn stirlerr(k: u64) -> f64 {
    if k <= 15 {
        STIRLERR[k as usize - 1]
    } else {
        stirling_correction(k as f64)
    }
}

/// `P(Z = k) = e^{−λ} λ^k / k!`.
///
/// Written as `exp(−stirlerr(k) − k·φ((λ−k)/k) − (λ − k)) / √(2πk)` with
/// `φ = log1pmx`, so no large terms cancel.
pub fn poisson_pmf(spec: &PoissonSpec, k: u64) -> f64 {
    let lambda = spec.lambda;
    if k == 0 {
        return (-lambda).exp();
    }
    let kf = k as f64;
    // k ln(λ/k) + k − λ = k·log1pmx((λ−k)/k)
    let bd0 = -kf * log1pmx((lambda - kf) / kf);
    (-stirlerr(k) - bd0).exp() / (2.0 * PI * kf).sqrt()
}

/// `P(Z ≥ k)`; equals 1 for `k ≤ 0`.
pub fn poisson_upper_tail(spec: &PoissonSpec, k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    let k = k as u64;
    if k as f64 <= spec.lambda {
        let lower: CompensatedSum = (0..k).map(|j| poisson_pmf(spec, j)).collect();
        (1.0 - lower.value()).max(0.0)
    } else {
        sum_upward(spec, k)
    }
}

/// `P(Z ≤ k)`; equals 0 for `k < 0`.
pub fn poisson_lower_tail(spec: &PoissonSpec, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if (k as f64) < spec.lambda {
        let lower: CompensatedSum = (0..=k as u64).map(|j| poisson_pmf(spec, j)).collect();
        lower.value()
    } else {
        (1.0 - sum_upward(spec, k as u64 + 1)).max(0.0)
    }
}

/// `Σ_{j ≥ k} P(Z = j)` for `k > λ`, where terms decrease geometrically.
fn sum_upward(spec: &PoissonSpec, k: u64) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut j = k;
    loop {
        let term = poisson_pmf(spec, j);
        acc.add(term);
        if term == 0.0 || term <= acc.value() * 1e-18 {
            break;
        }
        j += 1;
    }
    acc.value()
}
