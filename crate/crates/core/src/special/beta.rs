//! Beta function, beta density and the regularized incomplete beta function.

use std::f64::consts::PI;

use super::gamma::{ln_gamma_pos, stirling_correction};
use super::{domain, log1pmx, SpecialError};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const CF_EPS: f64 = f64::EPSILON;
const CF_MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// Shapes of a `Beta(a, b)` law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self, SpecialError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(domain("a", a, "a > 0"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(domain("b", b, "b > 0"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `P(W ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64, SpecialError> {
        regularized_incomplete_beta(self, x)
    }

    /// `P(W > x)`.
    pub fn sf(&self, x: f64) -> Result<f64, SpecialError> {
        regularized_incomplete_beta_complement(self, x)
    }

    pub fn density(&self, x: f64) -> Result<f64, SpecialError> {
        beta_density(self, x)
    }
}

fn check_unit(x: f64) -> Result<(), SpecialError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain("x", x, "0 ≤ x ≤ 1"))
    }
}

/// `I_x(a, b)`.
pub fn regularized_incomplete_beta(params: &BetaParams, x: f64) -> Result<f64, SpecialError> {
    check_unit(x)?;
    Ok(ibeta_pair(params.a, params.b, x, 1.0 - x).0)
}

/// `1 − I_x(a, b)`, computed without cancellation.
pub fn regularized_incomplete_beta_complement(params: &BetaParams, x: f64) -> Result<f64, SpecialError> {
    check_unit(x)?;
    Ok(ibeta_pair(params.a, params.b, x, 1.0 - x).1)
}

/// `x^(a−1) (1−x)^(b−1) / B(a, b)`.
pub fn beta_density(params: &BetaParams, x: f64) -> Result<f64, SpecialError> {
    check_unit(x)?;
    let (a, b) = (params.a, params.b);
    let singular = SpecialError::SingularEndpoint { a, b, x };
    if x == 0.0 {
        return match a.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => Err(singular),
            Some(std::cmp::Ordering::Equal) => Ok((-ln_beta(a, b)).exp()),
            _ => Ok(0.0),
        };
    }
    if x == 1.0 {
        return match b.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => Err(singular),
            Some(std::cmp::Ordering::Equal) => Ok((-ln_beta(a, b)).exp()),
            _ => Ok(0.0),
        };
    }
    let y = 1.0 - x;
    Ok(power_terms(a, b, x, y) / (x * y))
}

/// `ln B(a, b)` for positive shapes.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, big) = if a <= b { (a, b) } else { (b, a) };
    if small >= 10.0 {
        let sum = a + b;
        HALF_LN_2PI + (a - 0.5) * (a / sum).ln() + (b - 0.5) * (b / sum).ln() - 0.5 * sum.ln() + correction_delta(a, b)
    } else if big >= 10.0 {
        // ln Γ(big) − ln Γ(big + small) by Stirling, without forming either
        let diff = -(big - 0.5) * (small / big).ln_1p() - small * (big + small).ln() + small + stirling_correction(big)
            - stirling_correction(big + small);
        ln_gamma_pos(small) + diff
    } else {
        ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b)
    }
}

fn correction_delta(a: f64, b: f64) -> f64 {
    stirling_correction(a) + stirling_correction(b) - stirling_correction(a + b)
}

/// `x^a y^b / B(a, b)` with `y = 1 − x` supplied separately.
fn power_terms(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if a >= 10.0 && b >= 10.0 {
        let sum = a + b;
        let x0 = a / sum;
        let y0 = b / sum;
        // the smaller coordinate is the accurate one; a·ex/x0 + b·ey/y0 cancels
        let (ex, ey) = if x <= y { (x - x0, x0 - x) } else { (y0 - y, y - y0) };
        let exponent = a * log1pmx(ex / x0) + b * log1pmx(ey / y0) - correction_delta(a, b);
        (a * b / (2.0 * PI * sum)).sqrt() * exponent.exp()
    } else {
        (a * x.ln() + b * y.ln() - ln_beta(a, b)).exp()
    }
}

/// `(I_x(a, b), 1 − I_x(a, b))` with `y = 1 − x` supplied separately.
pub(crate) fn ibeta_pair(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    let tiny_shape = a.min(b) <= 1.0;
    if tiny_shape && x <= 0.5 && b * x <= 1.0 {
        let i = series(a, b, x);
        return (i, 1.0 - i);
    }
    if tiny_shape && y <= 0.5 && a * y <= 1.0 {
        let j = series(b, a, y);
        return (1.0 - j, j);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        let j = power_terms(b, a, y, x) * continued_fraction(b, a, y) / b;
        (1.0 - j, j)
    } else {
        let i = power_terms(a, b, x, y) * continued_fraction(a, b, x) / a;
        (i, 1.0 - i)
    }
}

/// `x^a / B(a,b) · Σ (1−b)_n x^n / (n! (a+n))`.
fn series(a: f64, b: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut coeff = 1.0;
    let mut n = 1.0;
    loop {
        coeff *= (n - b) * x / n;
        let term = coeff / (a + n);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || n > 10_000.0 {
            break;
        }
        n += 1.0;
    }
    (a * x.ln() - ln_beta(a, b)).exp() * sum
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() <= CF_EPS {
            break;
        }
    }
    h
}
