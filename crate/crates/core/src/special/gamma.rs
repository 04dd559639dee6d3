//! Log-gamma on the positive reals.
//!
//! Near 1 and 2 a Taylor series in `ζ(k) − 1` avoids the cancellation that
//! Stirling's formula suffers there; from 10 upwards the Stirling series with
//! Bernoulli corrections is used, and the gap is bridged by recurrence.

use super::{domain, SpecialError};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// ζ(k) − 1 for k = 2..=40
const ZETA_MINUS_ONE: [f64; 39] = [
    0.644934066848226436,
    0.202056903159594285,
    0.0823232337111381915,
    0.0369277551433699263,
    0.0173430619844491397,
    0.00834927738192282684,
    0.00407735619794433938,
    0.00200839282608221442,
    0.000994575127818085337,
    0.000494188604119464559,
    0.000246086553308048299,
    0.000122713347578489147,
    0.0000612481350587048293,
    0.0000305882363070204936,
    0.0000152822594086518717,
    0.00000763719763789976227,
    0.00000381729326499983986,
    0.00000190821271655393893,
    0.000000953962033872796113,
    0.000000476932986787806463,
    0.00000023845050272773299,
    0.000000119219925965311073,
    0.0000000596081890512594796,
    0.0000000298035035146522802,
    0.0000000149015548283650412,
    0.00000000745071178983542949,
    0.00000000372533402478845705,
    0.00000000186265972351304901,
    0.000000000931327432419668183,
    0.000000000465662906503378407,
    0.000000000232831183367650549,
    0.000000000116415501727005198,
    0.0000000000582077208790270089,
    0.0000000000291038504449709969,
    0.0000000000145519218910419842,
    0.00000000000727595983505748101,
    0.00000000000363797954737865119,
    0.00000000000181898965030706595,
    0.000000000000909494784026388928,
];

// B_{2k} / (2k (2k − 1))
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Natural log of `Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64, SpecialError> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(domain("x", x, "x > 0 and finite"));
    }
    Ok(ln_gamma_pos(x))
}

/// `ln Γ(x)` without the domain check.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_1p(x) - x.ln()
    } else if x <= 1.5 {
        ln_gamma_1p(x - 1.0)
    } else if x <= 2.5 {
        ln_gamma_2p(x - 2.0)
    } else if x < 10.0 {
        let mut y = x;
        let mut product = 1.0;
        while y > 2.5 {
            y -= 1.0;
            product *= y;
        }
        product.ln() + ln_gamma_2p(y - 2.0)
    } else {
        (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_correction(x)
    }
}

/// `ln Γ(1 + z)` for `|z| ≤ 1/2`.
fn ln_gamma_1p(z: f64) -> f64 {
    ln_gamma_2p(z) - z.ln_1p()
}

/// `ln Γ(2 + z)` for `|z| ≤ 1/2`.
fn ln_gamma_2p(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = -z;
    for (i, &c) in ZETA_MINUS_ONE.iter().enumerate() {
        power *= -z;
        let k = (i + 2) as f64;
        let term = c * power / k;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    z * (1.0 - EULER_GAMMA) + sum
}

/// `ln Γ(x) − [(x − ½) ln x − x + ½ ln 2π]` for `x ≥ 10`.
///
/// At integers this is also `ln n! − [(n + ½) ln n − n + ½ ln 2π]`.
pub(crate) fn stirling_correction(x: f64) -> f64 {
    debug_assert!(x >= 10.0);
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut power = inv;
    let mut sum = 0.0;
    for &c in &STIRLING {
        sum += c * power;
        power *= inv2;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-16);
        assert!(rel(log_gamma(5.0).unwrap(), 24f64.ln()) < 1e-15);
        let half = 0.5 * std::f64::consts::PI.ln();
        assert!(rel(log_gamma(0.5).unwrap(), half) < 1e-15);
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0.001, 6.9071788853838536617),
            (0.1, 2.252712651734205902),
            (0.5, 0.57236494292470008707),
            (0.75, 0.20328095143129537148),
            (1.25, -0.098271836421813161464),
            (1.5, -0.12078223763524522235),
            (1.999, -0.00042246180069210728418),
            (2.001, 0.00042310673480011699119),
            (2.5, 0.28468287047291915963),
            (3.7, 1.4280723266653881292),
            (7.3, 7.1478925230222486921),
            (9.99, 12.77931521435019336),
            (10.5, 13.940625219403763633),
            (123.456, 469.6055471299294835),
            (1e4, 82099.717496442377273),
            (1e6, 12815504.56914761166),
        ];
        for (x, want) in cases {
            let got = log_gamma(x).unwrap();
            assert!(rel(got, want) <= 1e-14, "lgamma({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn factorials_by_recurrence() {
        let mut ln_fact = 0.0f64;
        for n in 1..=170u32 {
            ln_fact += (n as f64).ln();
            let got = log_gamma(n as f64 + 1.0).unwrap();
            assert!(rel(got, ln_fact) < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn correction_matches_table_at_ten() {
        // ln 10! - [(10.5) ln 10 - 10 + ½ ln 2π]
        assert!((stirling_correction(10.0) - 0.008_330_563_433_362_871).abs() < 1e-17);
        assert!((stirling_correction(15.0) - 0.005_554_733_551_962_801).abs() < 1e-17);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }
}
