//! Poisson chain at integer means.

use super::{sweep, Param, Relation, Tally, VerificationReport};
use crate::bounds::{poisson_half_upper, poisson_lower_tail_bound, poisson_sharp_lower};
use crate::special::{poisson_lower_tail, poisson_upper_tail, PoissonSpec};

fn upper(lambda: u32, k: u32) -> f64 {
    let spec = PoissonSpec::new(lambda.into()).expect("positive mean");
    poisson_upper_tail(&spec, k.into())
}

/// For integer `1 ≤ λ ≤ max_lambda`, `0 ≤ l ≤ max_l`: the sharp lower bound,
/// monotonicity in `λ`, the value at `(λ, l) = (1, 0)`, and the `1/2` upper
/// bound where it applies (`l ≥ 1`).
pub fn verify_poisson_chain(max_lambda: u32, max_l: u32) -> VerificationReport {
    let cells: Vec<(u32, u32)> = (0..=max_l)
        .flat_map(|l| (1..=max_lambda).map(move |lam| (l, lam)))
        .collect();
    let tally = sweep(cells, |(l, lam), t: &mut Tally| {
        let tail = upper(lam, lam + l);
        let params = || vec![Param::int("l", l.into()), Param::int("lambda", lam.into())];
        let sharp = poisson_sharp_lower(l).value;
        t.check(
            "P(Z >= lambda + l) >= sharp bound",
            tail,
            Relation::Ge,
            sharp,
            1e-12,
            params,
        );
        if lam >= 2 {
            let prev = upper(lam - 1, lam - 1 + l);
            t.check("non-decreasing in lambda", tail, Relation::Ge, prev, 1e-12, params);
        }
        if lam == 1 && l == 0 {
            let e = 1.0 - (-1.0f64).exp();
            t.check("P(Z_1 >= 1) == 1 - 1/e", tail, Relation::Eq, e, 1e-14, params);
        }
        let half = poisson_half_upper(l);
        if half.validity.valid {
            t.check(
                "P(Z >= lambda + l) <= 1/2",
                tail,
                Relation::Le,
                half.value,
                1e-12,
                params,
            );
        }
    });
    tally.into_report(
        "poisson",
        None,
        format!("integer 1 <= lambda <= {max_lambda}, 0 <= l <= {max_l}"),
    )
}

/// `P(Z_λ ≤ λ − l) ≥ e^−l` for integer `1 ≤ l < λ ≤ max_lambda`.
pub fn verify_poisson_lower_tail(max_lambda: u32) -> VerificationReport {
    let tally = sweep((2..=max_lambda).collect(), |lam, t: &mut Tally| {
        let spec = PoissonSpec::new(lam.into()).expect("positive mean");
        for l in 1..lam {
            let tail = poisson_lower_tail(&spec, i64::from(lam - l));
            let bound = poisson_lower_tail_bound(l).value;
            t.check("P(Z <= lambda - l) >= e^-l", tail, Relation::Ge, bound, 1e-12, || {
                vec![Param::int("lambda", lam.into()), Param::int("l", l.into())]
            });
        }
    });
    tally.into_report(
        "poisson-lower",
        None,
        format!("integer 1 <= l < lambda <= {max_lambda}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_shifts_pass() {
        let r = verify_poisson_chain(40, 4);
        assert!(
            r.violations.iter().all(|v| v.parameters[0].value == 0.0),
            "{:?}",
            r.violations
        );
        assert!(verify_poisson_lower_tail(40).passed);
    }

    #[test]
    fn zero_shift_is_decreasing() {
        // P(Z_λ ≥ λ) falls from 1 − 1/e at λ = 1
        assert!((upper(1, 1) - 0.6321205588285577).abs() < 1e-15);
        assert!((upper(2, 2) - (1.0 - 3.0 * (-2.0f64).exp())).abs() < 1e-15);
        assert!(upper(2, 2) < upper(1, 1));
    }
}
