//! Property suites: sweep parameter grids and check each inequality against
//! an oracle.
//!
//! Exact suites compare rationals with no tolerance. Float suites compare
//! with the tolerance stated per claim and track the worst slack seen. Cells
//! are evaluated in parallel and merged into a [`Tally`]; violations are
//! sorted before a report is built, so reports do not depend on scheduling.

mod beta;
mod binomial;
mod poisson;
mod reflect;

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::ThreadPool;
use serde::Serialize;
use thiserror::Error;

use crate::exact::to_f64;

pub use beta::{
    check_betamono_conditions, default_dominance_grid, default_n_grid, sweep_beta_monotone, verify_betamono,
    verify_conditional_dominance, verify_powerdist_suite, BetamonoVerdict, SweepConfig, SweepOutcome, SweepPoint,
    BETAMONO_CASES, DOMINANCE_CASES,
};
pub use binomial::{
    verify_beta_binomial_bridge, verify_corollary_bounds, verify_floor_infimum, verify_floor_sampled,
    verify_half_upper, verify_hoeffding_lattice, verify_hoeffding_theorem5, verify_sandwich, verify_theorem1_chain,
    verify_uniform_beta,
};
pub use poisson::{verify_poisson_chain, verify_poisson_lower_tail};
pub use reflect::{verify_hmono, verify_odds_identity, verify_reflection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid suite parameter: {0}")]
    Parameter(String),
    #[error("conditions of the monotonicity theorem do not hold for p = {p}, a = {a}, b = {b}")]
    ConditionsNotMet { p: f64, a: f64, b: f64 },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

/// One named parameter of a checked case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub name: &'static str,
    pub value: f64,
    /// Exact value when the parameter is rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Param {
    pub fn num(name: &'static str, value: f64) -> Self {
        Self {
            name,
            value,
            exact: None,
        }
    }

    pub fn int(name: &'static str, value: i64) -> Self {
        Self {
            name,
            value: value as f64,
            exact: Some(value.to_string()),
        }
    }

    pub fn rat(name: &'static str, value: &BigRational) -> Self {
        Self {
            name,
            value: to_f64(value),
            exact: Some(value.to_string()),
        }
    }
}

/// A failed check. `slack` is negative (or zero for a strict claim).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub claim: String,
    pub parameters: Vec<Param>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_rhs: Option<String>,
}

impl Violation {
    fn order(&self, other: &Self) -> Ordering {
        self.claim.cmp(&other.claim).then_with(|| {
            let a = self.parameters.iter().map(|p| p.value);
            let b = other.parameters.iter().map(|p| p.value);
            a.zip(b)
                .map(|(x, y)| x.total_cmp(&y))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| self.parameters.len().cmp(&other.parameters.len()))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases_run: u64,
    pub violations: Vec<Violation>,
    /// Smallest slack over all checks; `None` when nothing ran.
    pub worst_slack: Option<f64>,
    pub passed: bool,
    pub seed: Option<u64>,
    pub grid: String,
}

impl VerificationReport {
    /// Violations of one claim.
    pub fn violations_of<'a>(&'a self, claim: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.claim == claim)
    }
}

/// Comparison asserted by a check, read as `lhs REL rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Relation {
    /// Signed margin by which `lhs REL rhs` holds.
    fn slack(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Ge | Relation::Gt => lhs - rhs,
            Relation::Le | Relation::Lt => rhs - lhs,
            Relation::Eq => -(lhs - rhs).abs(),
        }
    }

    fn is_strict(self) -> bool {
        matches!(self, Relation::Gt | Relation::Lt)
    }
}

/// Mergeable accumulator for one suite.
#[derive(Debug, Default, Clone)]
pub struct Tally {
    cases: u64,
    worst: Option<f64>,
    violations: Vec<Violation>,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    fn note(&mut self, slack: f64) {
        self.cases += 1;
        self.worst = Some(match self.worst {
            Some(w) if w <= slack => w,
            _ => slack,
        });
    }

    /// Float check of `lhs REL rhs` with tolerance `tol` on non-strict
    /// relations; strict relations must hold with positive margin.
    pub fn check<F>(&mut self, claim: &str, lhs: f64, rel: Relation, rhs: f64, tol: f64, params: F)
    where
        F: FnOnce() -> Vec<Param>,
    {
        let slack = rel.slack(lhs, rhs);
        self.note(slack);
        let failed = if rel.is_strict() {
            slack.is_nan() || slack <= 0.0
        } else {
            slack.is_nan() || slack < -tol
        };
        if failed {
            self.violations.push(Violation {
                claim: claim.to_string(),
                parameters: params(),
                lhs,
                rhs,
                slack,
                exact_lhs: None,
                exact_rhs: None,
            });
        }
    }

    /// Exact check of `lhs REL rhs`.
    pub fn check_exact<F>(&mut self, claim: &str, lhs: &BigRational, rel: Relation, rhs: &BigRational, params: F)
    where
        F: FnOnce() -> Vec<Param>,
    {
        let diff = lhs - rhs;
        let holds = match rel {
            Relation::Ge => !diff.is_negative(),
            Relation::Gt => diff.is_positive(),
            Relation::Le => !diff.is_positive(),
            Relation::Lt => diff.is_negative(),
            Relation::Eq => diff.is_zero(),
        };
        let d = to_f64(&diff);
        let slack = match rel {
            Relation::Ge | Relation::Gt => d,
            Relation::Le | Relation::Lt => -d,
            Relation::Eq => -d.abs(),
        };
        self.note(slack);
        if !holds {
            self.violations.push(Violation {
                claim: claim.to_string(),
                parameters: params(),
                lhs: to_f64(lhs),
                rhs: to_f64(rhs),
                slack,
                exact_lhs: Some(lhs.to_string()),
                exact_rhs: Some(rhs.to_string()),
            });
        }
    }

    /// A case that could not be evaluated.
    pub fn fail<F>(&mut self, claim: &str, params: F)
    where
        F: FnOnce() -> Vec<Param>,
    {
        self.cases += 1;
        self.violations.push(Violation {
            claim: claim.to_string(),
            parameters: params(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            exact_lhs: None,
            exact_rhs: None,
        });
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.worst = match (self.worst, other.worst) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.violations.extend(other.violations);
        self
    }

    pub fn into_report(mut self, suite: &str, seed: Option<u64>, grid: impl Into<String>) -> VerificationReport {
        self.violations.sort_by(Violation::order);
        VerificationReport {
            suite: suite.to_string(),
            cases_run: self.cases,
            passed: self.violations.is_empty(),
            violations: self.violations,
            worst_slack: self.worst,
            seed,
            grid: grid.into(),
        }
    }
}

fn pool() -> Option<&'static ThreadPool> {
    static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("TAILBOUND_THREADS").ok()?.trim().parse::<usize>().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().ok()
    })
    .as_ref()
}

/// Runs `f` on the pool capped by `TAILBOUND_THREADS`, or on rayon's global
/// pool when the variable is unset.
pub(crate) fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// Parallel map-reduce of cells into one [`Tally`].
pub(crate) fn sweep<T, F>(cells: Vec<T>, f: F) -> Tally
where
    T: Send,
    F: Fn(T, &mut Tally) + Sync + Send,
{
    use rayon::prelude::*;
    in_pool(|| {
        cells
            .into_par_iter()
            .fold(Tally::new, |mut t, cell| {
                f(cell, &mut t);
                t
            })
            .reduce(Tally::new, Tally::merge)
    })
}

/// Limits shared by the named suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteLimits {
    pub max_n: u32,
    pub max_l: u32,
    pub seed: u64,
    pub trials: u32,
}

impl Default for SuiteLimits {
    fn default() -> Self {
        Self {
            max_n: 60,
            max_l: 4,
            seed: 42,
            trials: 1000,
        }
    }
}

/// Names accepted by [`run_suite`], in the order `all` runs them.
pub const SUITES: &[&str] = &[
    "theorem1",
    "half-upper",
    "corollary",
    "floor-infimum",
    "floor-sampled",
    "lattice",
    "theorem5",
    "poisson",
    "poisson-lower",
    "bridge",
    "sandwich",
    "uniform-beta",
    "reflection",
    "hmono",
    "odds",
    "betamono",
    "powerdist",
];

/// Runs one named suite. `max_n` is clamped to the range each suite is
/// specified for.
pub fn run_suite(name: &str, lim: &SuiteLimits) -> Result<VerificationReport, VerifyError> {
    let n = lim.max_n;
    Ok(match name {
        "theorem1" => verify_theorem1_chain(n, lim.max_l),
        "half-upper" => verify_half_upper(n, lim.max_l),
        "corollary" => verify_corollary_bounds(n.min(40), lim.max_l.min(3)),
        "floor-infimum" => verify_floor_infimum(),
        "floor-sampled" => verify_floor_sampled(),
        "lattice" => verify_hoeffding_lattice(n, None),
        "theorem5" => verify_hoeffding_theorem5(lim.trials, n.min(12), lim.seed),
        "poisson" => verify_poisson_chain(40, lim.max_l),
        "poisson-lower" => verify_poisson_lower_tail(40),
        "bridge" => verify_beta_binomial_bridge(n),
        "sandwich" => verify_sandwich(n.min(40), lim.max_l.min(2)),
        "uniform-beta" => verify_uniform_beta(n.min(40)),
        "reflection" => verify_reflection(),
        "hmono" => verify_hmono(20, lim.seed),
        "odds" => verify_odds_identity(),
        "betamono" => verify_betamono(),
        "powerdist" => verify_powerdist_suite(),
        "bounds" => verify_bound_suites(n, lim.max_l),
        other => return Err(VerifyError::UnknownSuite(other.to_string())),
    })
}

/// The binomial chain, the 1/2 upper bound, both corollary bounds, the beta
/// sandwich, the uniform-beta bound and the Poisson chain as one report.
pub fn verify_bound_suites(max_n: u32, max_l: u32) -> VerificationReport {
    let parts = [
        verify_theorem1_chain(max_n, max_l),
        verify_half_upper(max_n, max_l),
        verify_corollary_bounds(max_n.min(40), max_l.min(3)),
        verify_sandwich(max_n.min(40), max_l.min(2)),
        verify_uniform_beta(max_n.min(40)),
        verify_poisson_chain(40, max_l),
        verify_poisson_lower_tail(40),
    ];
    let grid = parts
        .iter()
        .map(|r| format!("{}: {}", r.suite, r.grid))
        .collect::<Vec<_>>()
        .join("; ");
    combine("bounds", &parts, grid)
}

/// Concatenates reports into one under `suite`.
pub fn combine(suite: &str, parts: &[VerificationReport], grid: String) -> VerificationReport {
    let mut tally = Tally::new();
    for r in parts {
        tally = tally.merge(Tally {
            cases: r.cases_run,
            worst: r.worst_slack,
            violations: r.violations.clone(),
        });
    }
    tally.into_report(suite, None, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn tally_tracks_worst_and_failures() {
        let mut t = Tally::new();
        t.check("a", 1.0, Relation::Ge, 0.5, 0.0, Vec::new);
        t.check("a", 0.5, Relation::Ge, 0.5 + 1e-13, 1e-12, Vec::new);
        t.check("b", 0.5, Relation::Lt, 0.5, 0.0, || vec![Param::num("x", 0.5)]);
        let r = t.into_report("s", None, "g");
        assert_eq!(r.cases_run, 3);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].claim, "b");
        assert_eq!(r.worst_slack, Some(0.5 - (0.5 + 1e-13)));
        assert!(!r.passed);
    }

    #[test]
    fn exact_checks_have_no_tolerance() {
        let mut t = Tally::new();
        t.check_exact("eq", &q(1, 3), Relation::Eq, &q(2, 6), Vec::new);
        t.check_exact("ge", &q(1, 3), Relation::Ge, &q(1, 3), Vec::new);
        t.check_exact("gt", &q(1, 3), Relation::Gt, &q(1, 3), || {
            vec![Param::rat("mu", &q(1, 3))]
        });
        let r = t.into_report("s", None, "g");
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].exact_lhs.as_deref(), Some("1/3"));
        assert_eq!(r.violations[0].parameters[0].exact.as_deref(), Some("1/3"));
    }

    #[test]
    fn merge_order_does_not_matter() {
        let mk = |v: f64| {
            let mut t = Tally::new();
            t.check("c", v, Relation::Ge, 1.0, 0.0, || vec![Param::num("v", v)]);
            t
        };
        let a = mk(0.2).merge(mk(0.1)).merge(mk(2.0)).into_report("s", None, "");
        let b = mk(2.0).merge(mk(0.1).merge(mk(0.2))).into_report("s", None, "");
        assert_eq!(a, b);
        assert_eq!(a.violations[0].parameters[0].value, 0.1);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(matches!(
            run_suite("nope", &SuiteLimits::default()),
            Err(VerifyError::UnknownSuite(_))
        ));
    }
}
