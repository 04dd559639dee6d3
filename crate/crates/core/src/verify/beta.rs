//! Beta suites: conditional dominance between beta laws and the monotone
//! approach of `P(W_n ≤ p)` to `1/2`.

use serde::Serialize;

use super::{combine, Param, Relation, Tally, VerificationReport, VerifyError};
use crate::special::{regularized_incomplete_beta, BetaParams};

/// Which hypothesis of the monotonicity theorem holds for `(p, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetamonoVerdict {
    /// `p ≤ 1/2` and `a ≥ 1 ≥ b`.
    LowerPivot,
    /// `p ≤ 1/2` and `(a+b−2)((a−1)/(a+b−2) − p) > 0`.
    LowerProduct,
    /// `p ≥ 1/2` and `b ≥ 1 ≥ a`.
    UpperPivot,
    /// `p ≥ 1/2` and `(a+b−2)((a−1)/(a+b−2) − p) < 0`.
    UpperProduct,
    /// `a + b = 2`, `a ≠ 1`, no pivot branch: the product is undefined.
    Boundary,
    /// No hypothesis holds.
    None,
}

impl BetamonoVerdict {
    pub fn holds(self) -> bool {
        !matches!(self, BetamonoVerdict::Boundary | BetamonoVerdict::None)
    }
}

pub fn check_betamono_conditions(p: f64, a: f64, b: f64) -> Result<BetamonoVerdict, VerifyError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(VerifyError::Parameter(format!("p = {p} must lie in (0, 1)")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(VerifyError::Parameter(format!("a = {a}, b = {b} must be finite")));
    }
    if p <= 0.5 && a >= 1.0 && b <= 1.0 {
        return Ok(BetamonoVerdict::LowerPivot);
    }
    if p >= 0.5 && b >= 1.0 && a <= 1.0 {
        return Ok(BetamonoVerdict::UpperPivot);
    }
    let s = a + b - 2.0;
    if s == 0.0 {
        return Ok(BetamonoVerdict::Boundary);
    }
    let product = s * ((a - 1.0) / s - p);
    Ok(if p <= 0.5 && product > 0.0 {
        BetamonoVerdict::LowerProduct
    } else if p >= 0.5 && product < 0.0 {
        BetamonoVerdict::UpperProduct
    } else {
        BetamonoVerdict::None
    })
}

/// `W_n ~ Beta(pn + a, (1−p)n + b)` over an increasing grid of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    p: f64,
    a: f64,
    b: f64,
    n_grid: Vec<f64>,
}

impl SweepConfig {
    pub fn new(p: f64, a: f64, b: f64, n_grid: Vec<f64>) -> Result<Self, VerifyError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(VerifyError::Parameter(format!("p = {p} must lie in (0, 1)")));
        }
        if n_grid.is_empty() {
            return Err(VerifyError::Parameter("empty n grid".into()));
        }
        if n_grid
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(VerifyError::Parameter("n grid must be strictly increasing".into()));
        }
        let n0 = n_grid[0];
        if !(p * n0 + a > 0.0 && (1.0 - p) * n0 + b > 0.0) {
            return Err(VerifyError::Parameter(format!(
                "n = {n0} gives non-positive shapes ({}, {})",
                p * n0 + a,
                (1.0 - p) * n0 + b
            )));
        }
        Ok(Self { p, a, b, n_grid })
    }

    pub fn with_default_grid(p: f64, a: f64, b: f64) -> Result<Self, VerifyError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(VerifyError::Parameter(format!("p = {p} must lie in (0, 1)")));
        }
        Self::new(p, a, b, default_n_grid(p, a, b))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_grid(&self) -> &[f64] {
        &self.n_grid
    }
}

const GRID_END: f64 = 1e4;
const GRID_POINTS: usize = 200;

/// 200 geometric points from `max(n_min, 0.25)` to `10^4` together with the
/// integers `0..=20` above `n_min`, where `n_min = max(−a/p, −b/(1−p))` is
/// where a shape reaches zero. When `n_min ≥ 0.25` the geometric part
/// starts at `n_min + 0.25` so that the first point has positive shapes.
pub fn default_n_grid(p: f64, a: f64, b: f64) -> Vec<f64> {
    let n_min = (-a / p).max(-b / (1.0 - p));
    let start = if n_min < 0.25 { 0.25 } else { n_min + 0.25 };
    let ratio = (GRID_END / start).ln();
    let mut grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            if i + 1 == GRID_POINTS {
                GRID_END
            } else {
                start * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp()
            }
        })
        .collect();
    grid.extend((0..=20).map(f64::from).filter(|&n| n > n_min));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: f64,
    /// `P(W_n ≤ p)`.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub report: VerificationReport,
    pub verdict: BetamonoVerdict,
    pub conjecture_mode: bool,
    pub series: Vec<SweepPoint>,
}

/// `s_i = I_p(p n_i + a, (1−p) n_i + b)` along the grid, checked for
/// single-signed steps towards `1/2` (slack `1e−11`) and
/// `|s_last − 1/2| ≤ 2/√n_last`. For `p = 1/2`, `a = b` every value must be
/// `1/2` within `1e−13`.
///
/// Outside the theorem's hypotheses this returns an error unless
/// `conjecture_mode` is set, in which case the same checks are recorded as
/// an observation.
pub fn sweep_beta_monotone(cfg: &SweepConfig, conjecture_mode: bool) -> Result<SweepOutcome, VerifyError> {
    let (p, a, b) = (cfg.p, cfg.a, cfg.b);
    let verdict = check_betamono_conditions(p, a, b)?;
    if !conjecture_mode && !verdict.holds() {
        return Err(VerifyError::ConditionsNotMet { p, a, b });
    }
    let q = 1.0 - p;
    let mut series = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let shapes =
            BetaParams::new(p * n + a, q * n + b).map_err(|e| VerifyError::Parameter(format!("n = {n}: {e}")))?;
        let s = regularized_incomplete_beta(&shapes, p).map_err(|e| VerifyError::Parameter(e.to_string()))?;
        series.push(SweepPoint { n, s });
    }

    let mut t = Tally::new();
    let first = series[0];
    let last = *series.last().expect("non-empty grid");
    if p == 0.5 && a == b {
        for pt in &series {
            t.check("constant at 1/2", pt.s, Relation::Eq, 0.5, 1e-13, || {
                vec![Param::num("n", pt.n)]
            });
        }
    } else {
        let rel = if first.s <= 0.5 { Relation::Ge } else { Relation::Le };
        for w in series.windows(2) {
            t.check("monotone towards 1/2", w[1].s, rel, w[0].s, 1e-11, || {
                vec![Param::num("n", w[0].n), Param::num("next_n", w[1].n)]
            });
        }
    }
    let bound = 2.0 / last.n.sqrt();
    t.check(
        "|s_last - 1/2| <= 2/sqrt(n_last)",
        (last.s - 0.5).abs(),
        Relation::Le,
        bound,
        0.0,
        || vec![Param::num("n", last.n)],
    );
    let report = t.into_report(
        "sweep-beta",
        None,
        format!(
            "p = {p}, a = {a}, b = {b}; {} values of n from {} to {}",
            series.len(),
            first.n,
            last.n
        ),
    );
    Ok(SweepOutcome {
        report,
        verdict,
        conjecture_mode,
        series,
    })
}

/// Parameter sets of the monotonicity suite; the last is the symmetric
/// control.
pub const BETAMONO_CASES: [(f64, f64, f64); 6] = [
    (0.3, 1.0, 1.0),
    (0.3, 2.0, 0.5),
    (0.3, 3.0, 3.0),
    (0.7, 1.0, 1.0),
    (0.7, 0.5, 2.0),
    (0.5, 1.0, 1.0),
];

/// Default-grid sweeps over [`BETAMONO_CASES`].
pub fn verify_betamono() -> VerificationReport {
    let parts: Vec<VerificationReport> = BETAMONO_CASES
        .iter()
        .map(|&(p, a, b)| {
            let outcome = SweepConfig::with_default_grid(p, a, b).and_then(|cfg| sweep_beta_monotone(&cfg, false));
            match outcome {
                Ok(o) => {
                    let mut r = o.report;
                    for v in &mut r.violations {
                        v.parameters
                            .splice(0..0, [Param::num("p", p), Param::num("a", a), Param::num("b", b)]);
                    }
                    r
                }
                Err(_) => {
                    let mut t = Tally::new();
                    t.fail("sweep runs", || {
                        vec![Param::num("p", p), Param::num("a", a), Param::num("b", b)]
                    });
                    t.into_report("sweep-beta", None, "")
                }
            }
        })
        .collect();
    let grid = format!(
        "(p, a, b) in {:?}; default n grid to 1e4",
        BETAMONO_CASES
            .iter()
            .map(|c| format!("({}, {}, {})", c.0, c.1, c.2))
            .collect::<Vec<_>>()
    );
    combine("betamono", &parts, grid)
}

/// `k/50` for `k = 1..=49`.
pub fn default_dominance_grid() -> Vec<f64> {
    (1..50).map(|k| f64::from(k) / 50.0).collect()
}

/// With `V ~ Beta(a, b)` and `W ~ Beta(c, d)`, `c ≥ a`, `d ≥ b`:
/// `P(W < t | W < s) ≤ P(V < t | V < s)` for grid `t ≤ s ≤ p` and
/// `P(W > t | W > s) ≤ P(V > t | V > s)` for `p ≤ s ≤ t`, where
/// `p = (c−a)/((c+d)−(a+b))`; tolerance `1e−10`. The point `p` itself is
/// added to the grid.
pub fn verify_conditional_dominance(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    grid: &[f64],
) -> Result<VerificationReport, VerifyError> {
    if !(a > 0.0 && b > 0.0 && c >= a && d >= b) {
        return Err(VerifyError::Parameter(format!(
            "needs c >= a > 0 and d >= b > 0, got (a, b, c, d) = ({a}, {b}, {c}, {d})"
        )));
    }
    let growth = (c + d) - (a + b);
    if growth.is_nan() || growth <= 0.0 {
        return Err(VerifyError::Parameter(format!(
            "needs c + d > a + b, got {} <= {}",
            c + d,
            a + b
        )));
    }
    let p = (c - a) / growth;
    let v = BetaParams::new(a, b).map_err(|e| VerifyError::Parameter(e.to_string()))?;
    let w = BetaParams::new(c, d).map_err(|e| VerifyError::Parameter(e.to_string()))?;
    let mut points: Vec<f64> = grid.iter().copied().filter(|x| *x > 0.0 && *x < 1.0).collect();
    if p > 0.0 && p < 1.0 {
        points.push(p);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    let cdf = |law: &BetaParams, x: f64| law.cdf(x).expect("x in (0, 1)");
    let sf = |law: &BetaParams, x: f64| law.sf(x).expect("x in (0, 1)");
    let mut t = Tally::new();
    for (i, &s) in points.iter().enumerate() {
        for &tt in &points[..=i] {
            if s > p {
                break;
            }
            let params = || vec![Param::num("t", tt), Param::num("s", s)];
            let lhs = cdf(&w, tt) / cdf(&w, s);
            let rhs = cdf(&v, tt) / cdf(&v, s);
            t.check(
                "P(W < t | W < s) <= P(V < t | V < s)",
                lhs,
                Relation::Le,
                rhs,
                1e-10,
                params,
            );
        }
        if s < p {
            continue;
        }
        for &tt in &points[i..] {
            let params = || vec![Param::num("s", s), Param::num("t", tt)];
            let lhs = sf(&w, tt) / sf(&w, s);
            let rhs = sf(&v, tt) / sf(&v, s);
            t.check(
                "P(W > t | W > s) <= P(V > t | V > s)",
                lhs,
                Relation::Le,
                rhs,
                1e-10,
                params,
            );
        }
    }
    Ok(t.into_report(
        "powerdist",
        None,
        format!(
            "(a, b, c, d) = ({a}, {b}, {c}, {d}), p = {p}, {} grid points",
            points.len()
        ),
    ))
}

/// Shape quadruples `(a, b, c, d)` of the dominance suite.
pub const DOMINANCE_CASES: [(f64, f64, f64, f64); 6] = [
    (1.0, 1.0, 2.0, 2.0),
    (1.0, 1.0, 3.0, 2.0),
    (2.0, 3.0, 5.0, 4.0),
    (0.5, 0.5, 1.0, 3.0),
    (2.0, 2.0, 2.5, 7.0),
    (1.0, 2.0, 1.0, 5.0),
];

/// The closed-form uniform against `Beta(2, 2)` case and
/// [`verify_conditional_dominance`] on [`DOMINANCE_CASES`].
pub fn verify_powerdist_suite() -> VerificationReport {
    let mut closed = Tally::new();
    let (t, s) = (0.2, 0.4);
    let u = BetaParams::new(1.0, 1.0).expect("valid");
    let w = BetaParams::new(2.0, 2.0).expect("valid");
    let params = || vec![Param::num("t", t), Param::num("s", s)];
    let v_cond = u.cdf(t).expect("in range") / u.cdf(s).expect("in range");
    let w_cond = w.cdf(t).expect("in range") / w.cdf(s).expect("in range");
    closed.check("uniform conditional == 1/2", v_cond, Relation::Eq, 0.5, 1e-12, params);
    closed.check(
        "Beta(2,2) conditional == 0.104/0.352",
        w_cond,
        Relation::Eq,
        0.104 / 0.352,
        1e-12,
        params,
    );
    let mut parts = vec![closed.into_report("powerdist", None, "closed form")];
    for (a, b, c, d) in DOMINANCE_CASES {
        match verify_conditional_dominance(a, b, c, d, &default_dominance_grid()) {
            Ok(mut r) => {
                for v in &mut r.violations {
                    v.parameters.splice(
                        0..0,
                        [
                            Param::num("a", a),
                            Param::num("b", b),
                            Param::num("c", c),
                            Param::num("d", d),
                        ],
                    );
                }
                parts.push(r);
            }
            Err(_) => {
                let mut t = Tally::new();
                t.fail("dominance parameters valid", || {
                    vec![Param::num("a", a), Param::num("c", c)]
                });
                parts.push(t.into_report("powerdist", None, ""));
            }
        }
    }
    combine(
        "powerdist",
        &parts,
        "closed form (1,1) vs (2,2) at (0.2, 0.4); 6 shape sets on t, s in k/50 plus p".to_string(),
    )
}
