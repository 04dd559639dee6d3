//! Command-line front end: `bound`, `figure`, `verify`, `reflect` and
//! `sweep-beta`.
//!
//! Exit codes: 0 on success, 1 when a verification finds a violation, 2 on a
//! usage or I/O error. Every run records its resolved arguments: embedded
//! under `config` in JSON output, in a `<out>.meta.json` sidecar for other
//! formats written to a file, or as a `# config:` line on stderr otherwise.

pub mod figure;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::{
    beta_interpolation, binom_corollary_lower, binom_half_upper, binom_lower_tail_bound, binom_sharp_lower,
    binom_universal_lower, poisson_half_upper, poisson_lower_tail_bound, poisson_sharp_lower, small_mu_threshold,
    uniform_beta_lower, BoundResult, ShiftQuery,
};
use crate::exact::{is_integer, parse_rational, to_f64, BinomialSpec};
use crate::reflection::ReflectionMap;
use crate::verify::{self, SuiteLimits, SweepConfig, VerificationReport, SUITES};

#[derive(Parser, Debug)]
#[command(
    name = "tailbound",
    version,
    about = "Bounds on binomial and Poisson tails near the mean, with exact verification suites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one bound
    Bound(BoundArgs),
    /// Tabulate the series behind figure 1 (binomial) or figure 2 (Poisson)
    Figure(FigureArgs),
    /// Run verification suites; exit 1 on any violation
    Verify(VerifyArgs),
    /// Tabulate the reflection r_p with its derivatives
    Reflect(ReflectArgs),
    /// Sweep P(W_n <= p) for W_n ~ Beta(pn + a, (1-p)n + b) over n
    SweepBeta(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default depends on the command)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Significant digits in decimal output
    #[arg(long, default_value_t = 10)]
    pub precision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Floor-based lower bound on P(X >= mu + l), real mu >= 1
    Binom,
    /// (mu/(mu+l))^(mu+l) for integer mu, l >= 1
    BinomSharp,
    /// (1+l)^-(1+l), l >= 1
    BinomUniversal,
    /// Floor-based lower bound on P(X <= mu - l); needs --n
    BinomLower,
    /// The constant 1/2 above P(X >= mu + l)
    BinomHalf,
    /// 1 - e^-1 sum_{k<=l} 1/k! below P(Z >= lambda + l)
    Poisson,
    /// e^-l below P(Z <= lambda - l)
    PoissonLower,
    /// The constant 1/2 above P(Z >= lambda + l)
    PoissonHalf,
    /// Beta-CDF interpolations around P(X >= mu + l); needs --n
    Beta,
    /// I_{mu/n}(mu/n + l, 2 - mu/n - l); needs --n
    UniformBeta,
    /// The smallest mu from which P(X >= mu) >= 1/4 for every n
    SmallMu,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Mean, e.g. 2, 2.5 or 7/3
    #[arg(long)]
    pub mu: Option<String>,
    /// Shift above (or below) the mean
    #[arg(long, default_value_t = 0)]
    pub l: u32,
    /// Number of trials
    #[arg(long)]
    pub n: Option<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FigureArgs {
    /// 1: binomial, 2: Poisson
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub figure: u8,
    /// Number of trials (figure 1)
    #[arg(long, default_value_t = 5)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub l: u32,
    /// Spacing of the mean grid, as a decimal or fraction
    #[arg(long, default_value = "0.01")]
    pub grid_step: String,
    /// Largest lambda (figure 2)
    #[arg(long, default_value = "10")]
    pub max_lambda: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn suite_names() -> clap::builder::PossibleValuesParser {
    clap::builder::PossibleValuesParser::new(SUITES.iter().copied().chain(["bounds", "sweep-beta", "all"]))
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// Suite to run; `bounds` groups the bound chains
    #[arg(long, value_parser = suite_names())]
    pub suite: String,
    #[arg(long, default_value_t = 60)]
    pub max_n: u32,
    #[arg(long, default_value_t = 4)]
    pub max_l: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random vectors for theorem5
    #[arg(long, default_value_t = 1000)]
    pub trials: u32,
    /// sweep-beta parameters
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Run sweep-beta outside the theorem's hypotheses, recording only
    #[arg(long)]
    pub conjecture: bool,
    /// Where to write the sweep-beta series (default: next to --out)
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReflectArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, required_unless_present = "x_grid", conflicts_with = "x_grid")]
    pub x: Option<f64>,
    /// start:end:step, e.g. 0.01:0.99:0.01
    #[arg(long)]
    pub x_grid: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Comma-separated increasing n values (default: geometric grid to 1e4)
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub conjecture: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn usage(msg: impl std::fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }
}

struct Streams<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    let mut io = Streams {
        out: stdout,
        err: stderr,
    };
    let result = match &cli.command {
        Command::Bound(a) => cmd_bound(a, &mut io),
        Command::Figure(a) => cmd_figure(a, &mut io),
        Command::Verify(a) => cmd_verify(a, &mut io),
        Command::Reflect(a) => cmd_reflect(a, &mut io),
        Command::SweepBeta(a) => cmd_sweep(a, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            2
        }
    }
}

fn config(command: &str, args: &impl Serialize) -> Value {
    json!({ "command": command, "args": args })
}

/// Decimal rendering with `digits` significant digits; fixed notation for
/// magnitudes in `[1e−4, 1e6)`, scientific otherwise, trailing zeros trimmed.
pub fn decimal(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if (1e-4..1e6).contains(&a) {
        let exp = a.log10().floor() as i64;
        let places = (digits as i64 - 1 - exp).max(0) as usize;
        trim_fraction(format!("{x:.places$}"))
    } else {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = s.split_once('e').expect("scientific notation");
        format!("{}e{}", trim_fraction(mantissa.to_string()), exp)
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn rational_str(x: &Option<BigRational>) -> String {
    x.as_ref().map(|r| r.to_string()).unwrap_or_default()
}

/// Writes `body`; non-JSON output gets its config in a sidecar or on stderr.
fn deliver(output: &OutputArgs, format: Format, body: &str, cfg: &Value, io: &mut Streams) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            write_file(path, body)?;
            if format != Format::Json {
                let meta = sidecar(path);
                let text = serde_json::to_string_pretty(cfg).expect("config serializes") + "\n";
                write_file(&meta, &text)?;
            }
        }
        None => {
            if format != Format::Json {
                let _ = writeln!(io.err, "# config: {cfg}");
            }
            io.out.write_all(body.as_bytes()).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            })?;
        }
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn json_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn parse_mu(mu: &Option<String>) -> Result<BigRational, CliError> {
    let s = mu.as_deref().ok_or_else(|| CliError::usage("this family needs --mu"))?;
    let v = parse_rational(s).map_err(CliError::usage)?;
    if v < BigRational::from_integer(0.into()) {
        return Err(CliError::usage("--mu must be non-negative"));
    }
    Ok(v)
}

fn need_n(n: Option<u32>) -> Result<u32, CliError> {
    n.ok_or_else(|| CliError::usage("this family needs --n"))
}

/// Exact tail of `X ~ Binom(n, μ/n)` next to a bound: `P(X ≥ ⌈μ+l⌉)`, or
/// `P(X ≤ ⌊μ−l⌋)` when `lower` is set.
fn binomial_tail(q: &ShiftQuery, lower: bool) -> Result<Option<(String, BigRational)>, CliError> {
    let Some(n) = q.n else { return Ok(None) };
    let spec = BinomialSpec::new(n, q.mu.clone()).map_err(CliError::usage)?;
    Ok(Some(if lower {
        let k = q.lower_threshold();
        (format!("P(X <= {k})"), crate::exact::binom_lower_tail(&spec, k))
    } else {
        let k = q.upper_threshold();
        (format!("P(X >= {k})"), crate::exact::binom_upper_tail(&spec, k))
    }))
}

fn cmd_bound(args: &BoundArgs, io: &mut Streams) -> Result<i32, CliError> {
    let cfg = config("bound", args);
    let prec = args.output.precision;
    let format = args.output.format.unwrap_or(Format::Text);
    let family = Family::to_possible_value(&args.family)
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();

    if args.family == Family::Beta {
        let n = need_n(args.n)?;
        let q = ShiftQuery::new(parse_mu(&args.mu)?, args.l, Some(n));
        let sandwich = beta_interpolation(&q).map_err(CliError::usage)?;
        let tail = binomial_tail(&q, false)?;
        let body = match format {
            Format::Json => json_string(&json!({
                "config": cfg,
                "family": family,
                "lower": sandwich.lower,
                "upper": sandwich.upper,
                "tail": tail.as_ref().map(|(event, v)| json!({"event": event, "value": to_f64(v), "exact": v.to_string()})),
            })),
            Format::Csv => csv_string(
                &["family", "lower", "upper", "tail", "tail_exact"],
                [vec![
                    family.clone(),
                    decimal(sandwich.lower, prec),
                    decimal(sandwich.upper, prec),
                    tail.as_ref().map(|t| decimal(to_f64(&t.1), prec)).unwrap_or_default(),
                    tail.as_ref().map(|t| t.1.to_string()).unwrap_or_default(),
                ]],
            ),
            Format::Text => {
                let mut s = format!(
                    "{family}\nlower: {}\nupper: {}\n",
                    decimal(sandwich.lower, prec),
                    decimal(sandwich.upper, prec)
                );
                if let Some((event, v)) = &tail {
                    s += &format!("{event}: {v} = {}\n", decimal(to_f64(v), prec));
                }
                s
            }
        };
        deliver(&args.output, format, &body, &cfg, io)?;
        return Ok(0);
    }

    let (result, tail): (BoundResult, Option<(String, BigRational)>) = match args.family {
        Family::Binom => {
            let q = ShiftQuery::new(parse_mu(&args.mu)?, args.l, args.n);
            (binom_corollary_lower(&q), binomial_tail(&q, false)?)
        }
        Family::BinomSharp => {
            let mu = parse_mu(&args.mu)?;
            if !is_integer(&mu) {
                return Err(CliError::usage("binom-sharp needs an integer --mu"));
            }
            let m = mu
                .to_integer()
                .to_u32()
                .ok_or_else(|| CliError::usage("--mu too large"))?;
            let q = ShiftQuery::new(mu, args.l, args.n);
            (binom_sharp_lower(m, args.l), binomial_tail(&q, false)?)
        }
        Family::BinomUniversal => (binom_universal_lower(args.l), None),
        Family::BinomLower => {
            let q = ShiftQuery::new(parse_mu(&args.mu)?, args.l, Some(need_n(args.n)?));
            (binom_lower_tail_bound(&q), binomial_tail(&q, true)?)
        }
        Family::BinomHalf => {
            let q = ShiftQuery::new(parse_mu(&args.mu)?, args.l, args.n);
            (binom_half_upper(&q), binomial_tail(&q, false)?)
        }
        Family::Poisson => (poisson_sharp_lower(args.l), None),
        Family::PoissonLower => (poisson_lower_tail_bound(args.l), None),
        Family::PoissonHalf => (poisson_half_upper(args.l), None),
        Family::UniformBeta => {
            let q = ShiftQuery::new(parse_mu(&args.mu)?, args.l, Some(need_n(args.n)?));
            (uniform_beta_lower(&q), binomial_tail(&q, false)?)
        }
        Family::SmallMu => {
            let v = small_mu_threshold();
            let body = match format {
                Format::Json => json_string(&json!({"config": cfg, "family": family, "value": v})),
                Format::Csv => csv_string(&["family", "value"], [vec![family.clone(), decimal(v, prec)]]),
                Format::Text => format!("{family}: ln(4/3) = {}\n", decimal(v, prec)),
            };
            deliver(&args.output, format, &body, &cfg, io)?;
            return Ok(0);
        }
        Family::Beta => unreachable!("handled above"),
    };

    let body = match format {
        Format::Json => json_string(&json!({
            "config": cfg,
            "family": family,
            "result": result,
            "tail": tail.as_ref().map(|(event, v)| json!({"event": event, "value": to_f64(v), "exact": v.to_string()})),
        })),
        Format::Csv => csv_string(
            &[
                "family",
                "kind",
                "value",
                "exact",
                "valid",
                "reason",
                "attained_mu",
                "attained_n",
                "universal_floor",
                "tail",
                "tail_exact",
            ],
            [vec![
                family.clone(),
                format!("{:?}", result.kind).to_lowercase(),
                decimal(result.value, prec),
                rational_str(&result.exact),
                result.validity.valid.to_string(),
                result.validity.reason.clone().unwrap_or_default(),
                result
                    .attained_at
                    .as_ref()
                    .map(|a| a.mu.to_string())
                    .unwrap_or_default(),
                result
                    .attained_at
                    .as_ref()
                    .and_then(|a| a.n)
                    .map(|n| n.to_string())
                    .unwrap_or_default(),
                rational_str(&result.universal_floor),
                tail.as_ref().map(|t| decimal(to_f64(&t.1), prec)).unwrap_or_default(),
                tail.as_ref().map(|t| t.1.to_string()).unwrap_or_default(),
            ]],
        ),
        Format::Text => render_bound_text(&family, &result, tail.as_ref(), prec),
    };
    deliver(&args.output, format, &body, &cfg, io)?;
    Ok(0)
}

fn render_bound_text(family: &str, r: &BoundResult, tail: Option<&(String, BigRational)>, prec: usize) -> String {
    let kind = format!("{:?}", r.kind).to_lowercase();
    let value = match &r.exact {
        Some(x) => format!("{x} = {}", decimal(r.value, prec)),
        None => decimal(r.value, prec),
    };
    let mut s = format!("{family} ({kind} bound): {value}\nvalid: {}\n", r.validity.valid);
    if let Some(reason) = &r.validity.reason {
        s += &format!("reason: {reason}\n");
    }
    if let Some(a) = &r.attained_at {
        match a.n {
            Some(n) => s += &format!("attained at: mu = {}, n = {n}\n", a.mu),
            None => s += &format!("attained at: mu = {}\n", a.mu),
        }
    }
    if let Some(f) = &r.universal_floor {
        s += &format!("universal floor: {f} = {}\n", decimal(to_f64(f), prec));
    }
    if let Some((event, v)) = tail {
        s += &format!("{event}: {v} = {}\n", decimal(to_f64(v), prec));
    }
    s
}

fn cmd_figure(args: &FigureArgs, io: &mut Streams) -> Result<i32, CliError> {
    let cfg = config("figure", args);
    let prec = args.output.precision;
    let step = parse_rational(&args.grid_step).map_err(CliError::usage)?;
    let rows = if args.figure == 1 {
        figure::binomial_rows(args.n, args.l, &step)
    } else {
        let max = parse_rational(&args.max_lambda).map_err(CliError::usage)?;
        figure::poisson_rows(args.l, &step, &max)
    }
    .map_err(CliError::usage)?;
    let limit = |l: Option<figure::Limit>| match l {
        Some(figure::Limit::Left) => "left",
        Some(figure::Limit::Right) => "right",
        None => "",
    };
    let format = args.output.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Json => json_string(&json!({
            "config": cfg,
            "rows": rows.iter().map(|r| json!({
                "mu_or_lambda": to_f64(&r.mu_or_lambda),
                "limit": r.limit,
                "probability": r.probability,
                "probability_exact": r.probability_exact.as_ref().map(|x| x.to_string()),
                "lower_bound": r.lower_bound,
                "lower_bound_exact": r.lower_bound_exact.as_ref().map(|x| x.to_string()),
                "bound_valid": r.bound_valid,
            })).collect::<Vec<_>>(),
        })),
        _ => csv_string(
            &[
                "mu_or_lambda",
                "limit",
                "probability",
                "probability_exact",
                "lower_bound",
                "lower_bound_exact",
                "bound_valid",
            ],
            rows.iter().map(|r| {
                vec![
                    to_f64(&r.mu_or_lambda).to_string(),
                    limit(r.limit).to_string(),
                    decimal(r.probability, prec),
                    rational_str(&r.probability_exact),
                    decimal(r.lower_bound, prec),
                    rational_str(&r.lower_bound_exact),
                    r.bound_valid.to_string(),
                ]
            }),
        ),
    };
    deliver(&args.output, format, &body, &cfg, io)?;
    Ok(0)
}

fn series_path(args: &VerifyArgs) -> Option<PathBuf> {
    args.series
        .clone()
        .or_else(|| args.output.out.as_ref().map(|p| p.with_extension("series.csv")))
}

fn series_csv(series: &[verify::SweepPoint], prec: usize) -> String {
    csv_string(
        &["n", "s"],
        series
            .iter()
            .map(|pt| vec![pt.n.to_string(), decimal(pt.s, prec.max(17))]),
    )
}

fn report_summary(reports: &[VerificationReport], prec: usize) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["suite", "passed", "cases_run", "violations", "worst_slack", "seed"];
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.suite.clone(),
                r.passed.to_string(),
                r.cases_run.to_string(),
                r.violations.len().to_string(),
                r.worst_slack.map(|w| decimal(w, prec)).unwrap_or_default(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    (header, rows)
}

fn cmd_verify(args: &VerifyArgs, io: &mut Streams) -> Result<i32, CliError> {
    let cfg = config("verify", args);
    let limits = SuiteLimits {
        max_n: args.max_n,
        max_l: args.max_l,
        seed: args.seed,
        trials: args.trials,
    };
    let mut extra = serde_json::Map::new();
    let mut conjecture = false;
    let reports: Vec<VerificationReport> = match args.suite.as_str() {
        "all" => SUITES
            .iter()
            .map(|s| verify::run_suite(s, &limits).map_err(CliError::usage))
            .collect::<Result<_, _>>()?,
        "sweep-beta" => {
            let (Some(p), Some(a), Some(b)) = (args.p, args.a, args.b) else {
                return Err(CliError::usage("sweep-beta needs --p, --a and --b"));
            };
            let cfg_sweep = SweepConfig::with_default_grid(p, a, b).map_err(CliError::usage)?;
            let outcome = verify::sweep_beta_monotone(&cfg_sweep, args.conjecture)
                .map_err(|e| CliError::usage(format!("{e}; pass --conjecture to record the sweep anyway")))?;
            conjecture = outcome.conjecture_mode;
            extra.insert("verdict".into(), json!(outcome.verdict));
            extra.insert("conjecture_mode".into(), json!(outcome.conjecture_mode));
            if let Some(path) = series_path(args) {
                write_file(&path, &series_csv(&outcome.series, args.output.precision))?;
                extra.insert("series_csv".into(), json!(path.display().to_string()));
            }
            vec![outcome.report]
        }
        name => vec![verify::run_suite(name, &limits).map_err(CliError::usage)?],
    };
    let passed = reports.iter().all(|r| r.passed);
    let format = args.output.format.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => {
            let mut v = json!({ "config": cfg, "passed": passed, "suites": reports });
            v.as_object_mut().expect("object").extend(extra);
            json_string(&v)
        }
        Format::Csv => {
            let (header, rows) = report_summary(&reports, args.output.precision);
            csv_string(&header, rows)
        }
        Format::Text => reports
            .iter()
            .map(|r| {
                format!(
                    "{} {}: {} cases, {} violations, worst slack {}\n",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.suite,
                    r.cases_run,
                    r.violations.len(),
                    r.worst_slack
                        .map(|w| decimal(w, args.output.precision))
                        .unwrap_or_else(|| "-".into())
                )
            })
            .collect(),
    };
    deliver(&args.output, format, &body, &cfg, io)?;
    Ok(if passed || conjecture { 0 } else { 1 })
}

/// `start:end:step` as exact decimals, evaluated without accumulating
/// rounding.
fn parse_x_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(CliError::usage("--x-grid expects start:end:step"));
    };
    let start = parse_rational(start).map_err(CliError::usage)?;
    let end = parse_rational(end).map_err(CliError::usage)?;
    let step = parse_rational(step).map_err(CliError::usage)?;
    if step <= BigRational::from_integer(0.into()) || end < start {
        return Err(CliError::usage("--x-grid needs start <= end and a positive step"));
    }
    let count = ((&end - &start) / &step).floor().to_integer().to_u64().unwrap_or(0);
    if count > 1_000_000 {
        return Err(CliError::usage("--x-grid has too many points"));
    }
    Ok((0..=count)
        .map(|i| to_f64(&(&start + &step * BigRational::from_integer(i.into()))))
        .collect())
}

fn cmd_reflect(args: &ReflectArgs, io: &mut Streams) -> Result<i32, CliError> {
    let cfg = config("reflect", args);
    let prec = args.output.precision;
    let map = ReflectionMap::new(args.p).map_err(CliError::usage)?;
    let xs = match (&args.x, &args.x_grid) {
        (Some(x), _) => vec![*x],
        (None, Some(g)) => parse_x_grid(g)?,
        (None, None) => return Err(CliError::usage("pass --x or --x-grid")),
    };
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let r = map.reflect(x).map_err(CliError::usage)?;
        let back = map.reflect(r).map_err(CliError::usage)?;
        rows.push((
            x,
            r,
            map.derivative(x).ok(),
            map.second_derivative(x).ok(),
            (back - x).abs(),
        ));
    }
    let format = args.output.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Json => json_string(&json!({
            "config": cfg,
            "rows": rows.iter().map(|(x, r, d1, d2, res)| json!({
                "x": x, "r": r, "dr": d1, "d2r": d2, "involution_residual": res,
            })).collect::<Vec<_>>(),
        })),
        _ => csv_string(
            &["x", "r", "dr", "d2r", "involution_residual"],
            rows.iter().map(|(x, r, d1, d2, res)| {
                vec![
                    x.to_string(),
                    decimal(*r, prec),
                    d1.map(|v| decimal(v, prec)).unwrap_or_default(),
                    d2.map(|v| decimal(v, prec)).unwrap_or_default(),
                    decimal(*res, prec),
                ]
            }),
        ),
    };
    deliver(&args.output, format, &body, &cfg, io)?;
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs, io: &mut Streams) -> Result<i32, CliError> {
    let cfg = config("sweep-beta", args);
    let sweep_cfg = match &args.grid {
        Some(g) => {
            let grid = g
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::usage(format!("--grid {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            SweepConfig::new(args.p, args.a, args.b, grid)
        }
        None => SweepConfig::with_default_grid(args.p, args.a, args.b),
    }
    .map_err(CliError::usage)?;
    let outcome = verify::sweep_beta_monotone(&sweep_cfg, args.conjecture)
        .map_err(|e| CliError::usage(format!("{e}; pass --conjecture to record the sweep anyway")))?;
    let format = args.output.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Json => json_string(&json!({ "config": cfg, "outcome": outcome })),
        _ => series_csv(&outcome.series, args.output.precision),
    };
    deliver(&args.output, format, &body, &cfg, io)?;
    let r = &outcome.report;
    let _ = writeln!(
        io.err,
        "{}: {} ({} violations over {} checks)",
        r.suite,
        if r.passed { "monotone" } else { "not monotone" },
        r.violations.len(),
        r.cases_run
    );
    Ok(if r.passed || outcome.conjecture_mode { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("tailbound").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(0.25, 10), "0.25");
        assert_eq!(decimal(1.0 - (-1.0f64).exp(), 10), "0.6321205588");
        assert_eq!(decimal(1.5e-57, 4), "1.5e-57");
        assert_eq!(decimal(-3.0, 5), "-3");
        assert_eq!(decimal(0.0, 5), "0");
    }

    #[test]
    fn bound_examples() {
        let (code, out, err) = run_args(&["bound", "binom", "--mu", "1", "--l", "0"]);
        assert_eq!(code, 0);
        assert!(
            out.starts_with("binom (lower bound): 1/4 = 0.25\nvalid: true\n"),
            "{out}"
        );
        assert!(err.starts_with("# config: "));
        let (_, out, _) = run_args(&["bound", "poisson", "--l", "0"]);
        assert!(out.contains("0.6321205588\n"), "{out}");
        let (_, out, _) = run_args(&["bound", "binom", "--mu", "0", "--l", "0", "--format", "json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["validity"]["valid"], json!(false));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["bound", "nope"]).0, 2);
        assert_eq!(run_args(&["bound", "binom-lower", "--mu", "2"]).0, 2);
        assert_eq!(run_args(&["figure", "--figure", "3"]).0, 2);
        assert_eq!(run_args(&["verify", "--suite", "nope"]).0, 2);
        assert_eq!(run_args(&["reflect", "--p", "1.5", "--x", "0.2"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn reflect_rows() {
        let (code, out, _) = run_args(&["reflect", "--p", "0.5", "--x", "0.3"]);
        assert_eq!(code, 0);
        let line = out.lines().nth(1).unwrap();
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], "0.3");
        assert_eq!(cols[1], "0.7");
        assert_eq!(cols[2], "-1");
        let (_, out, _) = run_args(&["reflect", "--p", "0.3", "--x", "0.3"]);
        assert_eq!(out.lines().nth(1).unwrap(), "0.3,0.3,-1,,0");
    }

    #[test]
    fn x_grid_parses_exactly() {
        let g = parse_x_grid("0.01:0.99:0.01").unwrap();
        assert_eq!(g.len(), 99);
        assert_eq!(g[6], 0.07);
        assert!(parse_x_grid("0.1:0.2").is_err());
    }
}
