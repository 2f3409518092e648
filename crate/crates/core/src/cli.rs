//! Command-line surface: argument handling, JSON/CSV emission and the
//! golden-value regeneration command.
//!
//! Exit codes: 0 success, 2 parse or configuration error, 3 solver
//! non-convergence, 4 internal inconsistency.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cheb::cheb_eval_unchecked;
use crate::expr::{parse, poly_detect, Expr, PolyInfo};
use crate::jet::{derivative_range, DerivativeRange, DEFAULT_GRID};
use crate::remez::{
    certify_equioscillation, remez, EquioscillationCertificate, RemezError, RemezOptions, RemezResult,
    DEFAULT_MAX_ITER, DEFAULT_TOL, MAX_DEGREE,
};
use crate::saturation::{
    fixture_pairs, golden_record, lemma1_contrapositive_check, lemma2_minimality_check, lower_bound, prop2_containment,
    random_lemma1_instance, random_lemma2_instance, theorem_verdict_with, upper_bound, GoldenRecord, LemmaTwoInstance,
    Prop2Report, SaturationError, SaturationReport, VerdictOptions, DEFAULT_EPSILONS, DEFAULT_VERDICT_TOL, GOLDEN_GRID,
};

/// Overrides the default derivative-range grid size.
pub const GRID_ENV: &str = "SATUREX_GRID";
/// Points in the emitted residual curve.
pub const CURVE_POINTS: usize = 1024;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;
pub const EXIT_INCONSISTENT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "saturex", version, about = "Minimax approximation, error bounds and saturation checks on [-1, 1]")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Minimax approximation with its equioscillation certificate.
    Approx(FnArgs),
    /// Derivative bounds on the best approximation error.
    Bounds(FnArgs),
    /// Saturation ratio and verdict.
    Verdict(FnArgs),
    /// Pointwise check of the interpolation error formula at Chebyshev roots.
    Prop2(FnArgs),
    /// Seeded runs of the two interpolation lemma checks.
    Lemmas(LemmaArgs),
    /// Regenerate golden values with the grid oracle.
    OracleRegen(OracleArgs),
}

#[derive(Debug, Args)]
struct FnArgs {
    /// Target function of x, e.g. "exp(x)".
    #[arg(long = "f")]
    function: String,
    /// Approximation degree.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Derivative-range grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Residual search grid used by the solver.
    #[arg(long)]
    residual_grid: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_VERDICT_TOL)]
    verdict_tol: f64,
    /// Sample points for prop2.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    lemma1_instances: usize,
    #[arg(long, default_value_t = 50)]
    lemma2_instances: usize,
    #[arg(long, default_value_t = 200)]
    perturbations: usize,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Lines of `<n> <expression>`; built-in fixtures when absent.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long, default_value_t = GOLDEN_GRID)]
    grid: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Approx,
    Bounds,
    Verdict,
    Prop2,
    Lemmas { seed: u64, lemma1_instances: usize, lemma2_instances: usize, perturbations: usize },
    OracleRegen { fixtures: Option<PathBuf>, out: Option<PathBuf> },
}

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub function_text: String,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub derivative_grid: usize,
    pub residual_grid: Option<usize>,
    pub verdict_tol: f64,
    pub samples: usize,
    pub oracle_grid: usize,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command, function_text: &str, n: usize) -> Self {
        RunConfig {
            command,
            function_text: function_text.to_string(),
            n,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            derivative_grid: DEFAULT_GRID,
            residual_grid: None,
            verdict_tol: DEFAULT_VERDICT_TOL,
            samples: 64,
            oracle_grid: GOLDEN_GRID,
            output_format: OutputFormat::Json,
        }
    }

    fn remez_options(&self) -> RemezOptions {
        RemezOptions { tol: self.tol, max_iter: self.max_iter, grid_size: self.residual_grid }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: u8, msg: impl std::fmt::Display) -> Self {
        Outcome { code, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let env_grid = match std::env::var(GRID_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(g) => Some(g),
            Err(_) => return Outcome::fail(EXIT_CONFIG, format!("{GRID_ENV}={v:?} is not a grid size")),
        },
        Err(_) => None,
    };
    run(&config_from(cli, env_grid))
}

fn config_from(cli: Cli, env_grid: Option<usize>) -> RunConfig {
    let grid_default = env_grid.unwrap_or(DEFAULT_GRID);
    let from_fn = |a: FnArgs, command: Command| RunConfig {
        command,
        function_text: a.function,
        n: a.n,
        tol: a.tol,
        max_iter: a.max_iter,
        derivative_grid: a.grid.unwrap_or(grid_default),
        residual_grid: a.residual_grid,
        verdict_tol: a.verdict_tol,
        samples: a.samples,
        oracle_grid: GOLDEN_GRID,
        output_format: a.format,
    };
    match cli.command {
        CliCommand::Approx(a) => from_fn(a, Command::Approx),
        CliCommand::Bounds(a) => from_fn(a, Command::Bounds),
        CliCommand::Verdict(a) => from_fn(a, Command::Verdict),
        CliCommand::Prop2(a) => from_fn(a, Command::Prop2),
        CliCommand::Lemmas(a) => RunConfig {
            derivative_grid: grid_default,
            ..RunConfig::new(
                Command::Lemmas {
                    seed: a.seed,
                    lemma1_instances: a.lemma1_instances,
                    lemma2_instances: a.lemma2_instances,
                    perturbations: a.perturbations,
                },
                "",
                0,
            )
        },
        CliCommand::OracleRegen(a) => RunConfig {
            oracle_grid: a.grid,
            derivative_grid: grid_default,
            ..RunConfig::new(Command::OracleRegen { fixtures: a.fixtures, out: a.out }, "", 0)
        },
    }
}

// ---- reports ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub f: String,
    pub n: usize,
    pub result: RemezResult,
    pub monomial: Vec<f64>,
    pub certificate: Option<EquioscillationCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub f: String,
    pub n: usize,
    pub seminorm: DerivativeRange,
    pub seminorm_estimated: bool,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub f: String,
    pub n: usize,
    pub poly_info: PolyInfo,
    pub report: SaturationReport,
    pub certificate: Option<EquioscillationCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Output {
    pub f: String,
    pub report: Prop2Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub seed: u64,
    pub lemma1_instances: usize,
    pub lemma1_passed: usize,
    pub lemma2_instances: usize,
    pub lemma2_perturbations_each: usize,
    pub lemma2_passed: usize,
    pub lemma2_min_margin: f64,
    pub chebyshev_instance_seminorm: f64,
    pub chebyshev_instance_passed: bool,
}

// ---- JSON with 17 significant digits ----

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with every float written as 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser).expect("report types serialize");
    String::from_utf8(buf).expect("json is utf-8")
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,residual,T_{n+1}(x)` on uniformly spaced points.
pub fn residual_csv(f: &Expr, result: &RemezResult) -> String {
    let mut out = String::from("x,residual,t_n_plus_1\n");
    for i in 0..CURVE_POINTS {
        let x = -1.0 + 2.0 * i as f64 / (CURVE_POINTS - 1) as f64;
        let r = f.eval(x) - result.poly.eval(x);
        let t = cheb_eval_unchecked(result.n + 1, x);
        let _ = writeln!(out, "{},{},{}", sci(x), sci(r), sci(t));
    }
    out
}

/// Parses `<n> <expression>` lines; blank lines and `#` comments skipped.
pub fn parse_fixture_list(text: &str) -> Result<Vec<(String, usize)>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (n, expr) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {}: expected `<n> <expression>`", lineno + 1))?;
        let n: usize = n.parse().map_err(|_| format!("line {}: bad degree {n:?}", lineno + 1))?;
        out.push((expr.trim().to_string(), n));
    }
    Ok(out)
}

/// One JSON record per line, in fixture order.
pub fn render_golden(records: &[GoldenRecord]) -> String {
    records.iter().map(|r| to_json(r) + "\n").collect()
}

pub fn run(config: &RunConfig) -> Outcome {
    match &config.command {
        Command::Lemmas { seed, lemma1_instances, lemma2_instances, perturbations } => {
            run_lemmas(*seed, *lemma1_instances, *lemma2_instances, *perturbations)
        }
        Command::OracleRegen { fixtures, out } => run_oracle(config, fixtures.as_ref(), out.as_ref()),
        other => {
            if config.n > MAX_DEGREE {
                return Outcome::fail(EXIT_CONFIG, format!("n = {} outside [0, {MAX_DEGREE}]", config.n));
            }
            if config.output_format == OutputFormat::Csv && *other != Command::Approx {
                return Outcome::fail(EXIT_CONFIG, "csv output is only available for approx");
            }
            let f = match parse(&config.function_text) {
                Ok(f) => f,
                Err(e) => return Outcome::fail(EXIT_CONFIG, e),
            };
            match other {
                Command::Approx => run_approx(config, &f),
                Command::Bounds => run_bounds(config, &f),
                Command::Verdict => run_verdict(config, &f),
                Command::Prop2 => run_prop2(config, &f),
                _ => unreachable!("handled above"),
            }
        }
    }
}

fn run_approx(config: &RunConfig, f: &Expr) -> Outcome {
    let result = match remez(f, config.n, &config.remez_options()) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(EXIT_INCONSISTENT, e),
    };
    if !result.converged {
        let mut o =
            Outcome::fail(EXIT_NO_CONVERGENCE, format!("no convergence after {} iterations", result.iterations));
        o.stdout = to_json(&result) + "\n";
        return o;
    }
    let certificate = match certify_equioscillation(f, &result) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_INCONSISTENT, e),
    };
    if config.output_format == OutputFormat::Csv {
        return Outcome::ok(residual_csv(f, &result));
    }
    let report = ApproxReport {
        f: config.function_text.clone(),
        n: config.n,
        monomial: result.poly.to_monomial(),
        result,
        certificate: Some(certificate),
    };
    Outcome::ok(to_json(&report) + "\n")
}

fn run_bounds(config: &RunConfig, f: &Expr) -> Outcome {
    let n = config.n;
    let seminorm = match derivative_range(f, n + 1, config.derivative_grid) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(EXIT_CONFIG, e),
    };
    let info = poly_detect(f);
    let report = BoundsReport {
        f: config.function_text.clone(),
        n,
        upper: upper_bound(&seminorm, n).expect("order matches"),
        lower: lower_bound(&seminorm, n).expect("order matches"),
        seminorm,
        seminorm_estimated: !(info.is_polynomial && info.degree <= n + 1),
    };
    Outcome::ok(to_json(&report) + "\n")
}

fn run_verdict(config: &RunConfig, f: &Expr) -> Outcome {
    let opts = VerdictOptions {
        verdict_tol: config.verdict_tol,
        remez: config.remez_options(),
        derivative_grid: config.derivative_grid,
    };
    match theorem_verdict_with(f, config.n, &opts) {
        Ok((report, result)) => {
            let certificate = match certify_equioscillation(f, &result) {
                Ok(c) => c,
                Err(e) => return Outcome::fail(EXIT_INCONSISTENT, e),
            };
            let out = VerdictReport {
                f: config.function_text.clone(),
                n: config.n,
                poly_info: poly_detect(f),
                report,
                certificate: Some(certificate),
            };
            Outcome::ok(to_json(&out) + "\n")
        }
        Err(e) => Outcome::fail(saturation_exit(&e), e),
    }
}

fn saturation_exit(e: &SaturationError) -> u8 {
    match e {
        SaturationError::NotConverged { .. } => EXIT_NO_CONVERGENCE,
        SaturationError::BadTolerance(_) | SaturationError::Jet(_) | SaturationError::Precondition(_) => EXIT_CONFIG,
        _ => EXIT_INCONSISTENT,
    }
}

fn run_prop2(config: &RunConfig, f: &Expr) -> Outcome {
    match prop2_containment(f, config.n, config.samples) {
        Ok(report) => {
            let contained = report.contained;
            let text = to_json(&Prop2Output { f: config.function_text.clone(), report }) + "\n";
            if contained {
                Outcome::ok(text)
            } else {
                Outcome { code: EXIT_INCONSISTENT, stdout: text, stderr: "error: containment violated\n".into() }
            }
        }
        Err(e) => Outcome::fail(saturation_exit(&e), e),
    }
}

/// Seeded lemma suites: random polynomial instances for the sign check and
/// random interpolation data for the minimality check, plus the `T_3` case.
pub fn lemma_summary(
    seed: u64,
    lemma1: usize,
    lemma2: usize,
    perturbations: usize,
) -> Result<LemmaSummary, SaturationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lemma1_passed = 0;
    for i in 0..lemma1 {
        let m = 1 + i % 4;
        let (h, zeros) = random_lemma1_instance(&mut rng, m);
        if lemma1_contrapositive_check(&h, &zeros, m, DEFAULT_GRID)?.both_signs {
            lemma1_passed += 1;
        }
    }
    let mut lemma2_passed = 0;
    let mut margin = f64::INFINITY;
    for i in 0..lemma2 {
        let m = 1 + i % 4;
        let inst = random_lemma2_instance(&mut rng, m)?;
        let r = lemma2_minimality_check(&inst, perturbations, &DEFAULT_EPSILONS, &mut rng)?;
        margin = margin.min(r.min_seminorm - r.interpolant_seminorm);
        if r.passed {
            lemma2_passed += 1;
        }
    }
    let ext = crate::cheb::cheb_extrema(3)?;
    let vals: Vec<f64> = ext.points().iter().map(|&y| cheb_eval_unchecked(3, y)).collect();
    let cheb = LemmaTwoInstance::new(ext.points().to_vec(), vals)?;
    let cheb_report = lemma2_minimality_check(&cheb, perturbations, &DEFAULT_EPSILONS, &mut rng)?;
    Ok(LemmaSummary {
        seed,
        lemma1_instances: lemma1,
        lemma1_passed,
        lemma2_instances: lemma2,
        lemma2_perturbations_each: perturbations,
        lemma2_passed,
        lemma2_min_margin: margin,
        chebyshev_instance_seminorm: cheb.interpolant_seminorm,
        chebyshev_instance_passed: cheb_report.passed,
    })
}

fn run_lemmas(seed: u64, lemma1: usize, lemma2: usize, perturbations: usize) -> Outcome {
    match lemma_summary(seed, lemma1, lemma2, perturbations) {
        Ok(s) => {
            let ok = s.lemma1_passed == s.lemma1_instances
                && s.lemma2_passed == s.lemma2_instances
                && s.chebyshev_instance_passed;
            let text = to_json(&s) + "\n";
            if ok {
                Outcome::ok(text)
            } else {
                Outcome { code: EXIT_INCONSISTENT, stdout: text, stderr: "error: lemma check failed\n".into() }
            }
        }
        Err(e) => Outcome::fail(EXIT_INCONSISTENT, e),
    }
}

/// Runs the grid oracle over a fixture list, in order.
pub fn regenerate_golden(pairs: &[(String, usize)], grid: usize) -> Result<Vec<GoldenRecord>, SaturationError> {
    pairs
        .iter()
        .map(|(text, n)| {
            let f = parse(text).map_err(|e| SaturationError::Precondition(e.to_string()))?;
            golden_record(text, &f, *n, grid)
        })
        .collect()
}

fn run_oracle(config: &RunConfig, fixtures: Option<&PathBuf>, out: Option<&PathBuf>) -> Outcome {
    let pairs = match fixtures {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_fixture_list(&text) {
                Ok(p) => p,
                Err(e) => return Outcome::fail(EXIT_CONFIG, e),
            },
            Err(e) => return Outcome::fail(EXIT_CONFIG, format!("{}: {e}", path.display())),
        },
        None => fixture_pairs(),
    };
    for (text, n) in &pairs {
        if *n > MAX_DEGREE {
            return Outcome::fail(EXIT_CONFIG, format!("fixture {text:?}: n = {n} outside [0, {MAX_DEGREE}]"));
        }
        if let Err(e) = parse(text) {
            return Outcome::fail(EXIT_CONFIG, format!("fixture {text:?}: {e}"));
        }
    }
    let records = match regenerate_golden(&pairs, config.oracle_grid) {
        Ok(r) => r,
        Err(e @ SaturationError::Remez(RemezError::GridTooSmall { .. })) => return Outcome::fail(EXIT_CONFIG, e),
        Err(e) => return Outcome::fail(EXIT_NO_CONVERGENCE, e),
    };
    let text = render_golden(&records);
    match out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome::ok(String::new()),
            Err(e) => Outcome::fail(EXIT_CONFIG, format!("{}: {e}", path.display())),
        },
        None => Outcome::ok(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> Outcome {
        run_args(std::iter::once("saturex").chain(args.iter().copied()))
    }

    #[test]
    fn json_floats_use_seventeen_digits() {
        assert_eq!(to_json(&0.1f64), "1.0000000000000001e-1");
        assert_eq!(to_json(&vec![1.0f64, -2.5]), "[1.0000000000000000e0,-2.5000000000000000e0]");
        let v: f64 = serde_json::from_str(&to_json(&std::f64::consts::PI)).unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn syntax_error_exits_two() {
        let o = run_cli(&["verdict", "--f", "sin(", "--n", "2"]);
        assert_eq!(o.code, EXIT_CONFIG);
        assert!(o.stderr.contains("syntax error at offset 4"), "{}", o.stderr);
    }

    #[test]
    fn config_errors() {
        assert_eq!(run_cli(&["verdict", "--f", "x", "--n", "13"]).code, EXIT_CONFIG);
        assert_eq!(run_cli(&["verdict", "--f", "x", "--n", "2", "--bogus"]).code, EXIT_CONFIG);
        assert_eq!(run_cli(&["frobnicate"]).code, EXIT_CONFIG);
        assert_eq!(run_cli(&["bounds", "--f", "x", "--n", "1", "--format", "csv"]).code, EXIT_CONFIG);
        assert_eq!(run_cli(&["approx", "--f", "x/2", "--n", "1"]).code, EXIT_CONFIG);
    }

    #[test]
    fn fixture_list_parsing() {
        let pairs = parse_fixture_list("# comment\n3 exp(x)\n\n 2   sin(2*x) + x \n").unwrap();
        assert_eq!(pairs, vec![("exp(x)".to_string(), 3), ("sin(2*x) + x".to_string(), 2)]);
        assert!(parse_fixture_list("exp(x)").is_err());
        assert!(parse_fixture_list("-1 x").is_err());
    }

    #[test]
    fn csv_curve_shape() {
        let o = run_cli(&["approx", "--f", "exp(x)", "--n", "3", "--format", "csv"]);
        assert_eq!(o.code, 0);
        let lines: Vec<&str> = o.stdout.split('\n').collect();
        assert_eq!(lines[0], "x,residual,t_n_plus_1");
        assert_eq!(lines.len(), CURVE_POINTS + 2);
        assert_eq!(*lines.last().unwrap(), "");
        assert!(!o.stdout.contains('\r'));
    }
}
