//! Error bounds for best approximation from `Π_n`, the saturation ratio and
//! its verdict, plus executable checks of the two interpolation lemmas the
//! characterisation rests on.
//!
//! For `f` in `C^{n+1}[-1, 1]`,
//!
//! ```text
//! min |f^(n+1)| / (2^n (n+1)!)  <=  E_n(f)  <=  ||f^(n+1)|| / (2^n (n+1)!)
//! ```
//!
//! and the upper bound is attained exactly when `f` is a polynomial of degree
//! `n + 1`. The ratio `E_n(f) 2^n (n+1)! / ||f^(n+1)||` is therefore 1 on
//! `Π_{n+1} \ Π_n` and strictly below 1 everywhere else.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb::{cheb_eval_unchecked, cheb_roots, derive_series, fit_at_roots, ChebError, ChebSeries};
use crate::expr::{poly_detect, Expr, PolyInfo};
use crate::jet::{
    derivative_range, extrema_grid, nth_derivative, refine_extremum, signed_derivative_range, DerivativeRange, Goal,
    Jet, JetError, Univariate, DEFAULT_GRID,
};
use crate::remez::{grid_lp_minimax_oracle, remez, solve_dense, RemezError, RemezOptions, RemezResult};

pub const DEFAULT_VERDICT_TOL: f64 = 1e-6;
/// Seminorms below this mark `f` as a member of `Π_n`.
pub const DEGENERATE_SEMINORM: f64 = 1e-13;
/// Relative allowance for the grid oracle's discretisation when turning its
/// ratio into a strict-gap golden value.
pub const GOLDEN_MARGIN: f64 = 1e-4;
pub const GOLDEN_GRID: usize = 4001;

/// The transcendental functions used for the strict-inequality checks.
pub const TRANSCENDENTAL_FIXTURES: [&str; 5] = ["exp(x)", "sin(x)", "cos(x)", "exp(x) + x^3", "sin(2*x)"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SaturationError {
    #[error("seminorm has order {got}, expected {expected}")]
    OrderMismatch { expected: usize, got: usize },
    #[error("verdict tolerance {0} outside (0, 0.1]")]
    BadTolerance(f64),
    #[error("remez did not converge after {iterations} iterations")]
    NotConverged { iterations: usize, result: Box<RemezResult> },
    #[error("verdict {verdict:?} disagrees with polynomial detection {info:?} for n = {n}")]
    Inconsistent { verdict: Verdict, info: PolyInfo, n: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Remez(#[from] RemezError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Cheb(#[from] ChebError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Saturating,
    Strict,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub n: usize,
    pub e_n: f64,
    pub upper: f64,
    pub lower: f64,
    /// `None` when the seminorm vanishes.
    pub ratio: Option<f64>,
    pub verdict: Verdict,
    pub seminorm: DerivativeRange,
    /// Grid-based seminorms are lower estimates of the true sup.
    pub seminorm_estimated: bool,
    pub tolerance: f64,
}

/// `value / (2^n (n+1)!)`, through logarithms once `n > 20`.
fn over_scale(value: f64, n: usize) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    if n <= 20 {
        return value / scale_factor(n);
    }
    let log_fact: f64 = (2..=n + 1).map(|k| (k as f64).ln()).sum();
    (value.ln() - n as f64 * std::f64::consts::LN_2 - log_fact).exp()
}

/// `2^n (n+1)!`.
pub fn scale_factor(n: usize) -> f64 {
    2f64.powi(n as i32) * crate::jet::factorial(n + 1)
}

fn check_order(seminorm: &DerivativeRange, n: usize) -> Result<(), SaturationError> {
    if seminorm.order != n + 1 {
        return Err(SaturationError::OrderMismatch { expected: n + 1, got: seminorm.order });
    }
    Ok(())
}

pub fn upper_bound(seminorm: &DerivativeRange, n: usize) -> Result<f64, SaturationError> {
    check_order(seminorm, n)?;
    Ok(over_scale(seminorm.sup, n))
}

pub fn lower_bound(seminorm: &DerivativeRange, n: usize) -> Result<f64, SaturationError> {
    check_order(seminorm, n)?;
    Ok(over_scale(seminorm.min_abs, n))
}

/// `E_n 2^n (n+1)! / ||f^(n+1)||`, or `None` when the seminorm vanishes.
pub fn saturation_ratio(e_n: f64, seminorm: &DerivativeRange, n: usize) -> Result<Option<f64>, SaturationError> {
    check_order(seminorm, n)?;
    if seminorm.sup < DEGENERATE_SEMINORM {
        return Ok(None);
    }
    Ok(Some(e_n / over_scale(seminorm.sup, n)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    pub verdict_tol: f64,
    pub remez: RemezOptions,
    pub derivative_grid: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            verdict_tol: DEFAULT_VERDICT_TOL,
            remez: RemezOptions::default(),
            derivative_grid: DEFAULT_GRID,
        }
    }
}

pub fn theorem_verdict(f: &Expr, n: usize, verdict_tol: f64) -> Result<SaturationReport, SaturationError> {
    theorem_verdict_with(f, n, &VerdictOptions { verdict_tol, ..VerdictOptions::default() }).map(|(r, _)| r)
}

/// Full pipeline; also hands back the solver result for reporting.
pub fn theorem_verdict_with(
    f: &Expr,
    n: usize,
    opts: &VerdictOptions,
) -> Result<(SaturationReport, RemezResult), SaturationError> {
    let tol = opts.verdict_tol;
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(SaturationError::BadTolerance(tol));
    }
    let result = remez(f, n, &opts.remez)?;
    if !result.converged {
        return Err(SaturationError::NotConverged { iterations: result.iterations, result: Box::new(result) });
    }
    let seminorm = derivative_range(f, n + 1, opts.derivative_grid)?;
    let upper = upper_bound(&seminorm, n)?;
    let lower = lower_bound(&seminorm, n)?;
    let ratio = saturation_ratio(result.levelled_error, &seminorm, n)?;
    let verdict = match ratio {
        None => Verdict::Degenerate,
        Some(r) if (r - 1.0).abs() <= tol => Verdict::Saturating,
        Some(_) => Verdict::Strict,
    };

    let info = poly_detect(f);
    let expected = match info {
        PolyInfo { is_polynomial: true, degree } if degree <= n => Verdict::Degenerate,
        PolyInfo { is_polynomial: true, degree } if degree == n + 1 => Verdict::Saturating,
        _ => Verdict::Strict,
    };
    if verdict != expected {
        return Err(SaturationError::Inconsistent { verdict, info, n });
    }
    let exact = info.is_polynomial && info.degree <= n + 1;
    let report = SaturationReport {
        n,
        e_n: result.levelled_error,
        upper,
        lower,
        ratio,
        verdict,
        seminorm,
        seminorm_estimated: !exact,
        tolerance: tol,
    };
    Ok((report, result))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Report {
    pub n: usize,
    pub samples_checked: usize,
    pub range_min: f64,
    pub range_max: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub worst_violation: f64,
    pub slack: f64,
    pub contained: bool,
}

pub const MIN_PROP2_SAMPLES: usize = 16;
const ROOT_EXCLUSION: f64 = 1e-3;

/// Interpolates at the roots of `T_{n+1}` and checks that
/// `(f - q)(x) 2^n (n+1)! / T_{n+1}(x)` stays inside the signed range of
/// `f^(n+1)` on uniformly spaced sample points away from the roots.
pub fn prop2_containment<F: Univariate + ?Sized>(
    f: &F,
    n: usize,
    sample_count: usize,
) -> Result<Prop2Report, SaturationError> {
    if sample_count < MIN_PROP2_SAMPLES {
        return Err(SaturationError::Precondition(format!("sample_count {sample_count} below {MIN_PROP2_SAMPLES}")));
    }
    let roots = cheb_roots(n + 1)?;
    let samples: Vec<f64> = roots.points().iter().map(|&x| f.value(x)).collect();
    let q = fit_at_roots(&samples, n)?;
    let range = signed_derivative_range(f, n + 1, DEFAULT_GRID)?;
    let magnitude = range.min.abs().max(range.max.abs());
    let slack = 1e-9 * (range.max - range.min).max(magnitude).max(1.0);
    let scale = scale_factor(n);

    let mut checked = 0;
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for i in 0..sample_count {
        let x = -1.0 + 2.0 * i as f64 / (sample_count - 1) as f64;
        if roots.points().iter().any(|r| (x - r).abs() < ROOT_EXCLUSION) {
            continue;
        }
        let ratio = (f.value(x) - q.eval(x)) * scale / cheb_eval_unchecked(n + 1, x);
        checked += 1;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        worst = worst.max(range.min - ratio).max(ratio - range.max);
    }
    Ok(Prop2Report {
        n,
        samples_checked: checked,
        range_min: range.min,
        range_max: range.max,
        ratio_min,
        ratio_max,
        worst_violation: worst,
        slack,
        contained: worst <= slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub m: usize,
    pub max_value: f64,
    pub min_value: f64,
    pub tol: f64,
    pub both_signs: bool,
}

/// A function vanishing at `m + 1` points and not identically zero must have
/// an `m`-th derivative of both strict signs between the outer zeros.
pub fn lemma1_contrapositive_check<F: Univariate + ?Sized>(
    h: &F,
    zeros: &[f64],
    m: usize,
    grid_size: usize,
) -> Result<Lemma1Report, SaturationError> {
    if zeros.len() != m + 1 {
        return Err(SaturationError::Precondition(format!("need {} zeros, got {}", m + 1, zeros.len())));
    }
    if zeros.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SaturationError::Precondition("zeros must be strictly increasing".into()));
    }
    if grid_size < 2 {
        return Err(SaturationError::Precondition("grid_size must be at least 2".into()));
    }
    if let Some(z) = zeros.iter().find(|&&z| h.value(z).abs() > 1e-10) {
        return Err(SaturationError::Precondition(format!("h does not vanish at {z}")));
    }
    let (lo, hi) = (zeros[0], zeros[m]);
    let xs: Vec<f64> = (0..grid_size).map(|i| lo + (hi - lo) * i as f64 / (grid_size - 1) as f64).collect();
    let sup_h = xs.iter().fold(0.0, |acc: f64, &x| acc.max(h.value(x).abs()));
    if sup_h <= 1e-8 {
        return Err(SaturationError::Precondition("h is numerically zero on the interval".into()));
    }
    let d = xs.iter().map(|&x| nth_derivative(h, x, m)).collect::<Result<Vec<_>, _>>()?;
    let max_value = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_value = d.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * max_value.abs().max(min_value.abs());
    Ok(Lemma1Report { m, max_value, min_value, tol, both_signs: max_value > tol && min_value < -tol })
}

/// Nodes and values with the unique interpolant of degree `<= m` through them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaTwoInstance {
    pub m: usize,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub interpolant: ChebSeries,
    /// `|p^(m)|`, constant on the interval.
    pub interpolant_seminorm: f64,
}

impl LemmaTwoInstance {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self, SaturationError> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(SaturationError::Precondition("need at least two nodes, one value each".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) || nodes.iter().any(|z| z.abs() > 1.0) {
            return Err(SaturationError::Precondition("nodes must increase strictly inside [-1, 1]".into()));
        }
        let m = nodes.len() - 1;
        let a: Vec<Vec<f64>> = nodes.iter().map(|&z| (0..=m).map(|j| cheb_eval_unchecked(j, z)).collect()).collect();
        let coeffs = solve_dense(a, values.clone()).ok_or(RemezError::Singular)?;
        let interpolant = ChebSeries::new(coeffs)?;
        let interpolant_seminorm = constant_derivative(&interpolant, m).abs();
        let worst = nodes.iter().zip(&values).map(|(&z, &b)| (interpolant.eval(z) - b).abs()).fold(0.0, f64::max);
        if worst > 1e-10 {
            return Err(SaturationError::Precondition(format!("interpolant misses a node by {worst:e}")));
        }
        Ok(LemmaTwoInstance { m, nodes, values, interpolant, interpolant_seminorm })
    }

    pub fn node_polynomial(&self) -> Expr {
        node_polynomial(&self.nodes)
    }
}

/// `prod (x - z_i)`, the factor that keeps perturbations inside `G`.
pub fn node_polynomial(nodes: &[f64]) -> Expr {
    let factor = |z: f64| {
        if z < 0.0 {
            Expr::Add(Box::new(Expr::Var), Box::new(Expr::Const(-z)))
        } else {
            Expr::Sub(Box::new(Expr::Var), Box::new(Expr::Const(z)))
        }
    };
    let mut it = nodes.iter().map(|&z| factor(z));
    let first = it.next().expect("at least one node");
    it.fold(first, |acc, f| Expr::Mul(Box::new(acc), Box::new(f)))
}

/// `p + eps * w * prod (x - z_i)`.
struct Perturbed<'a> {
    base: &'a ChebSeries,
    eps: f64,
    shape: &'a Expr,
    nodes: &'a Expr,
}

impl Univariate for Perturbed<'_> {
    fn value(&self, x: f64) -> f64 {
        self.base.eval(x) + self.eps * self.shape.eval(x) * self.nodes.eval(x)
    }

    fn jet(&self, center: f64, order: usize) -> Jet {
        let bump = self.shape.jet(center, order).mul(&self.nodes.jet(center, order));
        self.base.jet(center, order).add(&bump.scale(self.eps))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub m: usize,
    pub interpolant_seminorm: f64,
    pub perturbations: usize,
    pub min_seminorm: f64,
    pub violations: usize,
    /// Every `eps * prod (x - z_i)` perturbation raised the seminorm strictly.
    pub strict_uniqueness: bool,
    pub passed: bool,
}

pub const DEFAULT_EPSILONS: [f64; 8] = [-1.0, -1e-1, -1e-2, -1e-3, 1e-3, 1e-2, 1e-1, 1.0];

/// Random smooth `w`: a polynomial of degree `<= 3` or `sin(a x + b)`.
pub fn random_shape(rng: &mut impl Rng) -> Expr {
    if rng.gen_bool(0.5) {
        let deg = rng.gen_range(0..=3);
        let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Expr::from_monomial(&coeffs)
    } else {
        let a: f64 = rng.gen_range(-3.0..=3.0);
        let b: f64 = rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI);
        let ax = Expr::from_monomial(&[b, a]);
        Expr::Sin(Box::new(ax))
    }
}

/// Perturbs the interpolant inside `G` and checks nothing beats its seminorm.
/// `perturbation_count` counts `(w, eps)` pairs; each random `w` is paired with
/// every epsilon in turn.
pub fn lemma2_minimality_check(
    instance: &LemmaTwoInstance,
    perturbation_count: usize,
    epsilon_grid: &[f64],
    rng: &mut impl Rng,
) -> Result<Lemma2Report, SaturationError> {
    if epsilon_grid.is_empty() {
        return Err(SaturationError::Precondition("empty epsilon grid".into()));
    }
    let m = instance.m;
    let (lo, hi) = (instance.nodes[0], instance.nodes[m]);
    let nodes = instance.node_polynomial();
    let target = instance.interpolant_seminorm;
    let xs = extrema_grid(DEFAULT_GRID, lo, hi);
    let base = constant_derivative(&instance.interpolant, m);

    let mut done = 0;
    let mut violations = 0;
    let mut min_seminorm = f64::INFINITY;
    while done < perturbation_count {
        let shape = random_shape(rng);
        let bump = Expr::Mul(Box::new(shape.clone()), Box::new(nodes.clone()));
        let bump_d = xs.iter().map(|&x| nth_derivative(&bump, x, m)).collect::<Result<Vec<_>, _>>()?;
        for &eps in epsilon_grid {
            if done == perturbation_count {
                break;
            }
            done += 1;
            let g = Perturbed { base: &instance.interpolant, eps, shape: &shape, nodes: &nodes };
            let abs: Vec<f64> = bump_d.iter().map(|d| (base + eps * d).abs()).collect();
            let (sup, _) =
                refine_extremum(&xs, &abs, |x| nth_derivative(&g, x, m).map_or(f64::NAN, f64::abs), Goal::Max);
            min_seminorm = min_seminorm.min(sup);
            if sup < target - 1e-9 {
                violations += 1;
            }
        }
    }

    let strict_uniqueness = [1e-3, -1e-3].iter().all(|&eps| {
        let one = Expr::Const(1.0);
        let g = Perturbed { base: &instance.interpolant, eps, shape: &one, nodes: &nodes };
        crate::jet::derivative_range_on(&g, m, DEFAULT_GRID, lo, hi).is_ok_and(|r| r.sup > target)
    });

    Ok(Lemma2Report {
        m,
        interpolant_seminorm: target,
        perturbations: done,
        min_seminorm,
        violations,
        strict_uniqueness,
        passed: violations == 0 && strict_uniqueness,
    })
}

/// `p^(m)` for a series of degree `<= m`, where it is constant.
fn constant_derivative(p: &ChebSeries, m: usize) -> f64 {
    let mut d = p.clone();
    for _ in 0..m {
        d = derive_series(&d);
    }
    d.coeff(0)
}

/// `k` distinct sorted points in [-1, 1] at least `gap` apart.
pub fn random_nodes(rng: &mut impl Rng, k: usize, gap: f64) -> Vec<f64> {
    loop {
        let mut z: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        z.sort_by(f64::total_cmp);
        if z.windows(2).all(|w| w[1] - w[0] >= gap) {
            return z;
        }
    }
}

/// A polynomial of degree `m + 1 ..= m + 3` with `m + 1` forced real zeros.
pub fn random_lemma1_instance(rng: &mut impl Rng, m: usize) -> (Expr, Vec<f64>) {
    let zeros = random_nodes(rng, m + 1, 0.05);
    let extra = rng.gen_range(0..=2);
    let mut w: Vec<f64> = (0..=extra).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    if w[extra].abs() < 0.1 {
        w[extra] = 0.1f64.copysign(w[extra]);
    }
    let h = Expr::Mul(Box::new(Expr::from_monomial(&w)), Box::new(node_polynomial(&zeros)));
    (h, zeros)
}

pub fn random_lemma2_instance(rng: &mut impl Rng, m: usize) -> Result<LemmaTwoInstance, SaturationError> {
    let nodes = random_nodes(rng, m + 1, 0.1);
    let values: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    LemmaTwoInstance::new(nodes, values)
}

/// One golden-value record for the strict-inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub f: String,
    pub n: usize,
    pub grid_size: usize,
    pub lambda_grid: f64,
    pub seminorm_sup: f64,
    pub ratio_grid: f64,
    /// Remez ratios must satisfy `ratio <= 1 - delta`.
    pub delta: f64,
}

pub fn golden_record(text: &str, f: &Expr, n: usize, grid_size: usize) -> Result<GoldenRecord, SaturationError> {
    let (_, lambda_grid) = grid_lp_minimax_oracle(f, n, grid_size)?;
    let seminorm = derivative_range(f, n + 1, DEFAULT_GRID)?;
    let ratio_grid = lambda_grid / over_scale(seminorm.sup, n);
    Ok(GoldenRecord {
        f: text.to_string(),
        n,
        grid_size,
        lambda_grid,
        seminorm_sup: seminorm.sup,
        ratio_grid,
        delta: 1.0 - ratio_grid * (1.0 + GOLDEN_MARGIN),
    })
}

/// Default fixture pairs: the transcendental set for `n = 1..=8`, then
/// `x^(n+1)` for each `n`.
pub fn fixture_pairs() -> Vec<(String, usize)> {
    let mut out: Vec<(String, usize)> =
        TRANSCENDENTAL_FIXTURES.iter().flat_map(|f| (1..=8).map(move |n| (f.to_string(), n))).collect();
    out.extend((1..=8).map(|n| (format!("x^{}", n + 1), n)));
    out
}
