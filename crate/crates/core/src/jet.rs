//! Truncated Taylor arithmetic for exact high-order derivatives.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb::ChebSeries;
use crate::expr::Expr;

/// Largest order whose factorial is a finite `f64`.
pub const MAX_ORDER: usize = 170;

/// Default number of grid points for derivative ranges.
pub const DEFAULT_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("derivative of order {0} is out of range (k! overflows beyond k = 170)")]
    Range(usize),
    #[error("grid size {got} is below the minimum of {min}")]
    GridTooSmall { got: usize, min: usize },
    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
}

/// Taylor coefficients `t_j = f^(j)(center) / j!` for `j = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: f64,
    taylor: Vec<f64>,
}

impl Jet {
    pub fn constant(c: f64, center: f64, order: usize) -> Self {
        let mut taylor = vec![0.0; order + 1];
        taylor[0] = c;
        Jet { center, taylor }
    }

    /// The identity function lifted at `center`.
    pub fn variable(center: f64, order: usize) -> Self {
        let mut taylor = vec![0.0; order + 1];
        taylor[0] = center;
        if order >= 1 {
            taylor[1] = 1.0;
        }
        Jet { center, taylor }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.taylor.len() - 1
    }

    pub fn taylor(&self) -> &[f64] {
        &self.taylor
    }

    pub fn value(&self) -> f64 {
        self.taylor[0]
    }

    /// `f^(k)(center)`, or `None` past the truncation order.
    pub fn derivative(&self, k: usize) -> Option<f64> {
        self.taylor.get(k).map(|t| t * factorial(k))
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet { center: self.center, taylor: self.taylor.iter().map(|&t| f(t)).collect() }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let taylor = self.taylor.iter().zip(&other.taylor).map(|(&a, &b)| f(a, b)).collect();
        Jet { center: self.center, taylor }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        self.map(|a| -a)
    }

    pub fn scale(&self, alpha: f64) -> Jet {
        self.map(|a| alpha * a)
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.taylor.len();
        let (a, b) = (&self.taylor, &other.taylor);
        let taylor = (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect();
        Jet { center: self.center, taylor }
    }

    pub fn powi(&self, e: u32) -> Jet {
        let mut result = Jet::constant(1.0, self.center, self.order());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn exp(&self) -> Jet {
        let u = &self.taylor;
        let mut out = vec![0.0; u.len()];
        out[0] = u[0].exp();
        for k in 1..u.len() {
            let s: f64 = (1..=k).map(|j| j as f64 * u[j] * out[k - j]).sum();
            out[k] = s / k as f64;
        }
        Jet { center: self.center, taylor: out }
    }

    /// `(sin u, cos u)` by the coupled recurrence.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let u = &self.taylor;
        let len = u.len();
        let mut s = vec![0.0; len];
        let mut c = vec![0.0; len];
        s[0] = u[0].sin();
        c[0] = u[0].cos();
        for k in 1..len {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let w = j as f64 * u[j];
                ds += w * c[k - j];
                dc += w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = -dc / k as f64;
        }
        (Jet { center: self.center, taylor: s }, Jet { center: self.center, taylor: c })
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// A function of one real variable with values and Taylor jets.
pub trait Univariate {
    fn value(&self, x: f64) -> f64;
    fn jet(&self, center: f64, order: usize) -> Jet;
}

impl Univariate for Expr {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn jet(&self, center: f64, order: usize) -> Jet {
        eval_jet(self, center, order)
    }
}

impl Univariate for ChebSeries {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    // Clenshaw's recurrence run over jets.
    fn jet(&self, center: f64, order: usize) -> Jet {
        let x = Jet::variable(center, order);
        let c = self.coeffs();
        let mut b1 = Jet::constant(0.0, center, order);
        let mut b2 = b1.clone();
        for &ck in c.iter().skip(1).rev() {
            let mut b0 = x.mul(&b1).scale(2.0).sub(&b2);
            b0.taylor[0] += ck;
            b2 = b1;
            b1 = b0;
        }
        match c.first() {
            Some(&c0) => {
                let mut out = x.mul(&b1).sub(&b2);
                out.taylor[0] += c0;
                out
            }
            None => b1,
        }
    }
}

impl<T: Univariate + ?Sized> Univariate for &T {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }

    fn jet(&self, center: f64, order: usize) -> Jet {
        (**self).jet(center, order)
    }
}

pub fn eval_jet(ast: &Expr, center: f64, order: usize) -> Jet {
    match ast {
        Expr::Var => Jet::variable(center, order),
        Expr::Const(c) => Jet::constant(*c, center, order),
        Expr::Add(a, b) => eval_jet(a, center, order).add(&eval_jet(b, center, order)),
        Expr::Sub(a, b) => eval_jet(a, center, order).sub(&eval_jet(b, center, order)),
        Expr::Mul(a, b) => eval_jet(a, center, order).mul(&eval_jet(b, center, order)),
        Expr::Neg(a) => eval_jet(a, center, order).neg(),
        Expr::PowInt(a, e) => eval_jet(a, center, order).powi(*e),
        Expr::Sin(a) => eval_jet(a, center, order).sin_cos().0,
        Expr::Cos(a) => eval_jet(a, center, order).sin_cos().1,
        Expr::Exp(a) => eval_jet(a, center, order).exp(),
    }
}

/// `f^(k)(x)` for any [`Univariate`].
pub fn nth_derivative<F: Univariate + ?Sized>(f: &F, x: f64, k: usize) -> Result<f64, JetError> {
    if k > MAX_ORDER {
        return Err(JetError::Range(k));
    }
    let t = f.jet(x, k).taylor[k];
    let v = t * factorial(k);
    if v.is_finite() || !t.is_finite() {
        Ok(v)
    } else {
        Err(JetError::Range(k))
    }
}

pub fn derivative_at(ast: &Expr, x: f64, k: usize) -> Result<f64, JetError> {
    nth_derivative(ast, x, k)
}

/// Extremes of `|f^(k)|` over [-1, 1] (or a sub-interval).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRange {
    pub order: usize,
    pub min_abs: f64,
    pub sup: f64,
    pub argmin: f64,
    pub argmax: f64,
}

/// Signed extremes of `f^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedRange {
    pub order: usize,
    pub min: f64,
    pub max: f64,
}

pub const MIN_RANGE_GRID: usize = 64;

pub fn derivative_range(ast: &Expr, k: usize, grid_size: usize) -> Result<DerivativeRange, JetError> {
    derivative_range_on(ast, k, grid_size, -1.0, 1.0)
}

/// Samples `f^(k)` on a Chebyshev-extrema grid over `[lo, hi]` and refines each
/// local extremum of `|f^(k)|` by golden-section search.
pub fn derivative_range_on<F: Univariate + ?Sized>(
    f: &F,
    k: usize,
    grid_size: usize,
    lo: f64,
    hi: f64,
) -> Result<DerivativeRange, JetError> {
    let (xs, vals) = sample_derivative(f, k, grid_size, lo, hi)?;
    let d = |x: f64| nth_derivative(f, x, k).unwrap_or(f64::NAN);
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let (sup, argmax) = refine_extremum(&xs, &abs, |x| d(x).abs(), Goal::Max);
    let (min_abs, argmin) = refine_extremum(&xs, &abs, |x| d(x).abs(), Goal::Min);
    Ok(DerivativeRange { order: k, min_abs, sup, argmin, argmax })
}

pub fn signed_derivative_range<F: Univariate + ?Sized>(
    f: &F,
    k: usize,
    grid_size: usize,
) -> Result<SignedRange, JetError> {
    let (xs, vals) = sample_derivative(f, k, grid_size, -1.0, 1.0)?;
    let d = |x: f64| nth_derivative(f, x, k).unwrap_or(f64::NAN);
    let (max, _) = refine_extremum(&xs, &vals, d, Goal::Max);
    let (min, _) = refine_extremum(&xs, &vals, d, Goal::Min);
    Ok(SignedRange { order: k, min, max })
}

/// Chebyshev-extrema grid of `size` points mapped onto `[lo, hi]`.
pub(crate) fn extrema_grid(size: usize, lo: f64, hi: f64) -> Vec<f64> {
    let nodes = crate::cheb::cheb_extrema(size - 1).expect("size >= 2");
    let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
    let mut xs: Vec<f64> = nodes.points().iter().map(|&t| mid + half * t).collect();
    xs[0] = lo;
    xs[size - 1] = hi;
    xs
}

fn sample_derivative<F: Univariate + ?Sized>(
    f: &F,
    k: usize,
    grid_size: usize,
    lo: f64,
    hi: f64,
) -> Result<(Vec<f64>, Vec<f64>), JetError> {
    if k > MAX_ORDER {
        return Err(JetError::Range(k));
    }
    if grid_size < MIN_RANGE_GRID {
        return Err(JetError::GridTooSmall { got: grid_size, min: MIN_RANGE_GRID });
    }
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(JetError::EmptyInterval(lo, hi));
    }
    let xs = extrema_grid(grid_size, lo, hi);
    let vals = xs.iter().map(|&x| nth_derivative(f, x, k)).collect::<Result<Vec<_>, _>>()?;
    Ok((xs, vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    Max,
    Min,
}

/// Best grid value plus golden-section refinement of every strict local
/// extremum (endpoints included) on its bracketing grid interval.
pub(crate) fn refine_extremum(xs: &[f64], vals: &[f64], g: impl Fn(f64) -> f64, goal: Goal) -> (f64, f64) {
    let better = |a: f64, b: f64| match goal {
        Goal::Max => a > b,
        Goal::Min => a < b,
    };
    let at_least = |a: f64, b: f64| a == b || better(a, b);
    let n = xs.len();
    let mut best = (vals[0], xs[0]);
    for i in 1..n {
        if better(vals[i], best.0) {
            best = (vals[i], xs[i]);
        }
    }
    for i in 0..n {
        let left = if i > 0 { Some(vals[i - 1]) } else { None };
        let right = if i + 1 < n { Some(vals[i + 1]) } else { None };
        let ok_l = left.is_none_or(|l| at_least(vals[i], l));
        let ok_r = right.is_none_or(|r| at_least(vals[i], r));
        let strict = left.is_some_and(|l| better(vals[i], l)) || right.is_some_and(|r| better(vals[i], r));
        if !(ok_l && ok_r && strict) {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let (x, v) = golden_section(&g, a, b, 1e-12, goal);
        if better(v, best.0) {
            best = (v, x);
        }
    }
    best
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

pub(crate) fn golden_section(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64, goal: Goal) -> (f64, f64) {
    let key = |v: f64| match goal {
        Goal::Max => -v,
        Goal::Min => v,
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = key(g(c));
    let mut fd = key(g(d));
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = key(g(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = key(g(d));
        }
    }
    let x = if fc < fd { c } else { d };
    (x, g(x))
}
