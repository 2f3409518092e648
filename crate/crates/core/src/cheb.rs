//! Chebyshev machinery on [-1, 1]: nodes, evaluation, interpolation at the
//! roots of `T_k`, differentiation and sup norms.
//!
//! Every polynomial in this crate is held in the Chebyshev basis. The monomial
//! form only appears when a report is written out.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trailing coefficients with magnitude at or below this are dropped.
pub const TRIM_THRESHOLD: f64 = 1e-14;

/// Slack allowed outside [-1, 1] before an evaluation is rejected.
pub const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChebError {
    #[error("point {0} lies outside [-1, 1]")]
    Domain(f64),
    #[error("coefficient {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("node set must be strictly increasing and inside [-1, 1]")]
    BadNodes,
    #[error("{0} must be positive")]
    ZeroSize(&'static str),
}

/// A polynomial `sum c_k T_k(x)`.
///
/// The coefficient list is trimmed so that either it is empty (the zero
/// series) or its last entry exceeds [`TRIM_THRESHOLD`] in magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChebSeries {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ChebSeries {
    type Error = ChebError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        ChebSeries::new(coeffs)
    }
}

impl From<ChebSeries> for Vec<f64> {
    fn from(s: ChebSeries) -> Self {
        s.coeffs
    }
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, ChebError> {
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(ChebError::NonFinite { index, value });
        }
        let mut s = ChebSeries { coeffs };
        s.trim(TRIM_THRESHOLD);
        Ok(s)
    }

    pub fn zero() -> Self {
        ChebSeries { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        ChebSeries::new(vec![c]).expect("finite constant")
    }

    /// `T_k` itself.
    pub fn basis(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        ChebSeries { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the last retained coefficient; 0 for the zero series.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of `T_k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    fn trim(&mut self, threshold: f64) {
        while matches!(self.coeffs.last(), Some(c) if c.abs() <= threshold) {
            self.coeffs.pop();
        }
    }

    /// Drops trailing coefficients below `rel * max(1, max |c_k|)`.
    pub fn trimmed_relative(&self, rel: f64) -> Self {
        let scale = self.coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        let mut s = self.clone();
        s.trim(rel * scale);
        s
    }

    /// Clenshaw evaluation without the domain check.
    pub fn eval(&self, x: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        match self.coeffs.first() {
            Some(&c0) => x * b1 - b2 + c0,
            None => 0.0,
        }
    }

    pub fn scale(&self, alpha: f64) -> Self {
        ChebSeries::new(self.coeffs.iter().map(|c| alpha * c).collect()).expect("finite scale")
    }

    pub fn add(&self, other: &ChebSeries) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) + other.coeff(k)).collect();
        ChebSeries::new(coeffs).expect("finite sum")
    }

    /// Monomial coefficients `a_0..a_d` with `p(x) = sum a_k x^k`.
    pub fn to_monomial(&self) -> Vec<f64> {
        let d = self.coeffs.len();
        if d == 0 {
            return Vec::new();
        }
        let mut out = vec![0.0; d];
        // Monomial forms of T_{k-1} and T_k, advanced by T_{k+1} = 2x T_k - T_{k-1}.
        let mut prev = vec![0.0; d];
        let mut cur = vec![0.0; d];
        prev[0] = 1.0;
        if d > 1 {
            cur[1] = 1.0;
        }
        for (k, &c) in self.coeffs.iter().enumerate() {
            let tk = match k {
                0 => &prev,
                _ => &cur,
            };
            for (o, t) in out.iter_mut().zip(tk) {
                *o += c * t;
            }
            if k >= 1 && k + 1 < d {
                let mut next = vec![0.0; d];
                for j in 0..d - 1 {
                    next[j + 1] += 2.0 * cur[j];
                }
                for j in 0..d {
                    next[j] -= prev[j];
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Roots,
    Extrema,
    Custom,
}

/// Strictly increasing points of [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    points: Vec<f64>,
    kind: NodeKind,
}

impl NodeSet {
    pub fn custom(points: Vec<f64>) -> Result<Self, ChebError> {
        let inside = points.iter().all(|x| x.is_finite() && x.abs() <= 1.0);
        let increasing = points.windows(2).all(|w| w[0] < w[1]);
        if !inside || !increasing {
            return Err(ChebError::BadNodes);
        }
        Ok(NodeSet { points, kind: NodeKind::Custom })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }
}

/// `T_k(x)` by the three-term recurrence.
pub fn cheb_eval(k: usize, x: f64) -> Result<f64, ChebError> {
    check_domain(x)?;
    Ok(cheb_eval_unchecked(k, x))
}

pub(crate) fn cheb_eval_unchecked(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..k {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn check_domain(x: f64) -> Result<(), ChebError> {
    if x.is_nan() || x.abs() > 1.0 + DOMAIN_SLACK {
        Err(ChebError::Domain(x))
    } else {
        Ok(())
    }
}

// Pairs point i with point len-1-i so that the set is exactly symmetric.
fn symmetrize(raw: &[f64]) -> Vec<f64> {
    let len = raw.len();
    (0..len).map(|i| (raw[i] - raw[len - 1 - i]) / 2.0).collect()
}

/// Roots of `T_k`, ascending.
pub fn cheb_roots(k: usize) -> Result<NodeSet, ChebError> {
    if k == 0 {
        return Err(ChebError::ZeroSize("k"));
    }
    let raw: Vec<f64> = (0..k).rev().map(|i| ((2 * i + 1) as f64 * PI / (2 * k) as f64).cos()).collect();
    Ok(NodeSet { points: symmetrize(&raw), kind: NodeKind::Roots })
}

/// The `k + 1` alternation points `cos(j pi / k)` of `T_k`, ascending.
pub fn cheb_extrema(k: usize) -> Result<NodeSet, ChebError> {
    if k == 0 {
        return Err(ChebError::ZeroSize("k"));
    }
    let raw: Vec<f64> = (0..=k).rev().map(|j| (j as f64 * PI / k as f64).cos()).collect();
    Ok(NodeSet { points: symmetrize(&raw), kind: NodeKind::Extrema })
}

/// Degree-`n` interpolant of samples taken at `cheb_roots(n + 1)`.
pub fn fit_at_roots(samples: &[f64], n: usize) -> Result<ChebSeries, ChebError> {
    if samples.len() != n + 1 {
        return Err(ChebError::LengthMismatch { expected: n + 1, got: samples.len() });
    }
    let roots = cheb_roots(n + 1)?;
    let inv = 1.0 / (n + 1) as f64;
    let coeffs = (0..=n)
        .map(|j| {
            let weight = if j == 0 { inv } else { 2.0 * inv };
            let sum: f64 = roots.points().iter().zip(samples).map(|(&x, &f)| f * cheb_eval_unchecked(j, x)).sum();
            weight * sum
        })
        .collect();
    ChebSeries::new(coeffs)
}

/// Checked Clenshaw evaluation.
pub fn clenshaw(series: &ChebSeries, x: f64) -> Result<f64, ChebError> {
    check_domain(x)?;
    Ok(series.eval(x))
}

/// Chebyshev coefficients of the derivative.
pub fn derive_series(series: &ChebSeries) -> ChebSeries {
    let c = series.coeffs();
    let d = c.len();
    if d <= 1 {
        return ChebSeries::zero();
    }
    // d'_{k-1} = d'_{k+1} + 2k c_k, then halve d'_0.
    let mut out = vec![0.0; d - 1];
    for k in (1..d).rev() {
        let above = out.get(k + 1).copied().unwrap_or(0.0);
        out[k - 1] = above + 2.0 * k as f64 * c[k];
    }
    out[0] /= 2.0;
    ChebSeries::new(out).expect("finite derivative")
}

/// Max of `|series|` over a Chebyshev-extrema grid with parabolic refinement
/// around each interior local maximum.
pub fn series_sup_norm(series: &ChebSeries, grid_size: usize) -> Result<f64, ChebError> {
    if grid_size < 2 {
        return Err(ChebError::ZeroSize("grid_size - 1"));
    }
    if series.is_zero() {
        return Ok(0.0);
    }
    let grid = cheb_extrema(grid_size - 1)?;
    let xs = grid.points();
    let vals: Vec<f64> = xs.iter().map(|&x| series.eval(x).abs()).collect();
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for i in 1..xs.len() - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > vals[i - 1].min(vals[i + 1]) {
            best = best.max(parabolic_peak(series, xs[i - 1], xs[i], xs[i + 1]));
        }
    }
    Ok(best)
}

// Successive parabolic interpolation of |s| inside [a, c], starting from the
// triple (a, b, c).
fn parabolic_peak(s: &ChebSeries, a: f64, b: f64, c: f64) -> f64 {
    let f = |x: f64| s.eval(x).abs();
    let (lo, hi) = (a, c);
    let mut pts = [(a, f(a)), (b, f(b)), (c, f(c))];
    let mut best = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    for _ in 0..4 {
        let [(x0, y0), (x1, y1), (x2, y2)] = pts;
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if den == 0.0 {
            break;
        }
        let v = x1 - 0.5 * num / den;
        if !(v > lo && v < hi) || v == x1 {
            break;
        }
        let fv = f(v);
        best = best.max(fv);
        let mut all = [(x0, y0), (x1, y1), (x2, y2), (v, fv)];
        all.sort_by(|p, q| p.0.total_cmp(&q.0));
        // keep the best point with its two neighbours
        let imax = (0..4).max_by(|&i, &j| all[i].1.total_cmp(&all[j].1)).unwrap();
        let start = imax.saturating_sub(1).min(1);
        pts = [all[start], all[start + 1], all[start + 2]];
    }
    best
}
