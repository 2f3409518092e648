//! Minimax approximation from `Π_n` by the Remez exchange algorithm, with an
//! equioscillation certificate for the result.

mod oracle;

pub use oracle::grid_lp_minimax_oracle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb::{cheb_eval_unchecked, cheb_extrema, ChebError, ChebSeries, NodeSet};
use crate::jet::{extrema_grid, golden_section, Goal, Univariate};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;
/// Grid used to recompute the sup norm when certifying.
pub const CERTIFY_GRID: usize = 4096;
/// Largest degree the solver is documented for.
pub const MAX_DEGREE: usize = 12;

const DEGENERATE_REL: f64 = 1e-13;
// Gap below which the residual is indistinguishable from rounding in f - p.
const NOISE_ULPS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RemezError {
    #[error("reference must hold {expected} points, got {got}")]
    ReferenceSize { expected: usize, got: usize },
    #[error("reference points must be strictly increasing inside [-1, 1]")]
    BadReference,
    #[error("levelled system is singular")]
    Singular,
    #[error("grid size {got} is below the minimum of {min}")]
    GridTooSmall { got: usize, min: usize },
    #[error("result has not converged")]
    NotConverged,
    #[error("equioscillation check failed: deviation {max_deviation:e} exceeds {limit:e}")]
    CertificationFailed { max_deviation: f64, limit: f64 },
    #[error(transparent)]
    Cheb(#[from] ChebError),
}

/// `n + 2` strictly increasing points of [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ReferenceSet {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ReferenceSet {
    type Error = RemezError;

    fn try_from(points: Vec<f64>) -> Result<Self, Self::Error> {
        ReferenceSet::new(points)
    }
}

impl From<ReferenceSet> for Vec<f64> {
    fn from(r: ReferenceSet) -> Self {
        r.points
    }
}

impl ReferenceSet {
    pub fn new(points: Vec<f64>) -> Result<Self, RemezError> {
        let inside = points.iter().all(|x| x.is_finite() && x.abs() <= 1.0);
        if points.len() < 2 || !inside || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RemezError::BadReference);
        }
        Ok(ReferenceSet { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Degree served by this reference.
    pub fn degree(&self) -> usize {
        self.points.len() - 2
    }
}

/// Output of one levelled solve: `f(z_i) - p(z_i) = sign * (-1)^i * lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct Levelled {
    pub poly: ChebSeries,
    pub lambda: f64,
    pub sign: i8,
}

/// One iteration of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezStep {
    pub levelled_error: f64,
    /// Smallest `|f - p|` on the reference that produced this step.
    pub reference_min: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezResult {
    pub n: usize,
    pub poly: ChebSeries,
    pub levelled_error: f64,
    pub sup_norm: f64,
    pub reference: ReferenceSet,
    pub sign: i8,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub trace: Vec<RemezStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquioscillationCertificate {
    pub points: ReferenceSet,
    pub sign: i8,
    pub sup_norm: f64,
    pub max_deviation: f64,
    pub degenerate: bool,
}

/// Local extrema of a residual, ascending, with the residual at each.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualExtrema {
    pub nodes: NodeSet,
    pub values: Vec<f64>,
    pub degenerate: bool,
}

impl ResidualExtrema {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn global_max(&self) -> (f64, f64) {
        let i = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].abs().total_cmp(&self.values[b].abs()))
            .expect("nonempty extrema");
        (self.nodes.points()[i], self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeOutcome {
    pub reference: ReferenceSet,
    pub stalled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Residual search grid; `None` picks a size from the degree.
    pub grid_size: Option<usize>,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, grid_size: None }
    }
}

impl RemezOptions {
    fn grid_for(&self, n: usize) -> usize {
        self.grid_size.unwrap_or_else(|| (64 * (n + 2)).max(2048))
    }
}

pub fn initial_reference(n: usize) -> ReferenceSet {
    let nodes = cheb_extrema(n + 1).expect("n + 1 >= 1");
    ReferenceSet { points: nodes.into_points() }
}

/// Dense solve with partial pivoting. `None` when a pivot vanishes.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot = &upper[col];
        for (i, r) in lower.iter_mut().enumerate() {
            let factor = r[col] / pivot[col];
            if factor == 0.0 {
                continue;
            }
            for (t, p) in r[col..m].iter_mut().zip(&pivot[col..m]) {
                *t -= factor * p;
            }
            b[col + 1 + i] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Solves `p(z_i) + (-1)^i h = f(z_i)` for the Chebyshev coefficients of `p`
/// and the signed level `h`.
pub fn solve_levelled<F: Univariate + ?Sized>(
    f: &F,
    reference: &ReferenceSet,
    n: usize,
) -> Result<Levelled, RemezError> {
    let z = reference.points();
    if z.len() != n + 2 {
        return Err(RemezError::ReferenceSize { expected: n + 2, got: z.len() });
    }
    let a: Vec<Vec<f64>> = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row: Vec<f64> = (0..=n).map(|j| cheb_eval_unchecked(j, x)).collect();
            row.push(if i % 2 == 0 { 1.0 } else { -1.0 });
            row
        })
        .collect();
    let b: Vec<f64> = z.iter().map(|&x| f.value(x)).collect();
    let mut sol = solve_dense(a, b).ok_or(RemezError::Singular)?;
    let h = sol.pop().expect("n + 2 unknowns");
    let poly = ChebSeries::new(sol)?;
    let sign = if h < 0.0 { -1 } else { 1 };
    Ok(Levelled { poly, lambda: h.abs(), sign })
}

fn residual_scale<F: Univariate + ?Sized>(f: &F, xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, &x| m.max(f.value(x).abs()))
}

/// All local extrema of `f - p` on [-1, 1], endpoints included, each interior
/// one refined by golden-section search.
pub fn find_residual_extrema<F: Univariate + ?Sized>(
    f: &F,
    p: &ChebSeries,
    grid_size: usize,
) -> Result<ResidualExtrema, RemezError> {
    let min = 8 * (p.degree() + 2);
    if grid_size < min {
        return Err(RemezError::GridTooSmall { got: grid_size, min });
    }
    let r = |x: f64| f.value(x) - p.eval(x);
    let xs = extrema_grid(grid_size, -1.0, 1.0);
    let vals: Vec<f64> = xs.iter().map(|&x| r(x)).collect();
    let scale = residual_scale(f, &xs);
    let grid_sup = vals.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let last = xs.len() - 1;
    if grid_sup < DEGENERATE_REL * (1.0 + scale) {
        let nodes = NodeSet::custom(vec![-1.0, 1.0])?;
        return Ok(ResidualExtrema { nodes, values: vec![vals[0], vals[last]], degenerate: true });
    }

    let mut found = vec![(xs[0], vals[0])];
    for i in 1..last {
        let dl = vals[i] - vals[i - 1];
        let dr = vals[i + 1] - vals[i];
        let goal = if dl > 0.0 && dr <= 0.0 {
            Goal::Max
        } else if dl < 0.0 && dr >= 0.0 {
            Goal::Min
        } else {
            continue;
        };
        let (x, v) = golden_section(r, xs[i - 1], xs[i + 1], 1e-13, goal);
        let keep = match goal {
            Goal::Max => v >= vals[i],
            Goal::Min => v <= vals[i],
        };
        found.push(if keep { (x, v) } else { (xs[i], vals[i]) });
    }
    found.push((xs[last], vals[last]));
    found.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points: Vec<f64> = Vec::with_capacity(found.len());
    let mut values: Vec<f64> = Vec::with_capacity(found.len());
    for (x, v) in found {
        match points.last() {
            Some(&px) if x - px <= 1e-13 => {
                // endpoints win ties, otherwise the larger magnitude
                let take = x == 1.0 || (px != -1.0 && v.abs() > values.last().expect("paired").abs());
                if take {
                    *points.last_mut().expect("paired") = x;
                    *values.last_mut().expect("paired") = v;
                }
            }
            _ => {
                points.push(x);
                values.push(v);
            }
        }
    }
    let nodes = NodeSet::custom(points)?;
    Ok(ResidualExtrema { nodes, values, degenerate: false })
}

/// Keeps `n + 2` sign-alternating extrema, always including one of largest
/// magnitude. Stalls when fewer than `n + 2` alternating extrema exist.
pub fn exchange(reference: &ReferenceSet, extrema: &ResidualExtrema) -> ExchangeOutcome {
    let want = reference.len();
    let stall = || ExchangeOutcome { reference: reference.clone(), stalled: true };

    // Collapse runs of equal sign to their largest member.
    let mut alt: Vec<(f64, f64)> = Vec::new();
    for (&x, &v) in extrema.nodes.points().iter().zip(&extrema.values) {
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        match alt.last_mut() {
            Some(last) if (last.1 > 0.0) == (v > 0.0) => {
                if v.abs() > last.1.abs() {
                    *last = (x, v);
                }
            }
            _ => alt.push((x, v)),
        }
    }
    if alt.len() < want {
        return stall();
    }
    while alt.len() > want {
        let excess = alt.len() - want;
        let last = alt.len() - 1;
        if excess == 1 {
            if alt[0].1.abs() < alt[last].1.abs() {
                alt.remove(0);
            } else {
                alt.pop();
            }
            continue;
        }
        let imin = (0..alt.len()).min_by(|&a, &b| alt[a].1.abs().total_cmp(&alt[b].1.abs())).expect("nonempty");
        if imin == 0 || imin == last {
            alt.remove(imin);
        } else {
            // Dropping a neighbouring pair keeps the signs alternating.
            let partner = if alt[imin - 1].1.abs() < alt[imin + 1].1.abs() { imin - 1 } else { imin + 1 };
            let lo = imin.min(partner);
            alt.drain(lo..lo + 2);
        }
    }
    match ReferenceSet::new(alt.into_iter().map(|p| p.0).collect()) {
        Ok(reference) => ExchangeOutcome { reference, stalled: false },
        Err(_) => stall(),
    }
}

/// Classic single-point exchange: bring `x_new` into the reference while
/// keeping signs alternating. `None` if the point is already present.
pub fn single_exchange(
    reference: &ReferenceSet,
    residual: impl Fn(f64) -> f64,
    x_new: f64,
    r_new: f64,
) -> Option<ReferenceSet> {
    let z = reference.points();
    if r_new == 0.0 || z.iter().any(|&p| (p - x_new).abs() <= 1e-14) {
        return None;
    }
    let same = |x: f64| (residual(x) > 0.0) == (r_new > 0.0);
    let m = z.len();
    let pos = z.partition_point(|&p| p < x_new);
    let mut out = z.to_vec();
    if pos == 0 {
        if same(z[0]) {
            out[0] = x_new;
        } else {
            out.insert(0, x_new);
            out.pop();
        }
    } else if pos == m {
        if same(z[m - 1]) {
            out[m - 1] = x_new;
        } else {
            out.push(x_new);
            out.remove(0);
        }
    } else if same(z[pos - 1]) {
        out[pos - 1] = x_new;
    } else {
        out[pos] = x_new;
    }
    ReferenceSet::new(out).ok().filter(|r| r != reference)
}

pub fn remez<F: Univariate + ?Sized>(f: &F, n: usize, opts: &RemezOptions) -> Result<RemezResult, RemezError> {
    let grid = opts.grid_for(n);
    let noise = NOISE_ULPS * f64::EPSILON * (1.0 + residual_scale(f, &extrema_grid(grid, -1.0, 1.0)));
    let mut reference = initial_reference(n);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let lev = solve_levelled(f, &reference, n)?;
        let ext = find_residual_extrema(f, &lev.poly, grid)?;
        let sup = ext.sup_norm().max(lev.lambda);
        let reference_min =
            reference.points().iter().map(|&z| (f.value(z) - lev.poly.eval(z)).abs()).fold(f64::INFINITY, f64::min);
        trace.push(RemezStep { levelled_error: lev.lambda, reference_min, sup_norm: sup });

        let finish = |converged: bool, degenerate: bool, reference: ReferenceSet, trace: Vec<RemezStep>| RemezResult {
            n,
            poly: lev.poly.clone(),
            levelled_error: if degenerate { 0.0 } else { lev.lambda },
            sup_norm: sup,
            reference,
            sign: lev.sign,
            iterations,
            converged,
            degenerate,
            trace,
        };
        if ext.degenerate {
            return Ok(finish(true, true, reference, trace));
        }
        let gap = sup - lev.lambda;
        let converged = gap <= opts.tol * lev.lambda.max(1e-300) || gap <= noise;
        if converged || iterations >= opts.max_iter {
            return Ok(finish(converged, false, reference, trace));
        }

        let out = exchange(&reference, &ext);
        let next = if out.stalled || out.reference == reference {
            let (x, v) = ext.global_max();
            single_exchange(&reference, |z| f.value(z) - lev.poly.eval(z), x, v)
        } else {
            Some(out.reference)
        };
        match next {
            Some(r) => reference = r,
            None => return Ok(finish(false, false, reference, trace)),
        }
    }
}

/// Re-checks alternation of a converged result against a fresh sup norm.
pub fn certify_equioscillation<F: Univariate + ?Sized>(
    f: &F,
    result: &RemezResult,
) -> Result<EquioscillationCertificate, RemezError> {
    if !result.converged {
        return Err(RemezError::NotConverged);
    }
    let ext = find_residual_extrema(f, &result.poly, CERTIFY_GRID)?;
    let sup_norm = ext.sup_norm();
    if result.degenerate {
        return Ok(EquioscillationCertificate {
            points: result.reference.clone(),
            sign: result.sign,
            sup_norm,
            max_deviation: sup_norm,
            degenerate: true,
        });
    }
    let mut max_deviation: f64 = 0.0;
    let mut alternates = true;
    for (j, &y) in result.reference.points().iter().enumerate() {
        let expected = f64::from(result.sign) * if j % 2 == 0 { 1.0 } else { -1.0 };
        let r = f.value(y) - result.poly.eval(y);
        alternates &= r * expected > 0.0;
        max_deviation = max_deviation.max((expected * sup_norm - r).abs());
    }
    let limit = 1e-8 * sup_norm.max(1.0);
    if !alternates || max_deviation > limit {
        return Err(RemezError::CertificationFailed { max_deviation, limit });
    }
    Ok(EquioscillationCertificate {
        points: result.reference.clone(),
        sign: result.sign,
        sup_norm,
        max_deviation,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn reference(points: &[f64]) -> ReferenceSet {
        ReferenceSet::new(points.to_vec()).unwrap()
    }

    #[test]
    fn initial_reference_examples() {
        assert_eq!(initial_reference(1).points(), &[-1.0, 0.0, 1.0]);
        assert_eq!(initial_reference(0).points(), &[-1.0, 1.0]);
        let r = initial_reference(2);
        for (a, b) in r.points().iter().zip([-1.0, -0.5, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn levelled_square() {
        let f = parse("x^2").unwrap();
        let lev = solve_levelled(&f, &reference(&[-1.0, 0.0, 1.0]), 1).unwrap();
        assert!((lev.poly.coeff(0) - 0.5).abs() < 1e-15);
        assert!(lev.poly.coeff(1).abs() < 1e-15);
        assert!((lev.lambda - 0.5).abs() < 1e-15);
        // residual at -1 is +0.5
        assert_eq!(lev.sign, 1);
    }

    #[test]
    fn levelled_reproduces_members_of_pi_n() {
        let f = parse("1 - 2x + 0.5x^2").unwrap();
        let lev = solve_levelled(&f, &reference(&[-0.9, -0.2, 0.3, 0.6]), 2).unwrap();
        assert!(lev.lambda < 1e-15);
        for &x in &[-1.0, 0.1, 0.77] {
            assert!((lev.poly.eval(x) - f.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn levelled_cube() {
        let f = parse("x^3").unwrap();
        let lev = solve_levelled(&f, &reference(&[-1.0, -0.5, 0.5, 1.0]), 2).unwrap();
        assert!(lev.poly.coeff(0).abs() < 1e-15 && lev.poly.coeff(2).abs() < 1e-15);
        assert!((lev.poly.coeff(1) - 0.75).abs() < 1e-15);
        assert!((lev.lambda - 0.25).abs() < 1e-15);
    }

    #[test]
    fn levelled_rejects_bad_size() {
        let f = parse("x").unwrap();
        assert_eq!(
            solve_levelled(&f, &reference(&[-1.0, 1.0]), 1),
            Err(RemezError::ReferenceSize { expected: 3, got: 2 })
        );
        assert!(ReferenceSet::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn extrema_examples() {
        let f = parse("x^2").unwrap();
        let ext = find_residual_extrema(&f, &ChebSeries::constant(0.5), 256).unwrap();
        assert_eq!(ext.nodes.len(), 3);
        for (a, b) in ext.nodes.points().iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-7, "{a}");
        }

        let f = parse("x^3").unwrap();
        let p = ChebSeries::new(vec![0.0, 0.75]).unwrap();
        let ext = find_residual_extrema(&f, &p, 256).unwrap();
        assert_eq!(ext.nodes.len(), 4);
        for (a, b) in ext.nodes.points().iter().zip([-1.0, -0.5, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-7, "{a}");
        }
        assert!((ext.sup_norm() - 0.25).abs() < 1e-15);

        let f = parse("0.5 + 0*x").unwrap();
        let ext = find_residual_extrema(&f, &ChebSeries::constant(0.5), 256).unwrap();
        assert!(ext.degenerate);
        assert_eq!(ext.nodes.points(), &[-1.0, 1.0]);

        assert!(matches!(find_residual_extrema(&f, &p, 10), Err(RemezError::GridTooSmall { .. })));
    }

    #[test]
    fn exchange_examples() {
        let f = parse("x^3").unwrap();
        let p = ChebSeries::new(vec![0.0, 0.75]).unwrap();
        let ext = find_residual_extrema(&f, &p, 512).unwrap();
        let r0 = initial_reference(2);
        let out = exchange(&r0, &ext);
        assert!(!out.stalled);
        for (a, b) in out.reference.points().iter().zip(r0.points()) {
            assert!((a - b).abs() < 1e-7);
        }

        let ext = ResidualExtrema {
            nodes: NodeSet::custom(vec![-1.0, 0.1, 1.0]).unwrap(),
            values: vec![0.5, -0.6, 0.5],
            degenerate: false,
        };
        let out = exchange(&reference(&[-1.0, 0.0, 1.0]), &ext);
        assert_eq!(out.reference.points(), &[-1.0, 0.1, 1.0]);

        let ext = ResidualExtrema {
            nodes: NodeSet::custom(vec![-1.0, 1.0]).unwrap(),
            values: vec![0.0, 0.0],
            degenerate: true,
        };
        assert!(exchange(&reference(&[-1.0, 0.0, 1.0]), &ext).stalled);
    }

    #[test]
    fn exchange_trims_to_size_keeping_global_max() {
        let ext = ResidualExtrema {
            nodes: NodeSet::custom(vec![-1.0, -0.6, -0.2, 0.1, 0.5, 1.0]).unwrap(),
            values: vec![0.1, -0.3, 0.9, -0.05, 0.2, -0.4],
            degenerate: false,
        };
        let out = exchange(&reference(&[-1.0, -0.3, 0.3, 1.0]), &ext);
        let pts = out.reference.points();
        assert_eq!(pts.len(), 4);
        assert!(pts.contains(&-0.2));
        let vals: Vec<f64> =
            pts.iter().map(|x| ext.values[ext.nodes.points().iter().position(|p| p == x).unwrap()]).collect();
        assert!(vals.windows(2).all(|w| w[0] * w[1] < 0.0));
    }

    #[test]
    fn single_exchange_rule() {
        let r = reference(&[-1.0, 0.0, 1.0]);
        let res = |x: f64| x * x - 0.5; // + - + on r
        assert_eq!(single_exchange(&r, res, 0.1, -0.6).unwrap().points(), &[-1.0, 0.1, 1.0]);
        assert_eq!(single_exchange(&r, res, 0.5, 0.7).unwrap().points(), &[-1.0, 0.0, 0.5]);
        assert!(single_exchange(&r, res, 0.0, -0.6).is_none());
    }

    #[test]
    fn remez_examples() {
        let opts = RemezOptions::default();
        let r = remez(&parse("x^2").unwrap(), 1, &opts).unwrap();
        assert!(r.converged && !r.degenerate);
        assert!((r.levelled_error - 0.5).abs() < 1e-14);
        assert!((r.poly.coeff(0) - 0.5).abs() < 1e-14 && r.poly.degree() == 0);

        let r = remez(&parse("x^4").unwrap(), 3, &opts).unwrap();
        assert!((r.levelled_error - 0.125).abs() < 1e-14);

        let e = std::f64::consts::E;
        let r = remez(&parse("exp(x)").unwrap(), 2, &opts).unwrap();
        assert!(r.converged);
        assert!(r.levelled_error > 1.0 / (e * 24.0) && r.levelled_error < e / 24.0);
        assert!(r.iterations > 1);

        let r = remez(&parse("3 - x").unwrap(), 2, &opts).unwrap();
        assert!(r.converged && r.degenerate);
        assert_eq!(r.levelled_error, 0.0);
    }

    #[test]
    fn certificates() {
        let opts = RemezOptions::default();
        let f = parse("x^3").unwrap();
        let r = remez(&f, 2, &opts).unwrap();
        let c = certify_equioscillation(&f, &r).unwrap();
        for (a, b) in c.points.points().iter().zip([-1.0, -0.5, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(c.max_deviation < 1e-12);

        let f = parse("x^2").unwrap();
        let c = certify_equioscillation(&f, &remez(&f, 1, &opts).unwrap()).unwrap();
        assert_eq!(c.points.points(), &[-1.0, 0.0, 1.0]);
        assert!((c.sup_norm - 0.5).abs() < 1e-14);

        let f = parse("x - 1").unwrap();
        let c = certify_equioscillation(&f, &remez(&f, 3, &opts).unwrap()).unwrap();
        assert!(c.degenerate && c.sup_norm < 1e-13);

        let mut bad = remez(&parse("exp(x)").unwrap(), 2, &opts).unwrap();
        bad.converged = false;
        assert_eq!(certify_equioscillation(&parse("exp(x)").unwrap(), &bad), Err(RemezError::NotConverged));
    }

    #[test]
    fn certification_rejects_wrong_polynomial() {
        let f = parse("exp(x)").unwrap();
        let mut r = remez(&f, 2, &RemezOptions::default()).unwrap();
        r.poly = r.poly.add(&ChebSeries::constant(1e-3));
        assert!(matches!(certify_equioscillation(&f, &r), Err(RemezError::CertificationFailed { .. })));
    }

    #[test]
    fn dense_solver() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![1.0, 1.0]], vec![4.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        assert!(solve_dense(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]).is_none());
    }
}
