//! Discrete minimax on a fixed grid, used as an independent check on the
//! continuous solver.
//!
//! Everything happens on grid indices: the basis is tabulated as
//! `T_j(cos t) = cos(j t)`, and the exchange works on sign runs of the grid
//! residual. There is no refinement between grid points, so the loop runs over
//! a finite set of references and the result is a lower bound for `E_n(f)`.

use std::f64::consts::PI;

use super::RemezError;
use crate::cheb::ChebSeries;
use crate::jet::Univariate;

const MAX_SWEEPS: usize = 500;

pub fn grid_lp_minimax_oracle<F: Univariate + ?Sized>(
    f: &F,
    n: usize,
    grid_size: usize,
) -> Result<(ChebSeries, f64), RemezError> {
    let min = 4 * (n + 2);
    if grid_size < min {
        return Err(RemezError::GridTooSmall { got: grid_size, min });
    }
    let last = grid_size - 1;
    // Ascending x_i = cos(theta_i) with theta_i = (last - i) pi / last.
    let theta: Vec<f64> = (0..grid_size).map(|i| (last - i) as f64 * PI / last as f64).collect();
    let xs: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let fx: Vec<f64> = xs.iter().map(|&x| f.value(x)).collect();
    let basis = |i: usize, j: usize| (j as f64 * theta[i]).cos();

    // Grid points nearest the alternation points of T_{n+1}.
    let mut reference: Vec<usize> = (0..n + 2).map(|j| (j * last + n.div_ceil(2)) / (n + 1)).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;

    for _ in 0..MAX_SWEEPS {
        let (coeffs, level) = levelled(&reference, n, &fx, basis).ok_or(RemezError::Singular)?;
        let lambda = level.abs();
        let resid: Vec<f64> =
            (0..grid_size).map(|i| fx[i] - (0..=n).map(|j| coeffs[j] * basis(i, j)).sum::<f64>()).collect();
        let worst = resid.iter().fold(0.0, |m: f64, r| m.max(r.abs()));

        let improved = best.as_ref().is_none_or(|(_, l)| lambda > *l);
        if improved {
            best = Some((coeffs, lambda));
        } else {
            break;
        }
        if worst <= lambda * (1.0 + 1e-13) + 1e-300 {
            break;
        }
        let next = match swap_in(&reference, &resid) {
            Some(next) if next != reference => Some(next),
            _ => single_swap(&reference, &resid, level),
        };
        match next {
            Some(next) => reference = next,
            None => break,
        }
    }
    let (coeffs, lambda) = best.expect("first sweep always recorded");
    Ok((ChebSeries::new(coeffs)?, lambda))
}

// Gauss-Jordan elimination on the levelled system over grid indices.
fn levelled(reference: &[usize], n: usize, fx: &[f64], basis: impl Fn(usize, usize) -> f64) -> Option<(Vec<f64>, f64)> {
    let m = n + 2;
    let mut a: Vec<Vec<f64>> = reference
        .iter()
        .enumerate()
        .map(|(row, &i)| {
            let mut r: Vec<f64> = (0..=n).map(|j| basis(i, j)).collect();
            r.push(if row % 2 == 0 { 1.0 } else { -1.0 });
            r.push(fx[i]);
            r
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        let pivot = a[col].clone();
        for (row, r) in a.iter_mut().enumerate() {
            if row != col {
                let factor = r[col];
                if factor != 0.0 {
                    for (t, p) in r[col..].iter_mut().zip(&pivot[col..]) {
                        *t -= factor * p;
                    }
                }
            }
        }
    }
    let sol: Vec<f64> = a.iter().map(|r| r[m]).collect();
    Some((sol[..=n].to_vec(), sol[n + 1]))
}

// New reference from the largest point of each sign run, trimmed back to the
// reference size.
fn swap_in(reference: &[usize], resid: &[f64]) -> Option<Vec<usize>> {
    let want = reference.len();
    let mut runs: Vec<usize> = Vec::new();
    for (i, &r) in resid.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        match runs.last_mut() {
            Some(last) if (resid[*last] > 0.0) == (r > 0.0) => {
                if r.abs() > resid[*last].abs() {
                    *last = i;
                }
            }
            _ => runs.push(i),
        }
    }
    if runs.len() < want {
        return None;
    }
    let mag = |i: usize| resid[i].abs();
    while runs.len() > want {
        let end = runs.len() - 1;
        if runs.len() - want == 1 {
            if mag(runs[0]) < mag(runs[end]) {
                runs.remove(0);
            } else {
                runs.pop();
            }
            continue;
        }
        let k = (0..runs.len()).min_by(|&a, &b| mag(runs[a]).total_cmp(&mag(runs[b]))).expect("nonempty");
        if k == 0 || k == end {
            runs.remove(k);
        } else {
            let j = if mag(runs[k - 1]) < mag(runs[k + 1]) { k - 1 } else { k + 1 };
            let lo = k.min(j);
            runs.drain(lo..lo + 2);
        }
    }
    Some(runs)
}

// Classic one-point exchange: the global maximum replaces the neighbouring
// reference point of the same residual sign. A zero level (a reference on
// which f is interpolated exactly, as for odd f on a symmetric reference)
// carries no sign information, so the nearest point is replaced.
fn single_swap(reference: &[usize], resid: &[f64], level: f64) -> Option<Vec<usize>> {
    let top = (0..resid.len()).max_by(|&a, &b| resid[a].abs().total_cmp(&resid[b].abs()))?;
    if reference.contains(&top) {
        return None;
    }
    let sign_at = |j: usize| {
        let s = resid[reference[j]];
        if s != 0.0 {
            s.signum()
        } else if level != 0.0 {
            level.signum() * if j.is_multiple_of(2) { 1.0 } else { -1.0 }
        } else {
            0.0
        }
    };
    let s = resid[top].signum();
    let mut next = reference.to_vec();
    let last = reference.len() - 1;
    let pos = reference.partition_point(|&i| i < top);
    if pos == 0 {
        if sign_at(0) == s || sign_at(0) == 0.0 {
            next[0] = top;
        } else {
            next.pop();
            next.insert(0, top);
        }
    } else if pos > last {
        if sign_at(last) == s || sign_at(last) == 0.0 {
            next[last] = top;
        } else {
            next.remove(0);
            next.push(top);
        }
    } else {
        let (j, k) = (pos - 1, pos);
        let replace = match (sign_at(j) == s, sign_at(k) == s) {
            (true, _) => j,
            (false, true) => k,
            _ if top - reference[j] <= reference[k] - top => j,
            _ => k,
        };
        next[replace] = top;
    }
    Some(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn closed_forms() {
        let (p, l) = grid_lp_minimax_oracle(&parse("x^2").unwrap(), 1, 2001).unwrap();
        assert!((l - 0.5).abs() < 1e-6);
        assert!((p.coeff(0) - 0.5).abs() < 1e-6);
        let (_, l) = grid_lp_minimax_oracle(&parse("x^4").unwrap(), 3, 2001).unwrap();
        assert!((l - 0.125).abs() < 1e-6);
    }

    #[test]
    fn grid_value_is_a_lower_bound() {
        let f = parse("exp(x)").unwrap();
        let (_, coarse) = grid_lp_minimax_oracle(&f, 3, 41).unwrap();
        let (_, fine) = grid_lp_minimax_oracle(&f, 3, 4001).unwrap();
        assert!(coarse <= fine * (1.0 + 1e-12));
    }

    #[test]
    fn parity_matched_starts() {
        // symmetric references interpolate odd f at n = 1 and even f at n = 2
        let (_, l) = grid_lp_minimax_oracle(&parse("sin(x)").unwrap(), 1, 2001).unwrap();
        assert!((l - 3.9133e-2).abs() < 1e-5, "{l}");
        let (_, l) = grid_lp_minimax_oracle(&parse("cos(x)").unwrap(), 2, 2001).unwrap();
        assert!((l - 4.9536e-3).abs() < 1e-6, "{l}");
        let (_, l) = grid_lp_minimax_oracle(&parse("x^3").unwrap(), 1, 2001).unwrap();
        assert!((l - 0.25).abs() < 1e-6, "{l}");
    }

    #[test]
    fn rejects_small_grid() {
        assert!(grid_lp_minimax_oracle(&parse("x").unwrap(), 2, 10).is_err());
    }
}
