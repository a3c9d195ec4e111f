//! Numerical certification of the one-dimensional integral bounds used to
//! control the polynomial factors.
//!
//! "≪" is read as: the ratio lhs/bound stays within a factor 10 of its
//! value at the smallest T on the grid.

use crate::special::adaptive_gk;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("T must be positive and at most 1e5, got {0}")]
    Range(f64),
    #[error("epsilon must lie in (0, 1/2], got {0}")]
    Epsilon(f64),
    #[error("nodes must be sorted and finite")]
    Unsorted,
    #[error("need 2 ≤ k ≤ 6 nodes with matching exponents")]
    Shape,
    #[error("window ({0}, {1}) invalid")]
    Window(usize, usize),
    #[error("non-finite value at T = {0}")]
    NonFinite(f64),
}

const REL_TOL: f64 = 1e-11;

/// ∫_a^b g with log substitutions from both ends, so endpoint peaks of
/// (1 + |x − node|)^{-e} become smooth.
fn integrate_between<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let m = 0.5 * (a + b);
    let top = (1.0 + (m - a)).ln();
    let left = |u: f64| {
        let d = u.exp();
        g(a + d - 1.0) * d
    };
    let right = |u: f64| {
        let d = u.exp();
        g(b - (d - 1.0)) * d
    };
    let (v1, e1) = adaptive_gk(&left, 0.0, top, REL_TOL);
    let (v2, e2) = adaptive_gk(&right, 0.0, top, REL_TOL);
    (v1 + v2, e1 + e2)
}

/// ∫_0^T dx / ((1+T−x)^e (1+x)^f).
pub fn lhs_integral_a1(e: f64, f: f64, t: f64) -> Result<(f64, f64), BoundError> {
    if !(t > 0.0 && t <= 1e5) {
        return Err(BoundError::Range(t));
    }
    let g = |x: f64| (1.0 + t - x).powf(-e) * (1.0 + x).powf(-f);
    let (v, err) = integrate_between(&g, 0.0, t);
    if !v.is_finite() {
        return Err(BoundError::NonFinite(t));
    }
    Ok((v, err))
}

pub fn a1_exponent(e: f64, f: f64) -> f64 {
    e.min(f).min(e + f - 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub t: f64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct A1Report {
    pub e: f64,
    pub f: f64,
    pub epsilon: f64,
    pub rows: Vec<RatioRow>,
    pub ok: bool,
    /// first T where the ratio exceeded 10× its initial value
    pub witness: Option<f64>,
}

fn check_eps(eps: f64) -> Result<(), BoundError> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(BoundError::Epsilon(eps));
    }
    Ok(())
}

pub fn verify_a1(e: f64, f: f64, t_grid: &[f64], eps: f64) -> Result<A1Report, BoundError> {
    check_eps(eps)?;
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let rows = grid
        .par_iter()
        .map(|&t| {
            let (lhs, lhs_error) = lhs_integral_a1(e, f, t)?;
            let bound = (1.0 + t).powf(-a1_exponent(e, f) + eps);
            Ok(RatioRow { t, lhs, lhs_error, bound, ratio: lhs / bound })
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    if let Some(r) = rows.iter().find(|r| !r.ratio.is_finite()) {
        return Err(BoundError::NonFinite(r.t));
    }
    let base = rows.first().map_or(0.0, |r| r.ratio);
    let witness = rows.iter().find(|r| r.ratio > 10.0 * base).map(|r| r.t);
    Ok(A1Report { e, f, epsilon: eps, rows, ok: witness.is_none(), witness })
}

#[derive(Debug, Clone, Serialize)]
pub struct A3Report {
    pub nodes: Vec<f64>,
    pub exponents: Vec<f64>,
    /// 1-based window (j_min, j_max)
    pub window: (usize, usize),
    pub epsilon: f64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ok: bool,
}

/// Node paired with factor i while x runs between B_j and B_{j+1}
/// (0-based j): the end of the interval where the factor is largest.
pub fn b_star(b: &[f64], e: &[f64], j: usize, i: usize) -> f64 {
    let below = i < j;
    match (below, e[i] > 0.0) {
        (true, true) | (false, false) => b[j],
        (true, false) | (false, true) => b[j + 1],
    }
}

/// Integral of ∏(1+|x−B_i|)^{-e_i} over [B_jmin, B_jmax], split at every node.
pub fn lhs_integral_a3(b: &[f64], e: &[f64], window: (usize, usize)) -> (f64, f64) {
    let g = |x: f64| b.iter().zip(e).map(|(bi, ei)| (1.0 + (x - bi).abs()).powf(-ei)).product::<f64>();
    let (lo, hi) = (window.0 - 1, window.1 - 1);
    (lo..hi).map(|j| integrate_between(&g, b[j], b[j + 1])).fold((0.0, 0.0), |a, v| (a.0 + v.0, a.1 + v.1))
}

pub fn rhs_a3(b: &[f64], e: &[f64], window: (usize, usize), eps: f64) -> f64 {
    let (lo, hi) = (window.0 - 1, window.1 - 1);
    let span = (1.0 + b[hi] - b[lo]).powf(eps);
    let mut sum = 0.0;
    for j in lo..hi {
        let mut term = (1.0 + b[j + 1] - b[j]).powf(-a1_exponent(e[j], e[j + 1]));
        for i in 0..b.len() {
            if i == j || i == j + 1 {
                continue;
            }
            term *= (1.0 + (b_star(b, e, j, i) - b[i]).abs()).powf(-e[i]);
        }
        sum += term;
    }
    span * sum
}

pub fn verify_a3(b: &[f64], e: &[f64], window: (usize, usize), eps: f64) -> Result<A3Report, BoundError> {
    check_eps(eps)?;
    let k = b.len();
    if !(2..=6).contains(&k) || e.len() != k {
        return Err(BoundError::Shape);
    }
    if b.iter().any(|x| !x.is_finite()) || b.windows(2).any(|w| w[0] > w[1]) {
        return Err(BoundError::Unsorted);
    }
    if !(1 <= window.0 && window.0 < window.1 && window.1 <= k) {
        return Err(BoundError::Window(window.0, window.1));
    }
    let (lhs, lhs_error) = lhs_integral_a3(b, e, window);
    let rhs = rhs_a3(b, e, window, eps);
    let ratio = lhs / rhs;
    if !ratio.is_finite() {
        return Err(BoundError::NonFinite(b[window.1 - 1] - b[window.0 - 1]));
    }
    Ok(A3Report {
        nodes: b.to_vec(),
        exponents: e.to_vec(),
        window,
        epsilon: eps,
        lhs,
        lhs_error,
        rhs,
        ratio,
        ok: lhs <= 10.0 * rhs,
    })
}

/// The full-window case (j_min, j_max) = (1, k).
pub fn verify_a2(b: &[f64], e: &[f64], eps: f64) -> Result<A3Report, BoundError> {
    verify_a3(b, e, (1, b.len()), eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let (v, _) = lhs_integral_a1(0.0, 0.0, 10.0).unwrap();
        assert!((v - 10.0).abs() < 1e-10);
        let (v, _) = lhs_integral_a1(1.0, 1.0, 10.0).unwrap();
        assert!((v - 2.0 * 11f64.ln() / 12.0).abs() < 1e-10 * v);
        let (v, _) = lhs_integral_a1(2.0, 0.0, 10.0).unwrap();
        assert!((v - (1.0 - 1.0 / 11.0)).abs() < 1e-10);
    }

    #[test]
    fn b_star_rule() {
        let b = [0.0, 1.0, 2.0, 3.0, 4.0];
        let e = [1.0, -1.0, 0.5, 0.5, -2.0];
        assert_eq!(b_star(&b, &e, 2, 0), 2.0);
        assert_eq!(b_star(&b, &e, 2, 1), 3.0);
        assert_eq!(b_star(&b, &e, 1, 3), 2.0);
        assert_eq!(b_star(&b, &e, 1, 4), 1.0);
    }
}
