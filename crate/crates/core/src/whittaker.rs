//! Mellin transform of the GL(4) Whittaker function, its first-order poles
//! and residues, and Whittaker values by inverse Mellin transform.
//!
//! Normalization: M̃_α(s) = 2^{-3} π^{-(s1+s2+s3)} Ŵ_{α/2}(s/2), with Ŵ the
//! one-dimensional Barnes integral over t. The closed residue products are
//! residues of Ŵ_{α/2}(s/2) in the half-variable, so the residue of M̃ in s
//! carries an extra factor (1/4)·π^{-(s1+s2+s3)}; `mellin_residue` includes it.

use crate::params::LanglandsParam;
use crate::real::{c_from, c_to_f64, cexp, Real};
use crate::special::{gamma_pole_distance, integrate_line_near, lgamma, LineQuadrature, SpecialError};
use num_complex::{Complex, Complex64 as C};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhittakerError {
    #[error("Gamma argument {0} is within 1e-3 of a pole")]
    ContourTooClose(String),
    #[error("two poles of the t-integrand coincide near t = {0}")]
    DoublePole(String),
    #[error("Langlands parameters must be pairwise distinct by 1e-6 (|α{0}-α{1}| too small)")]
    Degenerate(usize, usize),
    #[error("residue formulas are implemented for δ = 0 only")]
    ShiftedPole,
    #[error("cost {needed} exceeds budget {budget}")]
    Budget { needed: usize, budget: usize },
    #[error(transparent)]
    Quadrature(#[from] SpecialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinPoint {
    pub s: [C; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    S1,
    S2,
    S3,
}

/// A pole s_axis = base − 2·shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleSpec {
    pub axis: Axis,
    pub base: C,
    pub shift: u32,
    /// Indices of α entering the base: one for s1/s3, two for s2.
    pub indices: (usize, usize),
}

impl PoleSpec {
    pub fn location(&self) -> C {
        self.base - 2.0 * self.shift as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftDenominators {
    pub b1: C,
    pub b2: C,
    pub b3: C,
}

#[derive(Debug, Clone, Copy)]
pub struct MellinValue<S> {
    pub value: Complex<S>,
    /// Quadrature error estimate of the t-integral, scaled like `value`.
    pub error: f64,
    /// Real part of the t-contour actually used.
    pub contour: f64,
    /// Number of poles whose residues were added because the contour
    /// passes on the wrong side of them.
    pub crossed: usize,
}

/// Default quadrature for the t-integral: Gauss-Legendre panels with an
/// automatically placed contour and truncation height.
pub fn default_t_quadrature<S: Real>() -> LineQuadrature {
    let mut q = LineQuadrature::new(f64::NAN, 0.0);
    q.nodes = S::PANEL_ORDER / 2;
    q.panel_width = 2.0;
    q.tol = (S::epsilon() * 1e4).max(1e-26);
    q
}

struct TData<S> {
    left: [Complex<S>; 4],
    right: [Complex<S>; 2],
    den: [Complex<S>; 2],
}

impl<S: Real> TData<S> {
    fn log_integrand(&self, t: Complex<S>) -> Complex<S> {
        let mut acc = Complex::new(S::zero(), S::zero());
        for a in &self.left {
            acc += lgamma(t + *a);
        }
        for b in &self.right {
            acc += lgamma(*b - t);
        }
        for d in &self.den {
            acc -= lgamma(t + *d);
        }
        acc
    }

    fn integrand(&self, t: Complex<S>) -> Complex<S> {
        cexp(self.log_integrand(t))
    }
}

/// Γ(−t+β3)Γ(−t+β4)Γ(t+z1)Γ(t+z2+β1)Γ(t+z2+β2)Γ(t+z3+β1+β2) /
/// (Γ(t+z1+z2+β1+β2)Γ(t+z2+z3)) with β = α/2, z = s/2.
fn t_data<S: Real>(alpha: &[C; 4], s: &[C; 3]) -> (TData<S>, [Complex<S>; 6]) {
    let b: Vec<Complex<S>> = alpha.iter().map(|a| c_from::<S>(*a) * S::from_f64(0.5)).collect();
    let z: Vec<Complex<S>> = s.iter().map(|x| c_from::<S>(*x) * S::from_f64(0.5)).collect();
    let data = TData {
        left: [z[0], z[1] + b[0], z[1] + b[1], z[2] + b[0] + b[1]],
        right: [b[2], b[3]],
        den: [z[0] + z[1] + b[0] + b[1], z[1] + z[2]],
    };
    let pre = [
        z[0] + b[0],
        z[0] + b[1],
        z[1] - b[0] - b[1],
        z[1] + b[0] + b[1],
        z[2] - b[0],
        z[2] - b[1],
    ];
    (data, pre)
}

struct Pole {
    at: C,
    left: Option<usize>,
    right: Option<usize>,
    k: u32,
}

/// Poles of the t-integrand with real part in [lo, hi].
fn poles_in(left: &[C; 4], right: &[C; 2], lo: f64, hi: f64) -> Vec<Pole> {
    let mut out = Vec::new();
    for (i, a) in left.iter().enumerate() {
        // t = −a − k
        let mut k = 0u32;
        loop {
            let p = -a - k as f64;
            if p.re < lo {
                break;
            }
            if p.re <= hi {
                out.push(Pole { at: p, left: Some(i), right: None, k });
            }
            k += 1;
        }
    }
    for (i, b) in right.iter().enumerate() {
        let mut k = 0u32;
        loop {
            let p = b + k as f64;
            if p.re > hi {
                break;
            }
            if p.re >= lo {
                out.push(Pole { at: p, left: None, right: Some(i), k });
            }
            k += 1;
        }
    }
    out
}

fn factorial_ln(k: u32) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// Contour placement: with a separating gap between left and right poles,
/// Re t = R − min((R−L)/2, 0.1) where L, R are the innermost pole real parts
/// (this is −ε′ with ε′ = min(ε/2, 0.1) for imaginary α); otherwise the
/// midpoint of the widest pole-free interval near the gap, with residue
/// corrections for the poles on the wrong side.
fn choose_contour(left: &[C; 4], right: &[C; 2], preferred: f64) -> f64 {
    let l = left.iter().map(|a| -a.re).fold(f64::NEG_INFINITY, f64::max);
    let r = right.iter().map(|b| b.re).fold(f64::INFINITY, f64::min);
    if !preferred.is_nan() {
        return preferred;
    }
    // A narrow gap would put the line too close to a pole; cross instead.
    if r - l >= 0.2 {
        return r - ((r - l) / 2.0).min(0.1);
    }
    let (lo, hi) = (r - 1.5, l + 1.5);
    let mut xs: Vec<f64> = poles_in(left, right, lo - 1.0, hi + 1.0).iter().map(|p| p.at.re).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (f64::NEG_INFINITY, 0.5 * (l + r));
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid < lo || mid > hi {
            continue;
        }
        let gap = w[1] - w[0];
        // mild preference for staying near the overlap centre
        let score = gap - 1e-3 * (mid - 0.5 * (l + r)).abs();
        if score > best.0 {
            best = (score, mid);
        }
    }
    best.1
}

/// M̃_α(s) evaluated as a t-contour integral at precision `S`.
/// `q.anchor` (if not NaN) forces the contour real part; `q.half_height`
/// ≤ 0 selects the Stirling-envelope truncation.
pub fn mellin_transform<S: Real>(
    alpha: &LanglandsParam,
    s: [C; 3],
    q: &LineQuadrature,
) -> Result<MellinValue<S>, WhittakerError> {
    let a = alpha.a4();
    let (data, pre) = t_data::<S>(&a, &s);
    for p in &pre {
        let pf = c_to_f64(*p);
        if gamma_pole_distance(pf) < 1e-3 {
            return Err(WhittakerError::ContourTooClose(format!("{pf}")));
        }
    }
    let left: [C; 4] = data.left.map(c_to_f64);
    let right: [C; 2] = data.right.map(c_to_f64);
    let den: [C; 2] = data.den.map(c_to_f64);
    let c = choose_contour(&left, &right, q.anchor);

    // Poles crossed by the contour, plus nearby ones for panel grading.
    let span = 3.0;
    let all = poles_in(&left, &right, c - span, c + span);
    let mut crossed = Vec::new();
    for p in &all {
        let wrong_side = (p.left.is_some() && p.at.re > c) || (p.right.is_some() && p.at.re < c);
        if wrong_side {
            crossed.push(p);
        }
    }
    for p in &crossed {
        for o in &all {
            if !std::ptr::eq(*p, o) && (o.at - p.at).norm() < 1e-8 {
                return Err(WhittakerError::DoublePole(format!("{}", p.at)));
            }
        }
    }
    let singular: Vec<C> = all.iter().map(|p| p.at).collect();

    // Truncation from the Stirling envelope: outside the breakpoints the
    // modulus decays like e^{-2π|y|} times a power of |y|.
    let mut qq = *q;
    qq.anchor = c;
    if qq.half_height <= 0.0 {
        let bps: Vec<f64> = left
            .iter()
            .map(|x| -x.im)
            .chain(right.iter().map(|x| x.im))
            .chain(den.iter().map(|x| -x.im))
            .collect();
        let lo = bps.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = bps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let power: f64 = left.iter().map(|x| c + x.re - 0.5).sum::<f64>()
            + right.iter().map(|x| x.re - c - 0.5).sum::<f64>()
            - den.iter().map(|x| c + x.re - 0.5).sum::<f64>();
        let digits = -(qq.tol * 1e-3).ln();
        let y0 = (digits + power.max(0.0) * (hi - lo + 30.0).ln()) / (2.0 * PI) + 1.0;
        qq.center = 0.5 * (lo + hi);
        qq.half_height = 0.5 * (hi - lo) + y0;
    }
    let integral = integrate_line_near(|t: Complex<S>| data.integrand(t), &qq, &singular)?;
    let inv_2pi = S::one() / (S::from_f64(2.0) * S::pi());
    let mut total = integral.value * inv_2pi;
    for p in &crossed {
        let t0 = c_from::<S>(p.at);
        let mut lg = Complex::new(S::zero(), S::zero());
        for (i, x) in data.left.iter().enumerate() {
            if p.left != Some(i) {
                lg += lgamma(t0 + *x);
            }
        }
        for (i, x) in data.right.iter().enumerate() {
            if p.right != Some(i) {
                lg += lgamma(*x - t0);
            }
        }
        for d in &data.den {
            lg -= lgamma(t0 + *d);
        }
        lg.re -= S::from_f64(factorial_ln(p.k));
        let mut r = cexp(lg);
        if p.k % 2 == 1 {
            r = -r;
        }
        total += r;
    }
    let mut lpre = Complex::new(S::zero(), S::zero());
    for p in &pre {
        lpre += lgamma(*p);
    }
    let ssum = c_from::<S>(s[0] + s[1] + s[2]);
    let lnpi = S::pi().ln();
    lpre -= ssum * lnpi;
    lpre.re -= S::from_f64(3.0) * S::from_f64(2.0).ln();
    let factor = cexp(lpre);
    let fnorm = c_to_f64(factor).norm();
    Ok(MellinValue {
        value: factor * total,
        error: integral.error / (2.0 * PI) * fnorm,
        contour: c,
        crossed: crossed.len(),
    })
}

/// Double-precision convenience wrapper with default quadrature.
pub fn mellin(alpha: &LanglandsParam, s: [C; 3]) -> Result<MellinValue<f64>, WhittakerError> {
    mellin_transform::<f64>(alpha, s, &default_t_quadrature::<f64>())
}

pub fn pole_lattice(alpha: &LanglandsParam, axis: Axis, delta_max: u32) -> Vec<PoleSpec> {
    let a = alpha.a4();
    let bases: Vec<(C, (usize, usize))> = match axis {
        Axis::S1 => (0..4).map(|k| (-a[k], (k, k))).collect(),
        Axis::S3 => (0..4).map(|k| (a[k], (k, k))).collect(),
        Axis::S2 => {
            let mut v = Vec::new();
            for j in 0..4 {
                for k in j + 1..4 {
                    v.push((-a[j] - a[k], (j, k)));
                }
            }
            v
        }
    };
    let mut out = Vec::new();
    for (base, indices) in bases {
        for shift in 0..=delta_max {
            out.push(PoleSpec { axis, base, shift, indices });
        }
    }
    out
}

fn check_distinct(a: &[C; 4]) -> Result<(), WhittakerError> {
    for j in 0..4 {
        for k in j + 1..4 {
            if (a[j] - a[k]).norm() < 1e-6 {
                return Err(WhittakerError::Degenerate(j + 1, k + 1));
            }
        }
    }
    Ok(())
}

fn lg(z: C) -> C {
    lgamma(z)
}

/// Γ-products of the three displayed residue formulas, base indices first.
/// These are residues of Ŵ_{α/2}(s/2) in the half-variable.
pub fn residue_gamma_product(alpha: &[C; 4], axis: Axis, s_rest: [C; 2]) -> C {
    let a = alpha;
    let mut l = C::new(0.0, 0.0);
    match axis {
        Axis::S1 => {
            // s_rest = (s2, s3)
            let (s2, s3) = (s_rest[0], s_rest[1]);
            for j in 1..4 {
                l += lg((a[j] - a[0]) / 2.0) + lg((s2 + a[0] + a[j]) / 2.0) + lg((s3 - a[j]) / 2.0);
            }
            l -= lg((s2 + s3 + a[0]) / 2.0);
        }
        Axis::S2 => {
            // s_rest = (s1, s3)
            let (s1, s3) = (s_rest[0], s_rest[1]);
            for j in 0..2 {
                for k in 2..4 {
                    l += lg((a[k] - a[j]) / 2.0);
                }
            }
            l += lg((s1 + a[0]) / 2.0) + lg((s1 + a[1]) / 2.0) + lg((s3 - a[2]) / 2.0) + lg((s3 - a[3]) / 2.0);
        }
        Axis::S3 => {
            // s_rest = (s1, s2)
            let (s1, s2) = (s_rest[0], s_rest[1]);
            for j in 1..4 {
                l += lg((a[0] - a[j]) / 2.0) + lg((s2 - a[0] - a[j]) / 2.0) + lg((s1 + a[j]) / 2.0);
            }
            l -= lg((s1 + s2 - a[0]) / 2.0);
        }
    }
    l.exp()
}

fn reorder(a: &[C; 4], axis: Axis, idx: (usize, usize)) -> [C; 4] {
    let first: Vec<usize> = match axis {
        Axis::S2 => vec![idx.0, idx.1],
        _ => vec![idx.0],
    };
    let mut order = first.clone();
    order.extend((0..4).filter(|i| !first.contains(i)));
    [a[order[0]], a[order[1]], a[order[2]], a[order[3]]]
}

/// Full point s with the pole coordinate inserted.
pub fn residue_point(pole: &PoleSpec, s_rest: [C; 2]) -> [C; 3] {
    let p = pole.location();
    match pole.axis {
        Axis::S1 => [p, s_rest[0], s_rest[1]],
        Axis::S2 => [s_rest[0], p, s_rest[1]],
        Axis::S3 => [s_rest[0], s_rest[1], p],
    }
}

/// Residue of M̃_α at a δ = 0 pole; `s_rest` are the two other coordinates
/// in increasing index order.
pub fn mellin_residue(alpha: &LanglandsParam, pole: &PoleSpec, s_rest: [C; 2]) -> Result<C, WhittakerError> {
    if pole.shift != 0 {
        return Err(WhittakerError::ShiftedPole);
    }
    let a = alpha.a4();
    check_distinct(&a)?;
    let r = reorder(&a, pole.axis, pole.indices);
    let s = residue_point(pole, s_rest);
    let norm = 0.25 * (-(s[0] + s[1] + s[2]) * PI.ln()).exp();
    Ok(residue_gamma_product(&r, pole.axis, s_rest) * norm)
}

pub fn shift_denominators(alpha: &LanglandsParam, s: [C; 3]) -> ShiftDenominators {
    let a = alpha.a4();
    let mut b1 = C::new(1.0, 0.0);
    let mut b3 = C::new(1.0, 0.0);
    let mut b2 = C::new(1.0, 0.0);
    for k in 0..4 {
        b1 *= s[0] + a[k];
        b3 *= s[2] - a[k];
        for j in k + 1..4 {
            b2 *= s[1] + a[j] + a[k];
        }
    }
    ShiftDenominators { b1, b2, b3 }
}

/// (1/2πi)∮ g(s) ds on a circle, by the trapezoid rule in the angle.
pub fn circle_integral<F: Fn(C) -> Result<C, WhittakerError> + Sync>(
    g: F,
    center: C,
    radius: f64,
    points: usize,
) -> Result<C, WhittakerError> {
    let vals: Result<Vec<C>, WhittakerError> = (0..points)
        .into_par_iter()
        .map(|k| {
            let th = 2.0 * PI * k as f64 / points as f64;
            let e = C::new(th.cos(), th.sin());
            g(center + e * radius).map(|v| v * e * radius)
        })
        .collect();
    Ok(vals?.iter().sum::<C>() / points as f64)
}

/// M̃ on the lattice u + i·h·(k1,k2,k3), |k_j| ≤ n_half.
#[derive(Debug, Clone)]
pub struct MellinGrid {
    pub u: [f64; 3],
    pub h: f64,
    pub n_half: usize,
    pub values: Vec<C>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WhittakerQuad {
    pub u: [f64; 3],
    pub h: f64,
    pub n_half: usize,
}

impl Default for WhittakerQuad {
    fn default() -> Self {
        WhittakerQuad { u: [0.5, 0.5, 0.5], h: 0.5, n_half: 24 }
    }
}

impl MellinGrid {
    pub fn size(n_half: usize) -> usize {
        (2 * n_half + 1).pow(3)
    }

    pub fn build(alpha: &LanglandsParam, wq: &WhittakerQuad, budget: usize) -> Result<Self, WhittakerError> {
        let m = 2 * wq.n_half + 1;
        let needed = m * m * m;
        if needed > budget {
            return Err(WhittakerError::Budget { needed, budget });
        }
        let mut q = default_t_quadrature::<f64>();
        q.verify = false;
        let nh = wq.n_half as i64;
        let values: Result<Vec<C>, WhittakerError> = (0..needed)
            .into_par_iter()
            .map(|idx| {
                let k1 = (idx / (m * m)) as i64 - nh;
                let k2 = ((idx / m) % m) as i64 - nh;
                let k3 = (idx % m) as i64 - nh;
                let s = [
                    C::new(wq.u[0], wq.h * k1 as f64),
                    C::new(wq.u[1], wq.h * k2 as f64),
                    C::new(wq.u[2], wq.h * k3 as f64),
                ];
                mellin_transform::<f64>(alpha, s, &q).map(|v| v.value)
            })
            .collect();
        Ok(MellinGrid { u: wq.u, h: wq.h, n_half: wq.n_half, values: values? })
    }

    fn idx(&self, k1: usize, k2: usize, k3: usize) -> usize {
        let m = 2 * self.n_half + 1;
        (k1 * m + k2) * m + k3
    }

    /// Inverse Mellin transform at y using grid points whose indices are
    /// multiples of `stride` (stride 2 gives the coarse comparison value).
    fn inverse(&self, y: [f64; 3], stride: usize) -> C {
        let m = 2 * self.n_half + 1;
        let nh = self.n_half as i64;
        let h = self.h * stride as f64;
        let x = [y[0].ln(), y[1].ln(), y[2].ln()];
        let phase = |j: usize| -> Vec<C> {
            (0..m)
                .map(|k| {
                    let kk = k as i64 - nh;
                    C::new(0.0, -self.h * kk as f64 * x[j]).exp()
                })
                .collect()
        };
        let (p1, p2, p3) = (phase(0), phase(1), phase(2));
        let on = |k: usize| (k as i64 - nh).rem_euclid(stride as i64) == 0;
        let mut acc = C::new(0.0, 0.0);
        for k1 in (0..m).filter(|&k| on(k)) {
            let mut a2 = C::new(0.0, 0.0);
            for k2 in (0..m).filter(|&k| on(k)) {
                let mut a3 = C::new(0.0, 0.0);
                for k3 in (0..m).filter(|&k| on(k)) {
                    a3 += self.values[self.idx(k1, k2, k3)] * p3[k3];
                }
                a2 += a3 * p2[k2];
            }
            acc += a2 * p1[k1];
        }
        let pre = ((1.5 - self.u[0]) * x[0] + (2.0 - self.u[1]) * x[1] + (1.5 - self.u[2]) * x[2]).exp();
        acc * pre * h * h * h / (2.0 * PI).powi(3)
    }

    /// W_α(y) with an error estimate from the step-2h sub-grid.
    pub fn whittaker(&self, y: [f64; 3]) -> WhittakerValue {
        let fine = self.inverse(y, 1);
        let coarse = self.inverse(y, 2);
        let underflow = fine.norm() < 1e-300;
        WhittakerValue {
            value: if underflow { C::new(0.0, 0.0) } else { fine },
            error: (fine - coarse).norm(),
            underflow,
        }
    }

    /// Grid values at the edge of the box relative to the maximum; a proxy
    /// for the truncation error of the s-integrals.
    pub fn edge_ratio(&self) -> f64 {
        let m = 2 * self.n_half + 1;
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut edge: f64 = 0.0;
        for k1 in 0..m {
            for k2 in 0..m {
                for k3 in 0..m {
                    if [k1, k2, k3].iter().any(|&k| k == 0 || k == m - 1) {
                        edge = edge.max(self.values[self.idx(k1, k2, k3)].norm());
                    }
                }
            }
        }
        edge / max
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WhittakerValue {
    pub value: C,
    pub error: f64,
    pub underflow: bool,
}

/// W_α(y) by the triple inverse Mellin integral along Re s = u.
pub fn whittaker_value(
    alpha: &LanglandsParam,
    y: [f64; 3],
    wq: &WhittakerQuad,
    budget: usize,
) -> Result<WhittakerValue, WhittakerError> {
    Ok(MellinGrid::build(alpha, wq, budget)?.whittaker(y))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InnerProduct {
    /// y-space quadrature of W_α·conj(W_β) against the weight.
    pub lhs: C,
    /// closed Γ form
    pub rhs: C,
    /// Mellin-Parseval value of the same integral, as a cross-check.
    pub parseval: C,
    pub grid_edge_ratio: f64,
}

/// ∏_{j,k} Γ((s+α_j−β_k)/2) / (2 π^{6s} Γ(2s)) for n = 4.
pub fn inner_product_rhs(alpha: &LanglandsParam, beta: &LanglandsParam, s: f64) -> C {
    let (a, b) = (alpha.a4(), beta.a4());
    let mut l = C::new(0.0, 0.0);
    for aj in &a {
        for bk in &b {
            l += lg((s + aj - bk) / 2.0);
        }
    }
    l -= C::new(2f64.ln() + 6.0 * s * PI.ln(), 0.0) + lg(C::new(2.0 * s, 0.0));
    l.exp()
}

/// Grid used for the inner product: the Mellin lines sit at
/// u = (3s/2, s, s/2), where the weight makes the y-integrand the squared
/// modulus of a pure Fourier sum.
pub fn inner_product_check(
    alpha: &LanglandsParam,
    beta: &LanglandsParam,
    s: f64,
    h: f64,
    n_half: usize,
    x_points: usize,
    budget: usize,
) -> Result<InnerProduct, WhittakerError> {
    let wq = WhittakerQuad { u: [1.5 * s, s, 0.5 * s], h, n_half };
    let same = alpha == beta;
    let needed = MellinGrid::size(n_half) * if same { 1 } else { 2 };
    if needed > budget {
        return Err(WhittakerError::Budget { needed, budget });
    }
    let ga = MellinGrid::build(alpha, &wq, budget)?;
    let gb = if same { ga.clone() } else { MellinGrid::build(beta, &wq, budget)? };
    let parseval: C = ga.values.iter().zip(gb.values.iter()).map(|(x, y)| x * y.conj()).sum::<C>()
        * h.powi(3)
        / (2.0 * PI).powi(3);

    // y-quadrature over ln y ∈ [−X, X]^3, X just inside the half period π/h
    // of the discretized inverse transform. With the chosen u the weight
    // cancels the y-powers, so the integrand is a product of Fourier sums,
    // evaluated on the tensor grid one axis at a time.
    let xmax = 0.95 * PI / h;
    let dx = 2.0 * xmax / (x_points - 1) as f64;
    let xs: Vec<f64> = (0..x_points).map(|i| -xmax + dx * i as f64).collect();
    let fa = tensor_fourier(&ga, &xs);
    let fb = if same { fa.clone() } else { tensor_fourier(&gb, &xs) };
    let norm = (h / (2.0 * PI)).powi(6) * dx.powi(3);
    let lhs: C = fa.iter().zip(fb.iter()).map(|(x, y)| x * y.conj()).sum::<C>() * norm;
    Ok(InnerProduct {
        lhs,
        rhs: inner_product_rhs(alpha, beta, s),
        parseval,
        grid_edge_ratio: ga.edge_ratio().max(gb.edge_ratio()),
    })
}

/// Σ_k M̃_k e^{−i h k·x} on the tensor grid xs³, by three 1-D passes.
fn tensor_fourier(g: &MellinGrid, xs: &[f64]) -> Vec<C> {
    let m = 2 * g.n_half + 1;
    let nx = xs.len();
    let nh = g.n_half as i64;
    let ph: Vec<C> = xs
        .iter()
        .flat_map(|&x| (0..m).map(move |k| C::new(0.0, -g.h * (k as i64 - nh) as f64 * x).exp()))
        .collect();
    // Contract the leading index: [k][rest] -> [rest][x].
    let pass = |src: &[C]| -> Vec<C> {
        let inner = src.len() / m;
        let mut out = vec![C::new(0.0, 0.0); inner * nx];
        out.par_chunks_mut(nx).enumerate().for_each(|(i, row)| {
            for (xi, r) in row.iter_mut().enumerate() {
                let p = &ph[xi * m..(xi + 1) * m];
                *r = (0..m).map(|k| src[k * inner + i] * p[k]).sum();
            }
        });
        out
    };
    let a = pass(&g.values); // [k2][k3][x1]
    let b = pass(&a); // [k3][x1][x2]
    pass(&b) // [x1][x2][x3]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha0() -> LanglandsParam {
        LanglandsParam::imaginary(&[0.3, 0.1, -0.15]).unwrap()
    }

    #[test]
    fn lattice_counts() {
        let a = alpha0();
        assert_eq!(pole_lattice(&a, Axis::S1, 0).len(), 4);
        assert_eq!(pole_lattice(&a, Axis::S2, 0).len(), 6);
        assert_eq!(pole_lattice(&a, Axis::S3, 1).len(), 8);
        let p1: Vec<C> = pole_lattice(&a, Axis::S1, 0).iter().map(|p| p.base).collect();
        let al = a.alpha();
        assert_eq!(p1, al.iter().map(|x| -x).collect::<Vec<_>>());
    }

    #[test]
    fn shift_denominator_zeros() {
        let a = alpha0();
        let al = a.a4();
        let d = shift_denominators(&a, [-al[1], C::new(1.0, 0.2), C::new(0.4, 0.0)]);
        assert_eq!(d.b1, C::new(0.0, 0.0));
        let s = [C::new(0.3, 1.0), C::new(0.7, -0.4), C::new(1.1, 0.5)];
        let d = shift_denominators(&a, s);
        let d2 = shift_denominators(&a.neg(), [s[2], s[1], s[0]]);
        assert!((d.b3 - d2.b1).norm() < 1e-14 * d.b3.norm());
    }

    #[test]
    fn residue_symmetric_in_tail() {
        let a = alpha0().a4();
        let sr = [C::new(2.0, 0.3), C::new(1.5, -0.2)];
        let r0 = residue_gamma_product(&a, Axis::S1, sr);
        let r1 = residue_gamma_product(&[a[0], a[3], a[1], a[2]], Axis::S1, sr);
        assert!((r0 - r1).norm() < 1e-12 * r0.norm());
    }

    #[test]
    fn involution_of_residue_formulas() {
        // Res_{s3=α1} M̃_α(s1,s2,·) against Res_{s1=−(−α)1} M̃_{−α}(·,s2,s1).
        let a = alpha0();
        let (s1, s2) = (C::new(1.3, 0.2), C::new(1.7, -0.1));
        let p3 = pole_lattice(&a, Axis::S3, 0)[0];
        let r3 = mellin_residue(&a, &p3, [s1, s2]).unwrap();
        let na = a.neg();
        let p1 = pole_lattice(&na, Axis::S1, 0)[0];
        let r1 = mellin_residue(&na, &p1, [s2, s1]).unwrap();
        assert!((r3 - r1).norm() < 1e-12 * r3.norm());
    }

    #[test]
    fn degenerate_alpha_rejected() {
        let a = LanglandsParam::imaginary(&[0.1, 0.1, -0.3]).unwrap();
        let p = pole_lattice(&a, Axis::S1, 0)[0];
        assert!(matches!(
            mellin_residue(&a, &p, [C::new(2.0, 0.0), C::new(2.0, 0.0)]),
            Err(WhittakerError::Degenerate(1, 2))
        ));
    }

    #[test]
    fn transform_is_finite_and_conjugate_symmetric() {
        let a = alpha0();
        let s = [C::new(0.8, 0.5), C::new(1.0, -1.0), C::new(0.6, 0.25)];
        let v = mellin(&a, s).unwrap();
        let sc = [s[0].conj(), s[1].conj(), s[2].conj()];
        let w = mellin(&a.conj(), sc).unwrap();
        assert!((v.value - w.value.conj()).norm() < 1e-10 * v.value.norm());
        assert!(v.error < 1e-8 * v.value.norm());
    }
}
