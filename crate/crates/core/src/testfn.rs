//! The spectral test function p♯_{T,R}, its polynomial factor F_R, the
//! weights h^{(n)}_{T,R}, the product K_R and the main-term integral.

use crate::params::{permutations4, LanglandsParam};
use crate::special::{gauss_legendre, lgamma};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestFnError {
    #[error("need T > 1 and R >= 1, got T = {t}, R = {r}")]
    Params { t: f64, r: f64 },
    #[error("α must be purely imaginary (entry {0} has real part {1})")]
    NotImaginary(usize, f64),
    #[error("rank must be 2, 3 or 4, got {0}")]
    Rank(usize),
    #[error("Gamma pole at argument {0}")]
    GammaPole(String),
    #[error("τ must be non-increasing, got {0:?}")]
    Ordering(Vec<f64>),
    #[error("T-coordinates must be non-negative, got {0:?}")]
    Negative([f64; 3]),
    #[error("main-term quadrature error {err:e} exceeds 1% of {value:e}")]
    Quadrature { value: f64, err: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestParams {
    pub t: f64,
    pub r: f64,
}

impl TestParams {
    pub fn new(t: f64, r: f64) -> Result<Self, TestFnError> {
        if !(t > 1.0 && r >= 1.0) {
            return Err(TestFnError::Params { t, r });
        }
        Ok(TestParams { t, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MainTermResult {
    pub value: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub quad_error: f64,
}

fn check_imaginary(a: &[C]) -> Result<(), TestFnError> {
    for (i, x) in a.iter().enumerate() {
        if x.re.abs() > 1e-12 {
            return Err(TestFnError::NotImaginary(i + 1, x.re));
        }
    }
    Ok(())
}

/// F_R from the three squared-modulus factors.
pub fn f_r(alpha: &LanglandsParam, r: f64) -> Result<f64, TestFnError> {
    let a = alpha.a4();
    check_imaginary(&a)?;
    Ok(f_r_tau([a[0].im, a[1].im, a[2].im, a[3].im], r))
}

fn f_r_tau(t: [f64; 4], r: f64) -> f64 {
    let q = |x: f64| 1.0 + x * x;
    let prod = q(t[0] + t[1] - t[2] - t[3]) * q(t[0] + t[2] - t[1] - t[3]) * q(t[0] + t[3] - t[1] - t[2]);
    prod.powf(r / 6.0)
}

/// F_R from the product over S4, raised to R/24. The 24 factors pair into
/// conjugates for imaginary α, so the logarithm sum is real up to rounding.
pub fn f_r_s4_product(alpha: &LanglandsParam, r: f64) -> C {
    let a = alpha.a4();
    let lsum: C = permutations4()
        .iter()
        .map(|s| (1.0 + a[s[0]] - a[s[1]] - a[s[2]] + a[s[3]]).ln())
        .sum();
    (lsum * (r / 24.0)).exp()
}

fn ln_gamma_checked(z: C) -> Result<C, TestFnError> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(TestFnError::GammaPole(format!("{z}")));
    }
    Ok(lgamma(z))
}

/// ln p♯^{(n)}_{T,R}(α) for rank n = α.len() ∈ {2,3,4}; F_R enters only for n = 4.
pub fn ln_p_sharp_n(alpha: &[C], tp: &TestParams) -> Result<C, TestFnError> {
    let n = alpha.len();
    if !(2..=4).contains(&n) {
        return Err(TestFnError::Rank(n));
    }
    let mut l: C = alpha.iter().map(|x| x * x).sum::<C>() / (2.0 * tp.t * tp.t);
    if n == 4 {
        check_imaginary(alpha)?;
        l += f_r_tau([alpha[0].im, alpha[1].im, alpha[2].im, alpha[3].im], tp.r).ln();
    }
    for j in 0..n {
        for k in 0..n {
            if j != k {
                l += ln_gamma_checked((2.0 + tp.r + alpha[j] - alpha[k]) / 4.0)?;
            }
        }
    }
    Ok(l)
}

pub fn p_sharp(alpha: &LanglandsParam, tp: &TestParams) -> Result<C, TestFnError> {
    Ok(ln_p_sharp_n(&alpha.a4(), tp)?.exp())
}

/// h^{(n)}_{T,R} = |p♯^{(n)}|² / ∏_{j≠k} Γ((1+α_j−α_k)/2).
pub fn h_tr_n(alpha: &[C], n: usize, tp: &TestParams) -> Result<f64, TestFnError> {
    if alpha.len() != n {
        return Err(TestFnError::Rank(alpha.len()));
    }
    check_imaginary(alpha)?;
    let mut l = 2.0 * ln_p_sharp_n(alpha, tp)?.re;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                l -= ln_gamma_checked((1.0 + alpha[j] - alpha[k]) / 2.0)?.re;
            }
        }
    }
    Ok(l.exp())
}

/// K_R(τ) for τ1 ≥ τ2 ≥ τ3 ≥ τ4.
pub fn k_r(tau: [f64; 4], r: f64) -> Result<f64, TestFnError> {
    if tau.windows(2).any(|w| w[0] < w[1]) {
        return Err(TestFnError::Ordering(tau.to_vec()));
    }
    let t = tau;
    let mut v = (1.0 + (t[0] + t[1] - t[2] - t[3]).abs()).powf(r / 3.0)
        * (1.0 + (t[0] + t[2] - t[1] - t[3]).abs()).powf(r / 3.0)
        * (1.0 + (t[0] + t[3] - t[1] - t[2]).abs()).powf(r / 3.0);
    for j in 0..4 {
        for k in j + 1..4 {
            v *= (1.0 + t[j] - t[k]).powf(1.0 + r / 2.0);
        }
    }
    Ok(v)
}

/// K_R in the coordinates T_j = τ_j − τ_{j+1} (the displayed product, not
/// the bound that follows it).
pub fn k_r_t(t1: f64, t2: f64, t3: f64, r: f64) -> Result<f64, TestFnError> {
    if t1 < 0.0 || t2 < 0.0 || t3 < 0.0 {
        return Err(TestFnError::Negative([t1, t2, t3]));
    }
    let a = r / 3.0;
    let b = 1.0 + r / 2.0;
    Ok((1.0 + t1 + 2.0 * t2 + t3).powf(a)
        * (1.0 + t1 + t3).powf(a)
        * (1.0 + (t1 - t3).abs()).powf(a)
        * [t1, t2, t3, t1 + t2, t2 + t3, t1 + t2 + t3]
            .iter()
            .map(|x| (1.0 + x).powf(b))
            .product::<f64>())
}

fn tau4(tau: [f64; 3]) -> [f64; 4] {
    [tau[0], tau[1], tau[2], -tau[0] - tau[1] - tau[2]]
}

fn gaussian(t: &[f64; 4], tp: &TestParams) -> f64 {
    // |exp(Σα²/(2T²))|² with α = iτ
    (-t.iter().map(|x| x * x).sum::<f64>() / (tp.t * tp.t)).exp()
}

fn pair_forms(t: &[f64; 4]) -> [f64; 6] {
    [t[0] - t[1], t[0] - t[2], t[1] - t[2], t[0] - t[3], t[1] - t[3], t[2] - t[3]]
}

/// |p♯(iτ)|² / ∏_{j≠k} Γ((α_j−α_k)/2), the exact main-term integrand.
pub fn main_term_integrand_direct(tau: [f64; 3], tp: &TestParams) -> Result<f64, TestFnError> {
    let t = tau4(tau);
    let a: Vec<C> = t.iter().map(|x| C::new(0.0, *x)).collect();
    let mut l = 2.0 * ln_p_sharp_n(&a, tp)?.re;
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                l -= ln_gamma_checked((a[j] - a[k]) / 2.0)?.re;
            }
        }
    }
    Ok(l.exp())
}

/// The Stirling-reduced integrand: Gaussian · |F_R|² · ∏(1+|τ_j−τ_k|)^{1+R}.
pub fn main_term_integrand_stirling(tau: [f64; 3], tp: &TestParams) -> f64 {
    let t = tau4(tau);
    let f = f_r_tau(t, tp.r);
    gaussian(&t, tp) * f * f * pair_forms(&t).iter().map(|x| (1.0 + x.abs()).powf(1.0 + tp.r)).product::<f64>()
}

/// Leading Stirling term of the direct integrand, constants included:
/// (π 4^{−R})^6 · Gaussian · |F_R|² · ∏|τ_j−τ_k|^{1+R}.
pub fn main_term_integrand_leading(tau: [f64; 3], tp: &TestParams) -> f64 {
    let t = tau4(tau);
    let f = f_r_tau(t, tp.r);
    let c = (PI * 4f64.powf(-tp.r)).powi(6);
    c * gaussian(&t, tp) * f * f * pair_forms(&t).iter().map(|x| x.abs().powf(1.0 + tp.r)).product::<f64>()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainTermQuad {
    /// Integration box [0, extent·T] in each T-coordinate.
    pub extent: f64,
    /// Panels per unit of T in the scaled variable.
    pub panels_per_unit: usize,
    pub nodes: usize,
}

impl Default for MainTermQuad {
    fn default() -> Self {
        MainTermQuad { extent: 10.0, panels_per_unit: 1, nodes: 8 }
    }
}

fn gl_nodes(lo: f64, hi: f64, panels: usize, n: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre::<f64>(n);
    let w = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let (a, b) = (lo + w * p as f64, lo + w * (p + 1) as f64);
        for (x, wt) in rule.x.iter().zip(rule.w.iter()) {
            out.push((0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * wt));
        }
    }
    out
}

fn chamber_integral(tp: &TestParams, q: &MainTermQuad, nodes: usize) -> f64 {
    // τ = T·(3x1+2x2+x3, −x1+2x2+x3, −x1−2x2+x3, −x1−2x2−3x3)/4 over x ≥ 0,
    // dτ1dτ2dτ3 = (T³/4) dx. The |x1−x3| kink is a panel break.
    let panels = (q.extent * q.panels_per_unit as f64).ceil() as usize;
    let outer = gl_nodes(0.0, q.extent, panels, nodes);
    let t = tp.t;
    let f = |x1: f64, x2: f64, x3: f64| {
        let tau = [
            t * (3.0 * x1 + 2.0 * x2 + x3) / 4.0,
            t * (-x1 + 2.0 * x2 + x3) / 4.0,
            t * (-x1 - 2.0 * x2 + x3) / 4.0,
        ];
        main_term_integrand_stirling(tau, tp)
    };
    let sum: f64 = outer
        .par_iter()
        .map(|&(x1, w1)| {
            let mid = ((x1 * q.panels_per_unit as f64).ceil() as usize).max(1);
            let mut inner3 = gl_nodes(0.0, x1, mid, nodes);
            inner3.extend(gl_nodes(x1, q.extent, panels.saturating_sub(mid).max(1), nodes));
            let mut acc = 0.0;
            for &(x2, w2) in &outer {
                for &(x3, w3) in &inner3 {
                    acc += w2 * w3 * f(x1, x2, x3);
                }
            }
            acc * w1
        })
        .sum();
    sum * t * t * t / 4.0
}

/// 𝓜 with 𝔠4 = 1: 24 times the Weyl-chamber integral of the Stirling-reduced
/// integrand. The error is the change from halving the panel order.
pub fn main_term_integral(tp: &TestParams, q: &MainTermQuad) -> Result<MainTermResult, TestFnError> {
    let fine = 24.0 * chamber_integral(tp, q, 2 * q.nodes);
    let coarse = 24.0 * chamber_integral(tp, q, q.nodes);
    let err = (fine - coarse).abs();
    if !(err < 0.01 * fine) {
        return Err(TestFnError::Quadrature { value: fine, err });
    }
    Ok(MainTermResult { value: fine, t: tp.t, r: tp.r, quad_error: err })
}

/// Least-squares slope of ln(value) against ln(T).
pub fn fitted_slope(results: &[MainTermResult]) -> f64 {
    let xs: Vec<f64> = results.iter().map(|r| r.t.ln()).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.value.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_r_examples() {
        let z = LanglandsParam::imaginary(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f_r(&z, 3.0).unwrap(), 1.0);
        let a = LanglandsParam::imaginary(&[1.0, 1.0, -1.0]).unwrap();
        assert!((f_r(&a, 6.0).unwrap() - 17.0).abs() < 1e-12);
        let b = LanglandsParam::new(&[C::new(0.1, 0.0), C::new(-0.1, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert!(matches!(f_r(&b, 1.0), Err(TestFnError::NotImaginary(1, _))));
    }

    #[test]
    fn p_sharp_at_zero() {
        let tp = TestParams::new(5.0, 2.0).unwrap();
        let z = LanglandsParam::imaginary(&[0.0, 0.0, 0.0]).unwrap();
        let expect = lgamma(C::new(1.0, 0.0)).re * 12.0;
        assert!((p_sharp(&z, &tp).unwrap().re.ln() - expect).abs() < 1e-12);
        let tp3 = TestParams::new(5.0, 3.0).unwrap();
        let g = lgamma(C::new(1.25, 0.0)).re;
        assert!((p_sharp(&z, &tp3).unwrap().re.ln() - 12.0 * g).abs() < 1e-12);
    }

    #[test]
    fn h_examples() {
        let tp = TestParams::new(3.0, 2.0).unwrap();
        let z2 = [C::new(0.0, 0.0); 2];
        let expect = 4.0 * lgamma(C::new(1.0, 0.0)).re - 2.0 * lgamma(C::new(0.5, 0.0)).re;
        assert!((h_tr_n(&z2, 2, &tp).unwrap().ln() - expect).abs() < 1e-12);
        let z4 = [C::new(0.0, 0.0); 4];
        let expect = 24.0 * lgamma(C::new(1.0, 0.0)).re - 12.0 * lgamma(C::new(0.5, 0.0)).re;
        assert!((h_tr_n(&z4, 4, &tp).unwrap().ln() - expect).abs() < 1e-12);
    }

    #[test]
    fn k_r_forms_agree() {
        assert_eq!(k_r([0.0; 4], 2.0).unwrap(), 1.0);
        let a = k_r([3.0, 1.0, -1.0, -3.0], 2.0).unwrap();
        let b = k_r_t(2.0, 2.0, 2.0, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let r0 = k_r([3.0, 1.0, -1.0, -3.0], 0.0).unwrap();
        assert!((r0 - 3.0 * 5.0 * 7.0 * 3.0 * 5.0 * 3.0).abs() < 1e-9);
        assert!(k_r([0.0, 1.0, -1.0, 0.0], 1.0).is_err());
    }
}
