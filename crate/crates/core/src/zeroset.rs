//! The exponential term 𝓔 of the test-function integrand and its zero set.
//!
//! Variables are ordered (τ1, τ2, τ3, ρ, ξ1, ξ2, ξ3) with τ4 = −τ1−τ2−τ3.
//! A sign vector replaces each |L| by ε·L; it solves the problem when the
//! resulting linear form vanishes identically, and its region {ε·L ≥ 0}
//! inside the ordered chamber is then a piece of the zero set.

use crate::lp::{maximize, q, LpResult, Q};
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

pub const NVARS: usize = 7;
pub const SIGN_LABELS: [&str; 14] = [
    "t,1", "t,2", "1,0", "1,1", "1,2", "2,0", "2,1", "2,2", "2,3", "3,0", "3,1", "3,2", "2-1/2", "2+1/2",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroSetError {
    #[error("τ must satisfy τ1 ≥ τ2 ≥ τ3 ≥ −τ1−τ2−τ3, got {0:?}")]
    Ordering([f64; 3]),
    #[error("sign vector {0:?} does not give an identically vanishing form")]
    NotSurvivor([i8; 14]),
}

pub type SignVector = [i8; 14];
pub type LinearForm = [i64; NVARS];

/// The 14 forms inside the absolute values, in label order.
pub fn abs_forms() -> [LinearForm; 14] {
    //    τ1  τ2  τ3  ρ  ξ1 ξ2 ξ3
    [
        [1, 1, 1, 1, 0, 0, 0],   // ρ − τ4
        [0, 0, -1, 1, 0, 0, 0],  // ρ − τ3
        [1, 0, 0, 0, 1, 0, 0],   // ξ1 + τ1
        [0, 1, 0, 0, 1, 0, 0],   // ξ1 + τ2
        [0, 0, 0, 1, 1, 0, 0],   // ξ1 + ρ
        [1, 1, 0, 0, 0, 1, 0],   // ξ2 + τ1 + τ2
        [1, 0, 0, 1, 0, 1, 0],   // ξ2 + τ1 + ρ
        [0, 1, 0, 1, 0, 1, 0],   // ξ2 + τ2 + ρ
        [-1, -1, 0, 0, 0, 1, 0], // ξ2 + τ3 + τ4
        [1, 1, 0, 1, 0, 0, 1],   // ξ3 + τ1 + τ2 + ρ
        [0, -1, 0, 0, 0, 0, 1],  // ξ3 + τ1 + τ3 + τ4
        [-1, 0, 0, 0, 0, 0, 1],  // ξ3 + τ2 + τ3 + τ4
        [1, 1, 0, 1, 1, 1, 0],   // ξ1 + ξ2 + τ1 + τ2 + ρ
        [0, 0, 0, 1, 0, 1, 1],   // ρ + ξ2 + ξ3
    ]
}

/// Sign with which each |·| enters 𝓔.
pub const OUTER_SIGN: [i64; 14] = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, -1, -1];
pub const BASE: LinearForm = [-6, -4, -2, 0, 0, 0, 0];

fn dot(f: &LinearForm, x: &[f64; NVARS]) -> f64 {
    f.iter().zip(x).map(|(a, b)| *a as f64 * b).sum()
}

fn pack(xi: [f64; 3], tau: [f64; 3], rho: f64) -> [f64; NVARS] {
    [tau[0], tau[1], tau[2], rho, xi[0], xi[1], xi[2]]
}

pub fn in_chamber(tau: [f64; 3]) -> bool {
    let t4 = -tau[0] - tau[1] - tau[2];
    tau[0] >= tau[1] && tau[1] >= tau[2] && tau[2] >= t4
}

pub fn exp_term(xi: [f64; 3], tau: [f64; 3], rho: f64) -> Result<f64, ZeroSetError> {
    if !in_chamber(tau) {
        return Err(ZeroSetError::Ordering(tau));
    }
    Ok(exp_term_unchecked(&pack(xi, tau, rho)))
}

pub fn exp_term_unchecked(x: &[f64; NVARS]) -> f64 {
    let mut e = dot(&BASE, x);
    for (f, s) in abs_forms().iter().zip(OUTER_SIGN) {
        e += s as f64 * dot(f, x).abs();
    }
    e
}

/// Total linear form after resolving the absolute values with `eps`.
pub fn resolved_form(eps: &SignVector) -> LinearForm {
    let mut tot = BASE;
    for (i, f) in abs_forms().iter().enumerate() {
        for j in 0..NVARS {
            tot[j] += OUTER_SIGN[i] * eps[i] as i64 * f[j];
        }
    }
    tot
}

pub fn vanishes_identically(eps: &SignVector) -> bool {
    resolved_form(eps).iter().all(|&c| c == 0)
}

/// Inequalities a·x ≤ b over the 7 variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyhedron {
    pub a: Vec<[i64; NVARS]>,
    pub b: Vec<i64>,
}

impl Polyhedron {
    fn push(&mut self, a: [i64; NVARS], b: i64) {
        self.a.push(a);
        self.b.push(b);
    }

    /// Adds the chamber τ1 ≥ τ2 ≥ τ3 ≥ τ4.
    pub fn chamber() -> Self {
        let mut p = Polyhedron { a: vec![], b: vec![] };
        p.push([-1, 1, 0, 0, 0, 0, 0], 0);
        p.push([0, -1, 1, 0, 0, 0, 0], 0);
        p.push([-1, -1, -2, 0, 0, 0, 0], 0); // τ4 ≤ τ3
        p
    }

    /// Adds lo ≤ form ≤ hi given as forms (lo − x ≤ 0 and x − hi ≤ 0).
    fn between(&mut self, lo: LinearForm, x: LinearForm, hi: LinearForm) {
        let mut l = [0; NVARS];
        let mut h = [0; NVARS];
        for j in 0..NVARS {
            l[j] = lo[j] - x[j];
            h[j] = x[j] - hi[j];
        }
        self.push(l, 0);
        self.push(h, 0);
    }

    pub fn contains(&self, x: &[f64; NVARS], tol: f64) -> bool {
        self.a.iter().zip(&self.b).all(|(a, &b)| dot(a, x) <= b as f64 + tol)
    }

    fn with_slice(&self, bound: i64) -> (Vec<Vec<Q>>, Vec<Q>) {
        let mut a: Vec<Vec<Q>> = self.a.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
        let mut b: Vec<Q> = self.b.iter().map(|&v| q(v)).collect();
        // |τ_i| ≤ bound; the other variables get a loose box to keep LPs bounded
        for j in 0..NVARS {
            let lim = if j < 3 { bound } else { 100 * bound };
            let mut e = vec![q(0); NVARS];
            e[j] = q(1);
            a.push(e.clone());
            b.push(q(lim));
            e[j] = q(-1);
            a.push(e);
            b.push(q(lim));
        }
        (a, b)
    }

    /// Largest common slack s ≤ 1 with a·x + s ≤ b for every inequality
    /// (the chamber rows included); positive iff the set is full-dimensional.
    pub fn interior_slack(&self, bound: i64) -> Option<(Q, Vec<Q>)> {
        let (mut a, b) = self.with_slice(bound);
        let m = self.a.len();
        for (i, row) in a.iter_mut().enumerate() {
            row.push(if i < m { q(1) } else { q(0) });
        }
        let mut cap = vec![q(0); NVARS + 1];
        cap[NVARS] = q(1);
        a.push(cap);
        let mut b = b;
        b.push(q(1));
        let mut c = vec![q(0); NVARS + 1];
        c[NVARS] = q(1);
        match maximize(&c, &a, &b) {
            LpResult::Optimal { value, x } => Some((value, x[..NVARS].to_vec())),
            _ => None,
        }
    }

    /// Max of f·x over the set on the slice, None when empty.
    pub fn max_form(&self, f: &[Q], bound: i64) -> Option<Q> {
        let (a, b) = self.with_slice(bound);
        match maximize(f, &a, &b) {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    /// self ⊆ other on the slice |τ| ≤ bound (other's rows checked one by one).
    pub fn subset_of(&self, other: &Polyhedron, bound: i64) -> bool {
        other.a.iter().zip(&other.b).all(|(row, &rb)| {
            let f: Vec<Q> = row.iter().map(|&v| q(v)).collect();
            match self.max_form(&f, bound) {
                Some(v) => v <= q(rb),
                None => true,
            }
        })
    }

    pub fn equals(&self, other: &Polyhedron, bound: i64) -> bool {
        self.subset_of(other, bound) && other.subset_of(self, bound)
    }

    /// Preimage under the linear map x ↦ M x.
    pub fn pullback(&self, m: &[[i64; NVARS]; NVARS]) -> Polyhedron {
        let a = self
            .a
            .iter()
            .map(|row| {
                let mut r = [0; NVARS];
                for (i, ri) in row.iter().enumerate() {
                    for j in 0..NVARS {
                        r[j] += ri * m[i][j];
                    }
                }
                r
            })
            .collect();
        Polyhedron { a, b: self.b.clone() }
    }

    /// Hit-and-run samples starting from an interior point on the slice.
    pub fn sample<R: Rng>(&self, rng: &mut R, start: [f64; NVARS], n: usize, bound: f64) -> Vec<[f64; NVARS]> {
        let mut rows: Vec<([f64; NVARS], f64)> =
            self.a.iter().zip(&self.b).map(|(r, &b)| (r.map(|v| v as f64), b as f64)).collect();
        for j in 0..3 {
            let mut e = [0.0; NVARS];
            e[j] = 1.0;
            rows.push((e, bound));
            e[j] = -1.0;
            rows.push((e, bound));
        }
        let mut x = start;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut d = [0.0; NVARS];
            for v in d.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for (a, b) in &rows {
                let ad: f64 = a.iter().zip(&d).map(|(p, q)| p * q).sum();
                let slack = b - a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>();
                if ad > 1e-14 {
                    hi = hi.min(slack / ad);
                } else if ad < -1e-14 {
                    lo = lo.max(slack / ad);
                }
            }
            if lo.is_finite() && hi.is_finite() && lo < hi {
                let t = rng.gen_range(lo..hi);
                for j in 0..NVARS {
                    x[j] += t * d[j];
                }
                out.push(x);
            }
        }
        out
    }
}

/// Region {ε_i·L_i ≥ 0} ∩ chamber.
pub fn sign_region(eps: &SignVector) -> Polyhedron {
    let mut p = Polyhedron::chamber();
    for (f, &e) in abs_forms().iter().zip(eps) {
        p.push(f.map(|c| -(e as i64) * c), 0);
    }
    p
}

pub fn region_of(eps: &SignVector) -> Result<Polyhedron, ZeroSetError> {
    if !vanishes_identically(eps) {
        return Err(ZeroSetError::NotSurvivor(*eps));
    }
    Ok(sign_region(eps))
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub total: usize,
    /// sign vectors whose resolved form is identically zero
    pub vanishing: Vec<SignVector>,
    /// those among them whose region has interior (the survivors)
    pub survivors: Vec<SignVector>,
}

pub const SLICE: i64 = 10;

pub fn enumerate_signs() -> Enumeration {
    let mut vanishing = Vec::new();
    for mask in 0u32..(1 << 14) {
        let mut eps = [0i8; 14];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = if mask >> (13 - i) & 1 == 0 { 1 } else { -1 };
        }
        if vanishes_identically(&eps) {
            vanishing.push(eps);
        }
    }
    let survivors = vanishing
        .iter()
        .filter(|e| matches!(sign_region(e).interior_slack(SLICE), Some((s, _)) if s.is_positive()))
        .cloned()
        .collect();
    Enumeration { total: 1 << 14, vanishing, survivors }
}

pub fn enumerate_sign_solutions() -> Vec<SignVector> {
    enumerate_signs().survivors
}

fn lin(c: &[(usize, i64)]) -> LinearForm {
    let mut f = [0; NVARS];
    for &(j, v) in c {
        f[j] += v;
    }
    f
}

const T1: usize = 0;
const T2: usize = 1;
const T3: usize = 2;
const RHO: usize = 3;
const X1: usize = 4;
const X2: usize = 5;
const X3: usize = 6;

fn common_rho(p: &mut Polyhedron) {
    // τ4 ≤ ρ ≤ τ3
    p.between(lin(&[(T1, -1), (T2, -1), (T3, -1)]), lin(&[(RHO, 1)]), lin(&[(T3, 1)]));
}

/// The three regions as displayed in the lemma, indexed 1..=3.
pub fn lemma_region(k: usize) -> Polyhedron {
    let mut p = Polyhedron::chamber();
    common_rho(&mut p);
    match k {
        1 => {
            p.between(lin(&[(T2, -1)]), lin(&[(X1, 1)]), lin(&[(RHO, -1)]));
            p.between(lin(&[(T2, -1), (RHO, -1)]), lin(&[(X2, 1)]), lin(&[(T1, 1), (T2, 1)]));
            p.between(lin(&[(T2, 1)]), lin(&[(X3, 1)]), lin(&[(T1, 1)]));
        }
        2 => {
            p.between(lin(&[(T2, -1)]), lin(&[(X1, 1)]), lin(&[(RHO, -1)]));
            p.between(lin(&[(T1, -1), (RHO, -1)]), lin(&[(X2, 1)]), lin(&[(T2, -1), (RHO, -1)]));
            p.between(lin(&[(T1, -1), (T2, -1), (RHO, -1)]), lin(&[(X3, 1)]), lin(&[(T2, 1)]));
        }
        3 => {
            p.between(lin(&[(T1, -1)]), lin(&[(X1, 1)]), lin(&[(T2, -1)]));
            p.between(lin(&[(T1, -1), (T2, -1)]), lin(&[(X2, 1)]), lin(&[(T1, -1), (RHO, -1)]));
            p.between(lin(&[(T1, -1), (T2, -1), (RHO, -1)]), lin(&[(X3, 1)]), lin(&[(T2, 1)]));
        }
        _ => panic!("lemma regions are numbered 1..=3"),
    }
    p
}

/// Which lemma region a survivor corresponds to, from (ε_{2−1/2}, ε_{2+1/2}).
pub fn lemma_index(eps: &SignVector) -> Option<usize> {
    match (eps[12], eps[13]) {
        (1, 1) => Some(1),
        (1, -1) => Some(2),
        (-1, -1) => Some(3),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapCheck {
    pub name: String,
    /// x ↦ M x as substitutions on the 7 variables
    pub matrix: [[i64; NVARS]; NVARS],
    pub det: i64,
    pub source: usize,
    pub target: usize,
    /// M(source) ⊆ target, exact LP on the slice
    pub into: bool,
    /// target ⊆ M(source), i.e. M⁻¹(target) ⊆ source
    pub onto: bool,
    pub sampled: usize,
    pub counterexample: Option<[f64; NVARS]>,
}

fn substitution(changes: &[(usize, LinearForm)]) -> [[i64; NVARS]; NVARS] {
    let mut m = [[0; NVARS]; NVARS];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    for (i, f) in changes {
        m[*i] = *f;
    }
    m
}

fn det7(m: &[[i64; NVARS]; NVARS]) -> i64 {
    // fraction-free Gaussian elimination (Bareiss)
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let n = NVARS;
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

fn apply(m: &[[i64; NVARS]; NVARS], x: &[f64; NVARS]) -> [f64; NVARS] {
    let mut y = [0.0; NVARS];
    for i in 0..NVARS {
        y[i] = m[i].iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
    }
    y
}

pub fn check_map<R: Rng>(
    name: &str,
    m: [[i64; NVARS]; NVARS],
    source: usize,
    target: usize,
    rng: &mut R,
    samples: usize,
) -> MapCheck {
    let src = lemma_region(source);
    let tgt = lemma_region(target);
    let pre = tgt.pullback(&m);
    let into = src.subset_of(&pre, SLICE);
    let onto = pre.subset_of(&src, SLICE);
    let mut counterexample = None;
    if let Some((_, x0)) = src.interior_slack(SLICE) {
        let start: Vec<f64> = x0.iter().map(to_f64).collect();
        let start: [f64; NVARS] = start.try_into().unwrap();
        for x in src.sample(rng, start, samples, SLICE as f64) {
            if !tgt.contains(&apply(&m, &x), 1e-9) {
                counterexample = Some(x);
                break;
            }
        }
    }
    MapCheck { name: name.into(), matrix: m, det: det7(&m), source, target, into, onto, sampled: samples, counterexample }
}

pub fn to_f64(v: &Q) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

/// The printed changes of variables and their corrected forms.
pub fn region_maps() -> Vec<(&'static str, [[i64; NVARS]; NVARS], usize, usize)> {
    vec![
        (
            "printed (ξ2,ξ3) ↦ (−ξ3−ρ, ξ2−τ1), R2 → R1",
            substitution(&[(X2, lin(&[(X3, -1), (RHO, -1)])), (X3, lin(&[(X2, 1), (T1, -1)]))]),
            2,
            1,
        ),
        (
            "printed (ξ2,ξ3) ↦ (−ξ3−ρ, ξ2−τ1), R1 → R2",
            substitution(&[(X2, lin(&[(X3, -1), (RHO, -1)])), (X3, lin(&[(X2, 1), (T1, -1)]))]),
            1,
            2,
        ),
        (
            "corrected (ξ2,ξ3) ↦ (−ξ3−ρ, −ξ2−ρ), R2 → R1",
            substitution(&[(X2, lin(&[(X3, -1), (RHO, -1)])), (X3, lin(&[(X2, -1), (RHO, -1)]))]),
            2,
            1,
        ),
        (
            "printed (ξ1,ξ2) ↦ (ξ2−τ1, −ξ1+ρ), R2 → R3",
            substitution(&[(X1, lin(&[(X2, 1), (T1, -1)])), (X2, lin(&[(X1, -1), (RHO, 1)]))]),
            2,
            3,
        ),
        (
            "printed (ξ1,ξ2) ↦ (ξ2−τ1, −ξ1+ρ), R3 → R2",
            substitution(&[(X1, lin(&[(X2, 1), (T1, -1)])), (X2, lin(&[(X1, -1), (RHO, 1)]))]),
            3,
            2,
        ),
        (
            "corrected (ξ1,ξ2) ↦ (ξ2+ρ, ξ1−τ1), R2 → R3",
            substitution(&[(X1, lin(&[(X2, 1), (RHO, 1)])), (X2, lin(&[(X1, 1), (T1, -1)]))]),
            2,
            3,
        ),
    ]
}

pub fn verify_region_maps<R: Rng>(rng: &mut R, samples: usize) -> Vec<MapCheck> {
    region_maps()
        .into_iter()
        .map(|(name, m, s, t)| check_map(name, m, s, t, rng, samples))
        .collect()
}

/// An exact interior point of a survivor region, as f64.
pub fn interior_point(p: &Polyhedron) -> Option<[f64; NVARS]> {
    let (s, x) = p.interior_slack(SLICE)?;
    if !s.is_positive() || s.is_zero() {
        return None;
    }
    let v: Vec<f64> = x.iter().map(to_f64).collect();
    v.try_into().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(exp_term([0.0; 3], [0.0; 3], 0.0).unwrap(), 0.0);
        let e = exp_term([0.5, 1.0, 1.5], [2.0, 1.0, 0.0], -1.5).unwrap();
        assert!(e.abs() < 1e-12, "{e}");
        assert!(exp_term([0.5, 1.0, 1.5], [2.0, 1.0, 0.0], 1.0).unwrap() > 0.0);
        assert!(exp_term([0.0; 3], [0.0, 1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn resolved_form_of_all_plus() {
        let f = resolved_form(&[1; 14]);
        let mut expect = BASE;
        for (i, g) in abs_forms().iter().enumerate() {
            for j in 0..NVARS {
                expect[j] += OUTER_SIGN[i] * g[j];
            }
        }
        assert_eq!(f, expect);
    }

    #[test]
    fn determinant() {
        let m = substitution(&[(X2, lin(&[(X3, -1), (RHO, -1)])), (X3, lin(&[(X2, -1), (RHO, -1)]))]);
        assert_eq!(det7(&m).abs(), 1);
    }
}
