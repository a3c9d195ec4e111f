//! Additive characters of U4, classical Kloosterman sums and a brute-force
//! GL(4) Kloosterman sum over a Bruhat cell.
//!
//! A cell element is γ = u·c·w·u′ with u ∈ U(Q) and u′ ∈ Ū_w(Q), where
//! Ū_w = (w⁻¹ ᵗU w) ∩ U. The engine enumerates u′ modulo Ū_w(Z) with
//! entries a/D and, for each, solves row by row for u making γ integral.

use crate::params::WeylElement;
use num_complex::Complex64 as C;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

pub type Rat = Ratio<i128>;
pub type Mat = [[Rat; 4]; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KloostermanError {
    #[error("enumeration needs {needed} cells, budget is {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("moduli must be positive, got {0:?}")]
    Modulus([i64; 3]),
    #[error("twist entries must be ±1 with product 1, got {0:?}")]
    Twist([i8; 4]),
    #[error("moduli {0:?} and {1:?} are not coprime")]
    NotCoprime([i64; 3], [i64; 3]),
    #[error("{0} is not prime")]
    NotPrime(i64),
}

pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// e(θ) with θ reduced mod 1 exactly before the single floating step.
pub fn e_rat(theta: Rat) -> C {
    let f = theta - theta.floor();
    let x = *f.numer() as f64 / *f.denom() as f64;
    C::new((2.0 * PI * x).cos(), (2.0 * PI * x).sin())
}

fn r(n: i128) -> Rat {
    Rat::from_integer(n)
}

pub fn identity() -> Mat {
    let mut m = [[Rat::zero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut m = [[Rat::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = Rat::zero();
            for k in 0..4 {
                if !a[i][k].is_zero() && !b[k][j].is_zero() {
                    s += a[i][k] * b[k][j];
                }
            }
            m[i][j] = s;
        }
    }
    m
}

/// ψ_M(u) = e(m1 u12 + m2 u23 + m3 u34).
pub fn psi(m: [i64; 3], u: &Mat) -> C {
    e_rat(psi_phase(m, u))
}

fn psi_phase(m: [i64; 3], u: &Mat) -> Rat {
    (0..3).map(|i| u[i][i + 1] * r(m[i] as i128)).fold(Rat::zero(), |a, b| a + b)
}

pub fn check_twist(v: [i8; 4]) -> Result<(), KloostermanError> {
    if v.iter().any(|x| x.abs() != 1) || v.iter().map(|&x| x as i64).product::<i64>() != 1 {
        return Err(KloostermanError::Twist(v));
    }
    Ok(())
}

/// Character triple of ψ^v_M(u) = ψ_M(v⁻¹ u v): m′_i = m_i v_i v_{i+1}.
pub fn twist_character(m: [i64; 3], v: [i8; 4]) -> [i64; 3] {
    [0, 1, 2].map(|i| m[i] * (v[i] * v[i + 1]) as i64)
}

pub fn psi_twisted(m: [i64; 3], v: [i8; 4], u: &Mat) -> Result<C, KloostermanError> {
    check_twist(v)?;
    let mut conj = *u;
    for i in 0..4 {
        for j in 0..4 {
            conj[i][j] = u[i][j] * r((v[i] * v[j]) as i128);
        }
    }
    Ok(psi(m, &conj))
}

pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as i64)
}

/// S(m, n; c) = Σ_{d mod c, (d,c)=1} e((m d + n d̄)/c).
pub fn classical_kloosterman(m: i64, n: i64, c: i64) -> f64 {
    assert!(c >= 1, "modulus must be positive");
    let mut s = 0.0;
    for d in 0..c {
        if let Some(db) = mod_inverse(d, c) {
            let k = ((m as i128 * d as i128 + n as i128 * db as i128).rem_euclid(c as i128)) as f64;
            s += (2.0 * PI * k / c as f64).cos();
        }
    }
    s
}

pub fn divisor_count(n: u64) -> u64 {
    let mut cnt = 0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            cnt += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    cnt
}

pub fn weil_bound(m: i64, n: i64, c: i64) -> f64 {
    let g = m.gcd(&n).gcd(&c) as f64;
    g.sqrt() * (c as f64).sqrt() * divisor_count(c as u64) as f64
}

fn is_prime(p: i64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn smallest_prime_factor(n: i64) -> Option<i64> {
    (2..=n).find(|d| n % d == 0)
}

/// Diagonal of c = diag(1/c3, c3/c2, c2/c1, c1).
pub fn torus(c: [i64; 3]) -> [Rat; 4] {
    let (c1, c2, c3) = (c[0] as i128, c[1] as i128, c[2] as i128);
    [Rat::new(1, c3), Rat::new(c3, c2), Rat::new(c2, c1), r(c1)]
}

/// Positions (i, j), i < j, of Ū_w: w e_i and w e_j land in inverted order.
pub fn ubar_positions(w: &WeylElement) -> Vec<(usize, usize)> {
    let p = w.perm();
    let mut v = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                v.push((i, j));
            }
        }
    }
    v
}

pub fn u_positions(w: &WeylElement) -> Vec<(usize, usize)> {
    let p = w.perm();
    let mut v = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] < p[j] {
                v.push((i, j));
            }
        }
    }
    v
}

/// ψ_L(c w n w⁻¹ c⁻¹) = ψ_M(n) for all n ∈ U_w, checked on root subgroups.
/// The sum is taken to be zero otherwise.
pub fn compatible(l: [i64; 3], m: [i64; 3], c: [i64; 3], w: &WeylElement) -> bool {
    let d = torus(c);
    let p = w.perm();
    let sign = |j: usize| w.matrix[p[j]][j];
    u_positions(w).iter().all(|&(i, j)| {
        let (a, b) = (p[i], p[j]);
        let lhs = if b == a + 1 {
            r(l[a] as i128 * (sign(i) * sign(j)) as i128) * d[a] / d[b]
        } else {
            Rat::zero()
        };
        let rhs = if j == i + 1 { r(m[i] as i128) } else { Rat::zero() };
        lhs == rhs
    })
}

/// Column operations bringing the k×4 integer matrix R to [H | 0] with H
/// lower triangular; returns (H, V) with R·V = [H | 0], V unimodular.
fn column_hnf(rows: &[[i128; 4]]) -> ([[i128; 4]; 4], [[i128; 4]; 4]) {
    let mut a: Vec<[i128; 4]> = rows.to_vec();
    let mut v = [[0i128; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1;
    }
    let k = a.len();
    let col_op = |a: &mut Vec<[i128; 4]>, v: &mut [[i128; 4]; 4], x: usize, y: usize, m: [[i128; 2]; 2]| {
        // (col_x, col_y) ← (col_x, col_y)·m
        for row in a.iter_mut() {
            let (p, q) = (row[x], row[y]);
            row[x] = p * m[0][0] + q * m[1][0];
            row[y] = p * m[0][1] + q * m[1][1];
        }
        for row in v.iter_mut() {
            let (p, q) = (row[x], row[y]);
            row[x] = p * m[0][0] + q * m[1][0];
            row[y] = p * m[0][1] + q * m[1][1];
        }
    };
    for rr in 0..k {
        for j in rr + 1..4 {
            let (p, q) = (a[rr][rr], a[rr][j]);
            if q == 0 {
                continue;
            }
            let g = p.extended_gcd(&q);
            // [p q]·[[x, −q/g], [y, p/g]] = [g, 0], determinant 1
            col_op(&mut a, &mut v, rr, j, [[g.x, -q / g.gcd], [g.y, p / g.gcd]]);
        }
    }
    let mut h = [[0i128; 4]; 4];
    for (i, row) in a.iter().enumerate() {
        h[i] = *row;
    }
    (h, v)
}

fn is_integral(x: &Rat) -> bool {
    x.is_integer()
}

/// Solve for u with u·A integral (A = c w u′), bottom row first. Returns
/// the superdiagonal of u, or None when the cell is empty.
pub fn row_solve(a: &Mat) -> Option<[Rat; 3]> {
    let mut g: Vec<[i128; 4]> = Vec::new(); // rows g_{i+1}, …, g_4 (nearest first)
    let mut sup = [Rat::zero(); 3];
    for i in (0..4).rev() {
        if g.is_empty() {
            if !a[i].iter().all(is_integral) {
                return None;
            }
            g.push(a[i].map(|x| x.to_integer()));
            continue;
        }
        let k = g.len();
        let (h, v) = column_hnf(&g);
        for d in 0..k {
            if h[d][d].abs() != 1 {
                return None;
            }
        }
        // b = A_i V
        let mut b = [Rat::zero(); 4];
        for (c, bc) in b.iter_mut().enumerate() {
            for t in 0..4 {
                if v[t][c] != 0 {
                    *bc += a[i][t] * r(v[t][c]);
                }
            }
        }
        if !b[k..].iter().all(is_integral) {
            return None;
        }
        // y H = −b[..k], H lower triangular with unit diagonal up to sign
        let mut y = vec![Rat::zero(); k];
        for c in (0..k).rev() {
            let mut s = -b[c];
            for rr in c + 1..k {
                s -= y[rr] * r(h[rr][c]);
            }
            y[c] = s / r(h[c][c]);
        }
        let mut row = [Rat::zero(); 4];
        for t in 0..4 {
            let mut s = a[i][t];
            for (rr, gr) in g.iter().enumerate() {
                s += y[rr] * r(gr[t]);
            }
            debug_assert!(s.is_integer());
            row[t] = s;
        }
        sup[i] = y[0];
        g.insert(0, row.map(|x| x.to_integer()));
    }
    Some(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Saturation {
    /// entries proven to lie in (1/D)Z (long element)
    Proven,
    /// recomputed with denominator D·p, same value and cell count
    Verified,
    /// enlarged enumeration over budget; not checked
    Unchecked,
    /// enlarging the denominator changed the result
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct KloostermanSum {
    pub value: C,
    /// number of u′ cosets giving a cell element (#X)
    pub cells: u64,
    pub enumerated: u128,
    pub denominator: i64,
    pub compatible: bool,
    pub saturation: Saturation,
    /// |S| ≤ c1c2c3
    pub trivial_bound_ok: bool,
    /// #X ≤ c1c2c3 for the cell count as enumerated here
    pub cells_within_bound: bool,
}

pub fn raw_sum(l: [i64; 3], m: [i64; 3], c: [i64; 3], w: &WeylElement, den: i64) -> (C, u64) {
    let pos = ubar_positions(w);
    let dim = pos.len();
    let d = torus(c);
    let mut cw = [[Rat::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            cw[i][j] = d[i] * r(w.matrix[i][j] as i128);
        }
    }
    let total = (den as u128).pow(dim as u32);
    let first = if dim == 0 { 1 } else { den as u128 };
    let rest = total / first;
    let (value, cells) = (0..first)
        .into_par_iter()
        .map(|f| {
            let mut acc = C::new(0.0, 0.0);
            let mut cells = 0u64;
            for idx in 0..rest {
                let mut up = identity();
                let mut code = f * rest + idx;
                for &(i, j) in pos.iter().rev() {
                    up[i][j] = Rat::new((code % den as u128) as i128, den as i128);
                    code /= den as u128;
                }
                let a = mat_mul(&cw, &up);
                if let Some(sup) = row_solve(&a) {
                    cells += 1;
                    let th = (0..3).map(|i| sup[i] * r(l[i] as i128)).fold(Rat::zero(), |x, y| x + y)
                        + psi_phase(m, &up);
                    acc += e_rat(th);
                }
            }
            (acc, cells)
        })
        .reduce(|| (C::new(0.0, 0.0), 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (value, cells)
}

/// S_w(ψ_L, ψ^v_M, c) by enumeration of the Bruhat cell.
pub fn gl4_kloosterman_bruhat(
    l: [i64; 3],
    m: [i64; 3],
    c: [i64; 3],
    w: &WeylElement,
    v: [i8; 4],
    budget: u128,
) -> Result<KloostermanSum, KloostermanError> {
    if c.iter().any(|&x| x < 1) {
        return Err(KloostermanError::Modulus(c));
    }
    check_twist(v)?;
    let mv = twist_character(m, v);
    let den = c[0].lcm(&c[1]).lcm(&c[2]);
    let dim = ubar_positions(w).len() as u32;
    let needed = (den as u128).pow(dim);
    if needed > budget {
        return Err(KloostermanError::Budget { needed, budget });
    }
    let compat = compatible(l, mv, c, w);
    let (raw, cells) = raw_sum(l, mv, c, w, den);
    let saturation = if w.label == 8 || den == 1 {
        Saturation::Proven
    } else {
        let p = smallest_prime_factor(den).unwrap();
        let big = ((den * p) as u128).pow(dim);
        if big > budget {
            Saturation::Unchecked
        } else {
            let (raw2, cells2) = raw_sum(l, mv, c, w, den * p);
            if cells2 == cells && (raw2 - raw).norm() < 1e-9 * (1.0 + raw.norm()) {
                Saturation::Verified
            } else {
                Saturation::Failed
            }
        }
    };
    let value = if compat { raw } else { C::new(0.0, 0.0) };
    let bound = (c[0] * c[1] * c[2]) as f64;
    Ok(KloostermanSum {
        value,
        cells,
        enumerated: needed,
        denominator: den,
        compatible: compat,
        saturation,
        trivial_bound_ok: value.norm() <= bound + 1e-9,
        cells_within_bound: cells as f64 <= bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalW8 {
    pub value: C,
    pub cells: u64,
    pub c8: f64,
    /// C8·min(p^{r+σ+ϱ/2}, p^{ϱ+2σ+r/2})
    pub bound_min: f64,
    /// C8·p^{9(t+r+s)/10}
    pub bound_910: f64,
    pub within_bounds: bool,
}

fn vp(x: i64, p: i64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut x = x.abs();
    let mut k = 0;
    while x % p == 0 {
        x /= p;
        k += 1;
    }
    Some(k)
}

/// Local long-element sum at c = diag(p^{−t}, p^{t−r}, p^{r−s}, p^s),
/// i.e. (c1, c2, c3) = (p^s, p^r, p^t), characters ψ_ν on u and ψ_ν′ on u′.
pub fn gl4_local_w8(
    p: i64,
    t: u32,
    rr: u32,
    s: u32,
    nu: [i64; 3],
    nu2: [i64; 3],
    budget: u128,
) -> Result<LocalW8, KloostermanError> {
    if !is_prime(p) {
        return Err(KloostermanError::NotPrime(p));
    }
    let w8 = WeylElement::new(8).unwrap();
    let c = [p.pow(s), p.pow(rr), p.pow(t)];
    let k = gl4_kloosterman_bruhat(nu, nu2, c, &w8, [1; 4], budget)?;
    let ell = t.max(rr).max(s);
    let varrho = t.max(s) as f64;
    let sigma = t.min(s) as f64;
    let rf = rr as f64;
    let pl = (p as f64).powi(ell as i32);
    let g = |x: i64| -> f64 {
        match vp(x, p) {
            None => pl,
            Some(k) => (p as f64).powi(k.min(ell) as i32),
        }
    };
    let c8 = 64.0
        * (g(nu[0] * nu2[2]) * g(nu[1] * nu2[1]) * g(nu[2] * nu2[0])).sqrt()
        * (varrho + 1.0)
        * (rf + 1.0).powi(2)
        * (sigma + 1.0).powi(2);
    let pf = p as f64;
    let bound_min = c8 * pf.powf(rf + sigma + varrho / 2.0).min(pf.powf(varrho + 2.0 * sigma + rf / 2.0));
    let bound_910 = c8 * pf.powf(0.9 * (t + rr + s) as f64);
    let a = k.value.norm();
    Ok(LocalW8 {
        value: k.value,
        cells: k.cells,
        c8,
        bound_min,
        bound_910,
        within_bounds: a <= bound_min * (1.0 + 1e-12) && a <= bound_910 * (1.0 + 1e-12),
    })
}

/// M twisted by the unit torus of the coprime modulus c′, as seen at the
/// primes of c: m″_i = m_i · D′_{w(i+1)} / D′_{w(i)} mod lcm(c).
pub fn crt_twist(m: [i64; 3], c: [i64; 3], cp: [i64; 3], w: &WeylElement) -> [i64; 3] {
    let n = c[0].lcm(&c[1]).lcm(&c[2]);
    if n == 1 {
        return m;
    }
    let d = torus(cp);
    let p = w.perm();
    let unit = |x: Rat| -> i64 {
        let num = x.numer().rem_euclid(n as i128) as i64;
        let den = mod_inverse(x.denom().rem_euclid(n as i128) as i64, n).expect("coprime moduli");
        ((num as i128 * den as i128).rem_euclid(n as i128)) as i64
    };
    [0, 1, 2].map(|i| {
        let ratio = d[p[i + 1]] / d[p[i]];
        ((m[i] as i128 * unit(ratio) as i128).rem_euclid(n as i128)) as i64
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativityReport {
    pub global: C,
    pub left: C,
    pub right: C,
    pub rel_err: f64,
    pub ok: bool,
}

/// S_w(ψ_L, ψ_M, c·c′) against S_w(ψ_L, ψ_{M″}, c)·S_w(ψ_L, ψ_{M‴}, c′) with
/// the unit-torus twists of `crt_twist`. Meaningful where U_w is trivial
/// or the characters are compatible at every stage (w1, w8).
pub fn multiplicativity_check(
    l: [i64; 3],
    m: [i64; 3],
    c: [i64; 3],
    cp: [i64; 3],
    w: &WeylElement,
    budget: u128,
) -> Result<MultiplicativityReport, KloostermanError> {
    let a = c[0] * c[1] * c[2];
    let b = cp[0] * cp[1] * cp[2];
    if a.gcd(&b) != 1 {
        return Err(KloostermanError::NotCoprime(c, cp));
    }
    let prod = [c[0] * cp[0], c[1] * cp[1], c[2] * cp[2]];
    let global = gl4_kloosterman_bruhat(l, m, prod, w, [1; 4], budget)?.value;
    let left = gl4_kloosterman_bruhat(l, crt_twist(m, c, cp, w), c, w, [1; 4], budget)?.value;
    let right = gl4_kloosterman_bruhat(l, crt_twist(m, cp, c, w), cp, w, [1; 4], budget)?.value;
    let rel_err = (global - left * right).norm() / global.norm().max(1.0);
    Ok(MultiplicativityReport { global, left, right, rel_err, ok: rel_err < 1e-9 })
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characters() {
        assert_eq!(psi([1, 2, 3], &identity()), C::new(1.0, 0.0));
        let mut u = identity();
        u[0][1] = Rat::new(1, 2);
        assert!((psi([1, 0, 0], &u) - C::new(-1.0, 0.0)).norm() < 1e-15);
        let mut u = identity();
        u[0][1] = Rat::new(1, 3);
        u[1][2] = Rat::new(2, 5);
        u[2][3] = Rat::new(1, 7);
        u[0][2] = Rat::new(3, 11);
        let a = psi_twisted([1, 1, 1], [1, 1, -1, -1], &u).unwrap();
        let b = psi([1, -1, 1], &u);
        assert!((a - b).norm() < 1e-14);
        assert!(psi_twisted([1, 1, 1], [1, 1, 1, -1], &u).is_err());
    }

    #[test]
    fn classical_small() {
        assert!((classical_kloosterman(5, 7, 1) - 1.0).abs() < 1e-15);
        assert!((classical_kloosterman(1, 1, 2) - 1.0).abs() < 1e-12);
        assert!((classical_kloosterman(1, 1, 3) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hnf_is_unimodular() {
        let (h, v) = column_hnf(&[[3, 5, 7, 2], [1, 0, 4, 9]]);
        // R·V = [H|0]
        let rows = [[3i128, 5, 7, 2], [1, 0, 4, 9]];
        for (i, row) in rows.iter().enumerate() {
            for c in 0..4 {
                let x: i128 = (0..4).map(|t| row[t] * v[t][c]).sum();
                assert_eq!(x, if c < 2 { h[i][c] } else { 0 });
            }
        }
        assert_eq!(h[0][1], 0);
    }

    #[test]
    fn positions_split_the_roots() {
        for w in WeylElement::all() {
            assert_eq!(ubar_positions(&w).len() + u_positions(&w).len(), 6);
        }
        assert_eq!(ubar_positions(&WeylElement::new(8).unwrap()).len(), 6);
        assert!(ubar_positions(&WeylElement::new(1).unwrap()).is_empty());
    }
}
