//! Langlands parameters of the Eisenstein series attached to each parabolic
//! class, and their divisor-type Hecke eigenvalue sums.

use crate::params::{spectral_to_langlands, LanglandsParam, ParamError, SpectralParam};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EisensteinError {
    #[error("constraint on s violated: residual {0:e}")]
    Constraint(f64),
    #[error("partition {0:?} needs {1} eigenvalue provider(s), got {2}")]
    Providers(Partition, usize, usize),
    #[error("expected {0} s-variables, got {1}")]
    SLength(usize, usize),
    #[error("unknown partition {0:?}")]
    Partition(String),
    #[error("provider must satisfy λ(1) = 1")]
    Normalization,
    #[error("provider has no value at {0}")]
    OutOfRange(u64),
    #[error("m must lie in 1..=1e7, got {0}")]
    Range(u64),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("provider file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Partition {
    P1111,
    P211,
    P22,
    P31,
}

impl Partition {
    pub fn parts(self) -> &'static [usize] {
        match self {
            Partition::P1111 => &[1, 1, 1, 1],
            Partition::P211 => &[2, 1, 1],
            Partition::P22 => &[2, 2],
            Partition::P31 => &[3, 1],
        }
    }

    pub fn parse(s: &str) -> Result<Self, EisensteinError> {
        let parts: Vec<&str> = s.split([',', '+']).map(str::trim).collect();
        match parts.as_slice() {
            ["1", "1", "1", "1"] => Ok(Partition::P1111),
            ["2", "1", "1"] => Ok(Partition::P211),
            ["2", "2"] => Ok(Partition::P22),
            ["3", "1"] => Ok(Partition::P31),
            _ => Err(EisensteinError::Partition(s.to_string())),
        }
    }

    /// Number of cusp-form blocks needing Hecke eigenvalues.
    pub fn providers_needed(self) -> usize {
        match self {
            Partition::P1111 => 0,
            Partition::P211 | Partition::P31 => 1,
            Partition::P22 => 2,
        }
    }

    fn s_len(self) -> usize {
        match self {
            Partition::P1111 | Partition::P211 => 3,
            Partition::P22 | Partition::P31 => 2,
        }
    }
}

/// Spectral data of the Levi blocks: `v` holds v for a GL(2) block, (v, v′)
/// for GL(3) or for the two GL(2) blocks of (2,2). For (1,1,1,1) the
/// s-variables are free; otherwise Σ n_k s_k = 0 is enforced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeviSpectralData {
    pub v: Vec<C>,
    pub s: Vec<C>,
}

const CONSTRAINT_TOL: f64 = 1e-12;

fn check_s(pc: Partition, s: &[C]) -> Result<(), EisensteinError> {
    if s.len() != pc.s_len() {
        return Err(EisensteinError::SLength(pc.s_len(), s.len()));
    }
    if pc == Partition::P1111 {
        return Ok(());
    }
    let res: C = pc.parts().iter().zip(s).map(|(&n, x)| x * n as f64).sum();
    if res.norm() > CONSTRAINT_TOL {
        return Err(EisensteinError::Constraint(res.norm()));
    }
    Ok(())
}

pub fn parabolic_langlands(pc: Partition, data: &LeviSpectralData) -> Result<LanglandsParam, EisensteinError> {
    check_s(pc, &data.s)?;
    let s = &data.s;
    let need = match pc {
        Partition::P1111 => 0,
        Partition::P211 => 1,
        Partition::P22 | Partition::P31 => 2,
    };
    if data.v.len() != need {
        return Err(EisensteinError::SLength(need, data.v.len()));
    }
    let free = match pc {
        Partition::P1111 => return Ok(spectral_to_langlands(&SpectralParam::new(s.to_vec())?)?),
        Partition::P211 => {
            let v = data.v[0];
            vec![s[0] + v, s[0] - v, s[1]]
        }
        Partition::P22 => {
            let (v, vp) = (data.v[0], data.v[1]);
            vec![s[0] + v, s[0] - v, -s[0] + vp]
        }
        Partition::P31 => {
            let (v, vp) = (data.v[0], data.v[1]);
            vec![s[0] + 2.0 * v + vp, s[0] - v + vp, s[0] - v - 2.0 * vp]
        }
    };
    Ok(LanglandsParam::from_free(free)?)
}

/// Hecke eigenvalues λ_φ(k), k ≥ 1, of a lower-rank form.
pub trait EigenvalueProvider: Sync {
    fn lambda(&self, k: u64) -> Result<C, EisensteinError>;
    fn multiplicative(&self) -> bool {
        false
    }
}

pub struct ConstantOne;

impl EigenvalueProvider for ConstantOne {
    fn lambda(&self, _k: u64) -> Result<C, EisensteinError> {
        Ok(C::new(1.0, 0.0))
    }
    fn multiplicative(&self) -> bool {
        true
    }
}

/// λ(k) = Σ_{ab=k} (a/b)^v, the eigenvalues of the GL(2) Eisenstein series.
pub struct DivisorProvider {
    pub v: C,
}

impl EigenvalueProvider for DivisorProvider {
    fn lambda(&self, k: u64) -> Result<C, EisensteinError> {
        Ok(divisors(k)
            .into_iter()
            .map(|a| (self.v * ((a * a) as f64 / k as f64).ln()).exp())
            .sum())
    }
    fn multiplicative(&self) -> bool {
        true
    }
}

/// A finite table λ(1), λ(2), … read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceProvider {
    /// values[k-1] = λ(k), as [re, im] pairs
    pub values: Vec<[f64; 2]>,
    #[serde(default)]
    pub multiplicative: bool,
}

impl SequenceProvider {
    pub fn new(values: Vec<[f64; 2]>, multiplicative: bool) -> Result<Self, EisensteinError> {
        match values.first() {
            Some(&[re, im]) if (re - 1.0).abs() < 1e-12 && im.abs() < 1e-12 => Ok(SequenceProvider { values, multiplicative }),
            _ => Err(EisensteinError::Normalization),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, EisensteinError> {
        let text = std::fs::read_to_string(path).map_err(|e| EisensteinError::Io(e.to_string()))?;
        let p: SequenceProvider = serde_json::from_str(&text).map_err(|e| EisensteinError::Io(e.to_string()))?;
        Self::new(p.values, p.multiplicative)
    }
}

impl EigenvalueProvider for SequenceProvider {
    fn lambda(&self, k: u64) -> Result<C, EisensteinError> {
        let [re, im] = *self.values.get((k as usize).wrapping_sub(1)).ok_or(EisensteinError::OutOfRange(k))?;
        Ok(C::new(re, im))
    }
    fn multiplicative(&self) -> bool {
        self.multiplicative
    }
}

pub fn divisors(m: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            small.push(d);
            if d * d != m {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// c^z for a positive integer c.
fn cpow(c: u64, z: C) -> C {
    if c == 1 {
        C::new(1.0, 0.0)
    } else {
        (z * (c as f64).ln()).exp()
    }
}

fn check_m(m: u64) -> Result<(), EisensteinError> {
    if m == 0 || m > 10_000_000 {
        return Err(EisensteinError::Range(m));
    }
    Ok(())
}

/// Σ_{c1c2c3c4=m} c1^{α1} c2^{α2} c3^{α3} c4^{α4}.
pub fn hecke_min(m: u64, alpha: &LanglandsParam) -> Result<C, EisensteinError> {
    check_m(m)?;
    let a = alpha.a4();
    let mut total = C::new(0.0, 0.0);
    for c1 in divisors(m) {
        let p1 = cpow(c1, a[0]);
        let m1 = m / c1;
        for c2 in divisors(m1) {
            let p2 = p1 * cpow(c2, a[1]);
            let m2 = m1 / c2;
            for c3 in divisors(m2) {
                total += p2 * cpow(c3, a[2]) * cpow(m2 / c3, a[3]);
            }
        }
    }
    Ok(total)
}

/// Number of ordered factorizations of m into 4 positive parts.
pub fn d4(m: u64) -> u64 {
    divisors(m).iter().map(|&c| divisors(m / c).iter().map(|&d| divisors(m / c / d).len() as u64).sum::<u64>()).sum()
}

/// The m-th Hecke eigenvalue of E_{P,Φ} for the row of `pc`.
pub fn hecke_levi(
    pc: Partition,
    m: u64,
    s: &[C],
    providers: &[&dyn EigenvalueProvider],
) -> Result<C, EisensteinError> {
    check_m(m)?;
    check_s(pc, s)?;
    if providers.len() != pc.providers_needed() {
        return Err(EisensteinError::Providers(pc, pc.providers_needed(), providers.len()));
    }
    for p in providers {
        let l1 = p.lambda(1)?;
        if (l1 - C::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(EisensteinError::Normalization);
        }
    }
    let mut total = C::new(0.0, 0.0);
    match pc {
        Partition::P1111 => {
            let alpha = spectral_to_langlands(&SpectralParam::new(s.to_vec())?)?;
            return hecke_min(m, &alpha);
        }
        Partition::P211 => {
            for c1 in divisors(m) {
                let head = providers[0].lambda(c1)? * cpow(c1, s[0]);
                let rest = m / c1;
                for c2 in divisors(rest) {
                    total += head * cpow(c2, s[1]) * cpow(rest / c2, -2.0 * s[0] - s[1]);
                }
            }
        }
        Partition::P22 => {
            for c1 in divisors(m) {
                let c2 = m / c1;
                total += providers[0].lambda(c1)? * providers[1].lambda(c2)? * cpow(c1, s[0]) * cpow(c2, -s[0]);
            }
        }
        Partition::P31 => {
            for c1 in divisors(m) {
                total += providers[0].lambda(c1)? * cpow(c1, s[0]) * cpow(m / c1, -3.0 * s[0]);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(x: f64) -> C {
        C::new(0.0, x)
    }

    #[test]
    fn rows_sum_to_zero() {
        let d = LeviSpectralData { v: vec![i(0.3)], s: vec![i(0.2), i(0.5), i(-0.9)] };
        let a = parabolic_langlands(Partition::P211, &d).unwrap().a4();
        assert!((a[3] - (-2.0 * d.s[0] - d.s[1])).norm() < 1e-15);
        let d = LeviSpectralData { v: vec![i(0.3), i(-0.1)], s: vec![i(0.25), i(-0.75)] };
        let a = parabolic_langlands(Partition::P31, &d).unwrap().a4();
        assert!((a[3] + 3.0 * d.s[0]).norm() < 1e-15);
        let d = LeviSpectralData { v: vec![C::new(0.0, 0.0); 2], s: vec![C::new(0.0, 0.0); 2] };
        assert!(parabolic_langlands(Partition::P22, &d).unwrap().a4().iter().all(|z| z.norm() == 0.0));
        let bad = LeviSpectralData { v: vec![i(0.3)], s: vec![i(0.2), i(0.5), i(0.9)] };
        assert!(matches!(parabolic_langlands(Partition::P211, &bad), Err(EisensteinError::Constraint(_))));
    }

    #[test]
    fn small_values() {
        let a = LanglandsParam::imaginary(&[0.3, -0.7, 1.1]).unwrap();
        assert!((hecke_min(1, &a).unwrap() - C::new(1.0, 0.0)).norm() < 1e-15);
        let p = 7u64;
        let expect: C = a.a4().iter().map(|z| cpow(p, *z)).sum();
        assert!((hecke_min(p, &a).unwrap() - expect).norm() < 1e-13);
        assert_eq!(d4(1), 1);
        assert_eq!(d4(2), 4);
        assert_eq!(d4(4), 10);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }
}
