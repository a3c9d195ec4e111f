//! Spectral and Langlands parameters, the S4 action and the I_s exponents.

use num_complex::Complex64 as C;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("unsupported rank {0}; expected 2, 3 or 4")]
    Rank(usize),
    #[error("parameters do not sum to zero (|sum| = {0:e})")]
    NonzeroSum(f64),
    #[error("Weyl element label must be w1..w8, got {0}")]
    WeylLabel(String),
}

fn check_rank(n: usize) -> Result<(), ParamError> {
    if (2..=4).contains(&n) {
        Ok(())
    } else {
        Err(ParamError::Rank(n))
    }
}

/// Offsets from 1/n, i.e. v = 1/n + (v_1, ..., v_{n-1}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralParam {
    pub n: usize,
    pub v: Vec<C>,
}

impl SpectralParam {
    pub fn new(v: Vec<C>) -> Result<Self, ParamError> {
        let n = v.len() + 1;
        check_rank(n)?;
        Ok(SpectralParam { n, v })
    }
}

/// Langlands parameters with the last entry derived, so the sum is zero by
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanglandsParam {
    free: Vec<C>,
}

impl LanglandsParam {
    /// From the first n−1 entries.
    pub fn from_free(free: Vec<C>) -> Result<Self, ParamError> {
        check_rank(free.len() + 1)?;
        Ok(LanglandsParam { free })
    }

    /// From all n entries; their sum must vanish to 1e-12.
    pub fn new(alpha: &[C]) -> Result<Self, ParamError> {
        check_rank(alpha.len())?;
        let s: C = alpha.iter().sum();
        if s.norm() > 1e-12 {
            return Err(ParamError::NonzeroSum(s.norm()));
        }
        Ok(LanglandsParam { free: alpha[..alpha.len() - 1].to_vec() })
    }

    /// Purely imaginary α with the given imaginary parts (last derived).
    pub fn imaginary(t: &[f64]) -> Result<Self, ParamError> {
        Self::from_free(t.iter().map(|&x| C::new(0.0, x)).collect())
    }

    pub fn n(&self) -> usize {
        self.free.len() + 1
    }

    pub fn alpha(&self) -> Vec<C> {
        let mut a = self.free.clone();
        a.push(-self.free.iter().sum::<C>());
        a
    }

    pub fn get(&self, i: usize) -> C {
        if i < self.free.len() {
            self.free[i]
        } else {
            -self.free.iter().sum::<C>()
        }
    }

    /// Rank-4 parameters as an array.
    pub fn a4(&self) -> [C; 4] {
        let a = self.alpha();
        assert_eq!(a.len(), 4, "rank-4 parameter expected");
        [a[0], a[1], a[2], a[3]]
    }

    pub fn permuted(&self, perm: &[usize]) -> LanglandsParam {
        let a = self.alpha();
        let p: Vec<C> = perm.iter().map(|&i| a[i]).collect();
        LanglandsParam { free: p[..p.len() - 1].to_vec() }
    }

    pub fn neg(&self) -> LanglandsParam {
        LanglandsParam { free: self.free.iter().map(|z| -z).collect() }
    }

    pub fn conj(&self) -> LanglandsParam {
        LanglandsParam { free: self.free.iter().map(|z| z.conj()).collect() }
    }
}

/// b_{i,j} = ij if i+j ≤ n, else (n−i)(n−j); 1-based indices.
pub fn b_coeff(n: usize, i: usize, j: usize) -> i64 {
    let (n, i, j) = (n as i64, i as i64, j as i64);
    if i + j <= n {
        i * j
    } else {
        (n - i) * (n - j)
    }
}

pub fn spectral_to_langlands(v: &SpectralParam) -> Result<LanglandsParam, ParamError> {
    let n = v.n;
    check_rank(n)?;
    if v.v.len() != n - 1 {
        return Err(ParamError::Rank(v.v.len() + 1));
    }
    let big_b = |j: usize| -> C { (1..n).map(|i| v.v[i - 1] * b_coeff(n, i, j) as f64).sum() };
    let mut free = Vec::with_capacity(n - 1);
    free.push(big_b(n - 1));
    for i in 2..n {
        free.push(big_b(n - i) - big_b(n - i + 1));
    }
    LanglandsParam::from_free(free)
}

/// v_i = (α_i − α_{i+1}) / n.
pub fn langlands_to_spectral(alpha: &LanglandsParam) -> Result<SpectralParam, ParamError> {
    let a = alpha.alpha();
    let n = a.len();
    check_rank(n)?;
    SpectralParam::new((0..n - 1).map(|i| (a[i] - a[i + 1]) / n as f64).collect())
}

/// Exponents of y_1, y_2, y_3 in I_s for n = 4.
pub fn is_exponents(s: [C; 3]) -> [C; 3] {
    let mut e = [C::new(0.0, 0.0); 3];
    for (i, ei) in e.iter_mut().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            *ei += sj * b_coeff(4, i + 1, j + 1) as f64;
        }
    }
    e
}

pub fn laplace_eigenvalue(alpha: &LanglandsParam) -> C {
    let n = alpha.n() as f64;
    let sq: C = alpha.alpha().iter().map(|a| a * a).sum();
    C::new((n * n * n - n) / 24.0, 0.0) - sq / 2.0
}

/// All 24 permutations of {0,1,2,3} in lexicographic order.
pub fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

pub fn weyl_orbit(alpha: &LanglandsParam) -> Vec<LanglandsParam> {
    permutations4().iter().map(|p| alpha.permuted(p)).collect()
}

/// One of the eight relevant Weyl elements, signs as in the Kloosterman table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeylElement {
    pub label: u8,
    pub matrix: [[i64; 4]; 4],
}

impl WeylElement {
    pub fn new(label: u8) -> Result<Self, ParamError> {
        let m = match label {
            1 => [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            2 => [[0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]],
            3 => [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0]],
            4 => [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
            5 => [[0, 0, 0, -1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]],
            6 => [[0, 0, 1, 0], [0, 0, 0, 1], [0, 1, 0, 0], [-1, 0, 0, 0]],
            7 => [[0, 0, 0, -1], [0, 0, 1, 0], [1, 0, 0, 0], [0, 1, 0, 0]],
            8 => [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
            _ => return Err(ParamError::WeylLabel(format!("w{label}"))),
        };
        Ok(WeylElement { label, matrix: m })
    }

    pub fn parse(s: &str) -> Result<Self, ParamError> {
        let t = s.trim().trim_start_matches(['w', 'W']);
        t.parse::<u8>()
            .map_err(|_| ParamError::WeylLabel(s.to_string()))
            .and_then(Self::new)
    }

    pub fn all() -> Vec<WeylElement> {
        (1..=8).map(|k| Self::new(k).unwrap()).collect()
    }

    /// perm[j] = i where column j has its nonzero entry in row i, i.e. w e_j = ±e_i.
    pub fn perm(&self) -> [usize; 4] {
        let mut p = [0; 4];
        for (j, pj) in p.iter_mut().enumerate() {
            *pj = (0..4).find(|&i| self.matrix[i][j] != 0).unwrap();
        }
        p
    }

    pub fn det(&self) -> i64 {
        det4(&self.matrix)
    }
}

pub fn det4(m: &[[i64; 4]; 4]) -> i64 {
    let mut total = 0;
    for p in permutations4() {
        let mut sign = 1;
        for i in 0..4 {
            for j in i + 1..4 {
                if p[i] > p[j] {
                    sign = -sign;
                }
            }
        }
        total += sign * (0..4).map(|i| m[i][p[i]]).product::<i64>();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn n4_linear_forms() {
        let v = SpectralParam::new(vec![c(0.1), c(-0.7), C::new(0.2, 1.3)]).unwrap();
        let a = spectral_to_langlands(&v).unwrap().alpha();
        let (v1, v2, v3) = (v.v[0], v.v[1], v.v[2]);
        assert!((a[0] - (v1 * 3.0 + v2 * 2.0 + v3)).norm() < 1e-15);
        assert!((a[1] - (-v1 + v2 * 2.0 + v3)).norm() < 1e-15);
        assert!((a[2] - (-v1 - v2 * 2.0 + v3)).norm() < 1e-15);
        assert!((a[3] - (-v1 - v2 * 2.0 - v3 * 3.0)).norm() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let a = LanglandsParam::new(&[c(3.0), c(-1.0), c(-1.0), c(-1.0)]).unwrap();
        let v = langlands_to_spectral(&a).unwrap();
        assert_eq!(v.v, vec![c(1.0), c(0.0), c(0.0)]);
        let zero = LanglandsParam::new(&[c(0.0); 4]).unwrap();
        assert_eq!(langlands_to_spectral(&zero).unwrap().v, vec![c(0.0); 3]);
        assert!(LanglandsParam::new(&[c(1.0), c(0.0), c(0.0), c(0.0)]).is_err());
        assert!(SpectralParam::new(vec![c(1.0); 4]).is_err());
    }

    #[test]
    fn lower_ranks() {
        let v = SpectralParam::new(vec![C::new(0.0, 2.0)]).unwrap();
        let a = spectral_to_langlands(&v).unwrap();
        assert_eq!(a.alpha(), vec![C::new(0.0, 2.0), C::new(0.0, -2.0)]);
        // λ = 1/4 + t² for α = (it, −it)
        assert!((laplace_eigenvalue(&a) - c(0.25 + 4.0)).norm() < 1e-14);
        let v3 = SpectralParam::new(vec![c(0.3), c(0.5)]).unwrap();
        let a3 = spectral_to_langlands(&v3).unwrap().alpha();
        assert!((a3[0] - c(1.1)).norm() < 1e-15 && (a3[1] - c(0.2)).norm() < 1e-15);
        let z3 = LanglandsParam::new(&[c(0.0); 3]).unwrap();
        assert_eq!(laplace_eigenvalue(&z3), c(1.0));
        let z4 = LanglandsParam::new(&[c(0.0); 4]).unwrap();
        assert_eq!(laplace_eigenvalue(&z4), c(2.5));
    }

    #[test]
    fn exponents() {
        let e = is_exponents([c(1.0), c(0.0), c(0.0)]);
        assert_eq!(e, [c(1.0), c(2.0), c(3.0)]);
        let e = is_exponents([c(0.0), c(1.0), c(0.0)]);
        assert_eq!(e, [c(2.0), c(4.0), c(2.0)]);
        assert_eq!(is_exponents([c(0.0); 3]), [c(0.0); 3]);
    }

    #[test]
    fn orbit_sizes() {
        let z = LanglandsParam::new(&[c(0.0); 4]).unwrap();
        let o = weyl_orbit(&z);
        assert_eq!(o.len(), 24);
        assert!(o.iter().all(|p| p.alpha() == vec![c(0.0); 4]));
        let a = LanglandsParam::imaginary(&[0.3, 0.1, -0.15]).unwrap();
        let o = weyl_orbit(&a);
        for i in 0..24 {
            for j in i + 1..24 {
                assert_ne!(o[i].alpha(), o[j].alpha());
            }
        }
    }

    #[test]
    fn weyl_elements_have_unit_determinant() {
        for w in WeylElement::all() {
            assert_eq!(w.det(), 1, "w{}", w.label);
        }
        assert!(WeylElement::parse("w9").is_err());
        assert_eq!(WeylElement::parse("w8").unwrap().perm(), [3, 2, 1, 0]);
    }
}
