//! Exact rational linear programming: dense two-phase simplex with Bland's
//! rule. Problems here have a handful of variables, so clarity wins over speed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>, // m rows, ncols + 1 entries (last is rhs)
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(prow.iter()) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximize c·x over the current basic feasible solution. `allowed`
    /// masks columns that may enter.
    fn optimize(&mut self, c: &[Q], allowed: &[bool]) -> bool {
        loop {
            let mut enter = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = c[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        rc -= &c[self.basis[i]] * &row[j];
                    }
                }
                if rc.is_positive() {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = &row[self.ncols] / &row[j];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((i, _)) => self.pivot(i, j),
            }
        }
    }

    fn value_of(&self, col: usize) -> Q {
        for (i, &b) in self.basis.iter().enumerate() {
            if b == col {
                return self.rows[i][self.ncols].clone();
            }
        }
        Q::zero()
    }
}

/// Maximize c·x subject to A x ≤ b with x free.
pub fn maximize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpResult {
    let n = c.len();
    let m = a.len();
    // columns: x⁺ (n), x⁻ (n), slacks (m), artificial x0 (1)
    let ncols = 2 * n + m + 1;
    let art = ncols - 1;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![Q::zero(); ncols + 1];
        for j in 0..n {
            row[j] = a[i][j].clone();
            row[n + j] = -a[i][j].clone();
        }
        row[2 * n + i] = Q::one();
        row[art] = -Q::one();
        row[ncols] = b[i].clone();
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (0..m).map(|i| 2 * n + i).collect(), ncols };

    let worst = (0..m).min_by(|&i, &j| t.rows[i][ncols].cmp(&t.rows[j][ncols]));
    let mut allowed = vec![true; ncols];
    if let Some(r) = worst.filter(|&r| t.rows[r][ncols].is_negative()) {
        t.pivot(r, art);
        let mut c1 = vec![Q::zero(); ncols];
        c1[art] = -Q::one();
        t.optimize(&c1, &allowed);
        if !t.value_of(art).is_zero() {
            return LpResult::Infeasible;
        }
        // drive the artificial variable out of the basis if it stayed at 0
        if let Some(r) = t.basis.iter().position(|&b| b == art) {
            if let Some(j) = (0..art).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            }
        }
    }
    allowed[art] = false;
    let mut c2 = vec![Q::zero(); ncols];
    for j in 0..n {
        c2[j] = c[j].clone();
        c2[n + j] = -c[j].clone();
    }
    if !t.optimize(&c2, &allowed) {
        return LpResult::Unbounded;
    }
    let x: Vec<Q> = (0..n).map(|j| t.value_of(j) - t.value_of(n + j)).collect();
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).fold(Q::zero(), |s, v| s + v);
    LpResult::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_problems() {
        // max x + y, x + 2y ≤ 4, 3x + y ≤ 6, x,y ≥ 0 → (8/5, 6/5), value 14/5
        let a = vec![vec![q(1), q(2)], vec![q(3), q(1)], vec![q(-1), q(0)], vec![q(0), q(-1)]];
        let b = vec![q(4), q(6), q(0), q(0)];
        match maximize(&[q(1), q(1)], &a, &b) {
            LpResult::Optimal { value, x } => {
                assert_eq!(value, qf(14, 5));
                assert_eq!(x, vec![qf(8, 5), qf(6, 5)]);
            }
            r => panic!("{r:?}"),
        }
        // x ≥ 1 and x ≤ 0
        let r = maximize(&[q(1)], &[vec![q(-1)], vec![q(1)]], &[q(-1), q(0)]);
        assert_eq!(r, LpResult::Infeasible);
        let r = maximize(&[q(1)], &[vec![q(-1)]], &[q(-2)]);
        assert_eq!(r, LpResult::Unbounded);
        // needs phase 1: x ≥ 2, y ≥ 3, x + y ≤ 10, max −x − y
        let a = vec![vec![q(-1), q(0)], vec![q(0), q(-1)], vec![q(1), q(1)]];
        match maximize(&[q(-1), q(-1)], &a, &[q(-2), q(-3), q(10)]) {
            LpResult::Optimal { value, .. } => assert_eq!(value, q(-5)),
            r => panic!("{r:?}"),
        }
    }
}
