//! Exact two-phase simplex over the rationals (Bland's rule).
//!
//! Solves `max cᵀx` subject to `A x = b`, `x ≥ 0`. Used to maximize a linear
//! functional over a non-signaling polytope whose vertex list is not stored.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: Q,
    pub x: Vec<Q>,
}

struct Tableau {
    rows: Vec<Vec<Q>>, // each row: coefficients followed by rhs
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Q::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of `obj` (maximization) for the current basis, followed
    /// by the objective value.
    fn reduced(&self, obj: &[Q]) -> (Vec<Q>, Q) {
        let mut red: Vec<Q> = obj.to_vec();
        let mut value = Q::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &obj[b];
            if cb.is_zero() {
                continue;
            }
            for (j, slot) in red.iter_mut().enumerate() {
                if !self.rows[i][j].is_zero() {
                    *slot -= cb * &self.rows[i][j];
                }
            }
            value += cb * &self.rows[i][self.cols];
        }
        (red, value)
    }

    /// Runs Bland's rule on `obj` restricted to `allowed` columns.
    fn optimize(&mut self, obj: &[Q], allowed: usize) -> Result<Q> {
        loop {
            let (red, value) = self.reduced(obj);
            let Some(enter) = (0..allowed).find(|&j| red[j].is_positive()) else {
                return Ok(value);
            };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = &row[self.cols] / &row[enter];
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
                Some((r, _)) => self.pivot(r, enter),
                None => return Err(Error::Numerical("linear program is unbounded".into())),
            }
        }
    }
}

/// Maximizes `c·x` over `{x ≥ 0 : A x = b}`.
pub fn maximize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("inconsistent LP dimensions".into()));
    }
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut row: Vec<Q> = ai.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        row.push(if flip { -bi } else { bi.clone() });
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..cols).collect(),
        cols,
    };
    let phase1: Vec<Q> = (0..cols)
        .map(|j| if j >= n { -Q::one() } else { Q::zero() })
        .collect();
    let infeas = t.optimize(&phase1, cols)?;
    if !infeas.is_zero() {
        return Err(Error::Numerical("linear program is infeasible".into()));
    }
    // Drive artificial variables out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
                r += 1;
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    let mut obj: Vec<Q> = c.to_vec();
    obj.extend((0..m).map(|_| Q::zero()));
    let value = t.optimize(&obj, n)?;
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[i][cols].clone();
        }
    }
    Ok(LpSolution { value, x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(v: i64) -> Q {
        Q::from_integer(BigInt::from(v))
    }

    #[test]
    fn small_lp() {
        // max x + 2y, x + y + s = 4, x + 3y + t = 6 → (3, 1), value 5
        let c = vec![q(1), q(2), q(0), q(0)];
        let a = vec![vec![q(1), q(1), q(1), q(0)], vec![q(1), q(3), q(0), q(1)]];
        let b = vec![q(4), q(6)];
        let sol = maximize(&c, &a, &b).unwrap();
        assert_eq!(sol.value, q(5));
        assert_eq!(sol.x[0], q(3));
        assert_eq!(sol.x[1], q(1));
    }

    #[test]
    fn redundant_rows_and_fractional_optimum() {
        // x + y = 1 (twice), max 3x − y with x ≤ 1/2 via x + s = 1/2
        let half = Q::new(BigInt::from(1), BigInt::from(2));
        let c = vec![q(3), q(-1), q(0)];
        let a = vec![
            vec![q(1), q(1), q(0)],
            vec![q(2), q(2), q(0)],
            vec![q(1), q(0), q(1)],
        ];
        let b = vec![q(1), q(2), half.clone()];
        let sol = maximize(&c, &a, &b).unwrap();
        assert_eq!(sol.value, q(1));
        assert_eq!(sol.x[0], half);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let c = vec![q(1)];
        assert!(maximize(&c, &[vec![q(1)]], &[q(-1)]).is_err());
        let c = vec![q(1), q(0)];
        assert!(maximize(&c, &[vec![q(1), q(-1)]], &[q(0)]).is_err());
    }
}
