//! Dense linear solves: exact rational elimination for small systems,
//! LU with iterative refinement otherwise.

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};

use crate::rational::{from_f64, to_f64, Q};
use crate::{Error, Result};

/// Largest system solved exactly by default.
pub const EXACT_LIMIT: usize = 200;

/// How a solve was carried out.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveMethod {
    Exact,
    Float { residual: f64, refinements: usize },
}

impl SolveMethod {
    pub fn is_exact(&self) -> bool {
        matches!(self, SolveMethod::Exact)
    }
}

/// Solves `A X = B` for a square `A` and any number of right-hand columns.
pub fn solve(a: &[Vec<Q>], b: &[Vec<Q>]) -> Result<(Vec<Vec<Q>>, SolveMethod)> {
    if a.len() <= EXACT_LIMIT {
        Ok((solve_exact(a, b)?, SolveMethod::Exact))
    } else {
        let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let bf: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let (x, method) = solve_float(&af, &bf)?;
        let xq = x.iter().map(|r| r.iter().map(|&v| from_f64(v).unwrap_or_else(Q::zero)).collect()).collect();
        Ok((xq, method))
    }
}

/// Gauss–Jordan elimination over the rationals.
pub fn solve_exact(a: &[Vec<Q>], b: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb.iter()).cloned().collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::Singular)?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut().skip(col) {
            *v *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                if !pv.is_zero() {
                    row[c] -= &factor * pv;
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n..n + k].to_vec()).collect())
}

/// LU solve followed by residual-driven refinement.
pub fn solve_float(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, SolveMethod)> {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let am = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let bm = DMatrix::from_fn(n, k, |i, j| b[i][j]);
    let lu = am.clone().lu();
    let mut x = lu.solve(&bm).ok_or(Error::Singular)?;
    let mut residual = (&bm - &am * &x).abs().max();
    let mut refinements = 0;
    while refinements < 5 && residual > 1e-14 {
        let r = &bm - &am * &x;
        let dx = lu.solve(&r).ok_or(Error::Singular)?;
        let candidate = &x + dx;
        let next = (&bm - &am * &candidate).abs().max();
        refinements += 1;
        if next >= residual {
            break;
        }
        x = candidate;
        residual = next;
    }
    let rows = (0..n).map(|i| (0..k).map(|j| x[(i, j)]).collect()).collect();
    Ok((rows, SolveMethod::Float { residual, refinements }))
}

/// `max |A x − b|` for a single right-hand side, exactly.
pub fn residual_exact(a: &[Vec<Q>], x: &[Q], b: &[Q]) -> Q {
    a.iter()
        .zip(b)
        .map(|(row, bi)| {
            let ax: Q = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
            (ax - bi).abs()
        })
        .fold(Q::zero(), |acc, v| if v > acc { v } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_frac, q_int};

    #[test]
    fn exact_solve_small_system() {
        let a = vec![vec![q_int(2), q_int(1)], vec![q_int(1), q_int(3)]];
        let b = vec![vec![q_int(1)], vec![q_int(2)]];
        let x = solve_exact(&a, &b).unwrap();
        assert_eq!(x, vec![vec![q_frac(1, 5)], vec![q_frac(3, 5)]]);
        let col: Vec<Q> = x.iter().map(|r| r[0].clone()).collect();
        assert!(residual_exact(&a, &col, &[q_int(1), q_int(2)]).is_zero());
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![q_int(1), q_int(2)], vec![q_int(2), q_int(4)]];
        let b = vec![vec![q_int(1)], vec![q_int(1)]];
        assert!(matches!(solve_exact(&a, &b), Err(Error::Singular)));
    }

    #[test]
    fn float_solve_agrees_with_exact() {
        let n = 12;
        let a: Vec<Vec<Q>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { q_int(4) } else { q_frac(1, (i + j + 2) as i64) }).collect())
            .collect();
        let b: Vec<Vec<Q>> = (0..n).map(|i| vec![q_int(i as i64 - 3)]).collect();
        let exact = solve_exact(&a, &b).unwrap();
        let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let bf: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let (x, method) = solve_float(&af, &bf).unwrap();
        for i in 0..n {
            assert!((x[i][0] - to_f64(&exact[i][0])).abs() < 1e-12);
        }
        match method {
            SolveMethod::Float { residual, .. } => assert!(residual < 1e-12),
            SolveMethod::Exact => unreachable!(),
        }
    }
}
