//! Dense LU factorization with partial pivoting.
//!
//! The alternative full-step Newton system is not symmetric (its upper-right
//! block is `E^T` while the lower-left is `(I-G)E`), so it cannot go through
//! the symmetric indefinite factorization. Singularity is declared under the
//! same relative pivot threshold as [`super::ldlt`].

use super::ldlt::{FactorError, PIVOT_RATIO_TOL};
use nalgebra::{DMatrix, DVector};

#[derive(Debug)]
pub struct LuFactor {
    n: usize,
    /// L strictly below the unit diagonal, U on and above it.
    a: DMatrix<f64>,
    /// Row swaps in elimination order.
    swaps: Vec<(usize, usize)>,
}

impl LuFactor {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self, FactorError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FactorError::NotSquare {
                nrows: matrix.nrows(),
                ncols: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        let mut a = matrix.clone();
        let mut swaps = Vec::new();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0_f64;

        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in (k + 1)..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(FactorError::Singular);
            }
            if p != k {
                a.swap_rows(k, p);
                swaps.push((k, p));
            }
            let d = a[(k, k)];
            min_pivot = min_pivot.min(d.abs());
            max_pivot = max_pivot.max(d.abs());
            for i in (k + 1)..n {
                let l = a[(i, k)] / d;
                a[(i, k)] = l;
                if l != 0.0 {
                    for j in (k + 1)..n {
                        a[(i, j)] -= l * a[(k, j)];
                    }
                }
            }
        }

        if n > 0 && (!max_pivot.is_finite() || min_pivot < PIVOT_RATIO_TOL * max_pivot) {
            return Err(FactorError::Singular);
        }
        Ok(Self { n, a, swaps })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n, "rhs length mismatch");
        let mut x = b.clone();
        for &(i, j) in &self.swaps {
            x.swap_rows(i, j);
        }
        for k in 0..self.n {
            let xk = x[k];
            if xk != 0.0 {
                for i in (k + 1)..self.n {
                    x[i] -= self.a[(i, k)] * xk;
                }
            }
        }
        for k in (0..self.n).rev() {
            let mut s = x[k];
            for j in (k + 1)..self.n {
                s -= self.a[(k, j)] * x[j];
            }
            x[k] = s / self.a[(k, k)];
        }
        x
    }
}

/// Solve with one step of iterative refinement; returns the solution and
/// the infinity norm of the final residual `b - A x`.
pub fn solve_refined(a: &DMatrix<f64>, factor: &LuFactor, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let mut x = factor.solve(b);
    let r = b - a * &x;
    let dx = factor.solve(&r);
    x += dx;
    let r2 = b - a * &x;
    (x, super::inf_norm(&r2))
}
