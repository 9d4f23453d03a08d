//! Dense symmetric indefinite LDL^T factorization with Bunch-Kaufman
//! pivoting (1x1 and 2x2 pivot blocks).
//!
//! Saddle-point matrices of the Newton systems are symmetric but
//! indefinite, so a plain Cholesky does not apply. The factorization
//! reports [`FactorError::Singular`] when the smallest pivot falls below
//! `1e-12` times the largest one, which is the rank-deficiency signal the
//! solver maps to its `SingularSystem` status.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative pivot threshold that declares a matrix numerically singular.
pub const PIVOT_RATIO_TOL: f64 = 1e-12;

// Bunch-Kaufman pivot selection constant (1 + sqrt(17)) / 8.
const ALPHA: f64 = 0.640_388_203_202_207_6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactorError {
    #[error("matrix is numerically singular (pivot below 1e-12 of the largest pivot)")]
    Singular,
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
}

/// Factorization P A P^T = L D L^T with unit lower-triangular L and
/// block-diagonal D of 1x1 and 2x2 blocks.
#[derive(Debug)]
pub struct LdltFactor {
    n: usize,
    /// Strictly lower triangle holds L multipliers; the diagonal and the
    /// first subdiagonal hold the D blocks.
    a: DMatrix<f64>,
    /// `true` at k when a 2x2 pivot block starts at (k, k).
    block2: Vec<bool>,
    /// Symmetric row/column swaps in the order they were applied.
    swaps: Vec<(usize, usize)>,
    min_pivot: f64,
    max_pivot: f64,
}

fn sym_swap(a: &mut DMatrix<f64>, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap_rows(i, j);
    a.swap_columns(i, j);
}

impl LdltFactor {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self, FactorError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FactorError::NotSquare {
                nrows: matrix.nrows(),
                ncols: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        if n == 0 {
            return Ok(Self {
                n,
                a: matrix.clone(),
                block2: Vec::new(),
                swaps: Vec::new(),
                min_pivot: 0.0,
                max_pivot: 0.0,
            });
        }
        let mut a = matrix.clone();
        let mut block2 = vec![false; n];
        let mut swaps = Vec::new();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0_f64;

        let mut k = 0;
        while k < n {
            let absakk = a[(k, k)].abs();
            let mut imax = k;
            let mut colmax = 0.0_f64;
            for i in (k + 1)..n {
                let v = a[(i, k)].abs();
                if v > colmax {
                    colmax = v;
                    imax = i;
                }
            }
            if absakk.max(colmax) == 0.0 {
                // zero pivot column: exactly rank deficient
                return Err(FactorError::Singular);
            }

            let mut use_two = false;
            let mut kp = k;
            if absakk < ALPHA * colmax {
                let mut rowmax = 0.0_f64;
                for j in k..n {
                    if j != imax {
                        rowmax = rowmax.max(a[(imax, j)].abs());
                    }
                }
                if absakk * rowmax >= ALPHA * colmax * colmax {
                    // 1x1 pivot at k despite the large off-diagonal
                } else if a[(imax, imax)].abs() >= ALPHA * rowmax {
                    kp = imax;
                } else {
                    kp = imax;
                    use_two = true;
                }
            }

            if use_two {
                if kp != k + 1 {
                    sym_swap(&mut a, k + 1, kp);
                    swaps.push((k + 1, kp));
                }
            } else if kp != k {
                sym_swap(&mut a, k, kp);
                swaps.push((k, kp));
            }

            if !use_two {
                let d = a[(k, k)];
                if d == 0.0 {
                    return Err(FactorError::Singular);
                }
                min_pivot = min_pivot.min(d.abs());
                max_pivot = max_pivot.max(d.abs());

                let w: Vec<f64> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
                for (off, i) in ((k + 1)..n).enumerate() {
                    a[(i, k)] = w[off] / d;
                }
                // symmetric rank-1 downdate of the trailing block,
                // mirrored so the trailing block stays exactly symmetric
                for j in (k + 1)..n {
                    let sj = w[j - k - 1] / d;
                    if sj != 0.0 {
                        for i in j..n {
                            let v = a[(i, j)] - w[i - k - 1] * sj;
                            a[(i, j)] = v;
                            if i != j {
                                a[(j, i)] = v;
                            }
                        }
                    }
                }
                k += 1;
            } else {
                let d11 = a[(k, k)];
                let d21 = a[(k + 1, k)];
                let d22 = a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                if det == 0.0 {
                    return Err(FactorError::Singular);
                }
                // eigenvalue magnitudes of the 2x2 block as pivot sizes
                let t = 0.5 * (d11 + d22);
                let s = (0.25 * (d11 - d22) * (d11 - d22) + d21 * d21).sqrt();
                let e1 = (t + s).abs();
                let e2 = (t - s).abs();
                min_pivot = min_pivot.min(e1.min(e2));
                max_pivot = max_pivot.max(e1.max(e2));

                let inv11 = d22 / det;
                let inv22 = d11 / det;
                let inv21 = -d21 / det;
                let w1: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k)]).collect();
                let w2: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
                for (off, i) in ((k + 2)..n).enumerate() {
                    a[(i, k)] = w1[off] * inv11 + w2[off] * inv21;
                    a[(i, k + 1)] = w1[off] * inv21 + w2[off] * inv22;
                }
                for j in (k + 2)..n {
                    let wj1 = w1[j - k - 2];
                    let wj2 = w2[j - k - 2];
                    for i in j..n {
                        let li1 = a[(i, k)];
                        let li2 = a[(i, k + 1)];
                        let v = a[(i, j)] - li1 * wj1 - li2 * wj2;
                        a[(i, j)] = v;
                        if i != j {
                            a[(j, i)] = v;
                        }
                    }
                }
                block2[k] = true;
                k += 2;
            }
        }

        if !min_pivot.is_finite() || !max_pivot.is_finite() {
            return Err(FactorError::Singular);
        }
        if min_pivot < PIVOT_RATIO_TOL * max_pivot {
            return Err(FactorError::Singular);
        }
        Ok(Self {
            n,
            a,
            block2,
            swaps,
            min_pivot,
            max_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pivot_range(&self) -> (f64, f64) {
        (self.min_pivot, self.max_pivot)
    }

    /// Solve A x = b using the stored factorization.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n, "rhs length mismatch");
        let mut x = b.clone();
        for &(i, j) in &self.swaps {
            x.swap_rows(i, j);
        }

        // forward substitution with unit lower L
        let mut k = 0;
        while k < self.n {
            if self.block2[k] {
                let xk = x[k];
                let xk1 = x[k + 1];
                for i in (k + 2)..self.n {
                    x[i] -= self.a[(i, k)] * xk + self.a[(i, k + 1)] * xk1;
                }
                k += 2;
            } else {
                let xk = x[k];
                for i in (k + 1)..self.n {
                    x[i] -= self.a[(i, k)] * xk;
                }
                k += 1;
            }
        }

        // block-diagonal solve
        let mut k = 0;
        while k < self.n {
            if self.block2[k] {
                let d11 = self.a[(k, k)];
                let d21 = self.a[(k + 1, k)];
                let d22 = self.a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                let b1 = x[k];
                let b2 = x[k + 1];
                x[k] = (d22 * b1 - d21 * b2) / det;
                x[k + 1] = (d11 * b2 - d21 * b1) / det;
                k += 2;
            } else {
                x[k] /= self.a[(k, k)];
                k += 1;
            }
        }

        // backward substitution with L^T
        let mut k = self.n;
        while k > 0 {
            let two_block = k >= 2 && self.block2[k - 2];
            if two_block {
                let start = k - 2;
                let mut s0 = 0.0;
                let mut s1 = 0.0;
                for i in k..self.n {
                    s0 += self.a[(i, start)] * x[i];
                    s1 += self.a[(i, start + 1)] * x[i];
                }
                x[start] -= s0;
                x[start + 1] -= s1;
                k -= 2;
            } else {
                let start = k - 1;
                let mut s = 0.0;
                for i in k..self.n {
                    s += self.a[(i, start)] * x[i];
                }
                x[start] -= s;
                k -= 1;
            }
        }

        for &(i, j) in self.swaps.iter().rev() {
            x.swap_rows(i, j);
        }
        x
    }
}

/// Solve with one step of iterative refinement; returns the solution and
/// the infinity norm of the final residual `b - A x`.
pub fn solve_refined(
    a: &DMatrix<f64>,
    factor: &LdltFactor,
    b: &DVector<f64>,
) -> (DVector<f64>, f64) {
    let mut x = factor.solve(b);
    let r = b - a * &x;
    let dx = factor.solve(&r);
    x += dx;
    let r2 = b - a * &x;
    (x, super::inf_norm(&r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        // mixed-sign diagonal scaling keeps the spectrum indefinite
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            if i % 2 == 0 {
                rng.random_range(0.5..2.0)
            } else {
                -rng.random_range(0.5..2.0)
            }
        }));
        let q = &m * &d * m.transpose() + DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            if i % 3 == 0 { 0.3 } else { -0.3 }
        }));
        0.5 * (&q + q.transpose())
    }

    #[test]
    fn factors_and_solves_random_indefinite_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 8, 13, 21, 40] {
            for _ in 0..20 {
                let a = random_symmetric(n, &mut rng);
                let b = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
                let f = LdltFactor::new(&a).expect("random indefinite matrix factors");
                let (x, res) = solve_refined(&a, &f, &b);
                assert!(res <= 1e-10 * (1.0 + super::super::inf_norm(&b)), "residual {res}");
                // cross-check against nalgebra's full-pivot LU
                let x_ref = a.clone().full_piv_lu().solve(&b).unwrap();
                let diff = super::super::inf_norm(&(&x - &x_ref));
                assert!(diff <= 1e-8 * (1.0 + super::super::inf_norm(&x_ref)), "diff {diff}");
            }
        }
    }

    #[test]
    fn solves_saddle_point_blocks() {
        // [[H, B^T], [B, 0]] with H positive definite and B full row rank:
        // nonsingular but indefinite, and with zeros on the trailing diagonal
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, m) in [(4usize, 2usize), (8, 5), (20, 12)] {
            let h0 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let h = &h0 * h0.transpose() + DMatrix::identity(n, n);
            let bmat = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
            let mut k = DMatrix::zeros(n + m, n + m);
            k.view_mut((0, 0), (n, n)).copy_from(&h);
            k.view_mut((n, 0), (m, n)).copy_from(&bmat);
            k.view_mut((0, n), (n, m)).copy_from(&bmat.transpose());
            let rhs = DVector::from_fn(n + m, |_, _| rng.random_range(-1.0..1.0));
            let f = LdltFactor::new(&k).expect("saddle point factors");
            let (x, res) = solve_refined(&k, &f, &rhs);
            assert!(res <= 1e-10 * (1.0 + super::super::inf_norm(&rhs)));
            let x_ref = k.clone().full_piv_lu().solve(&rhs).unwrap();
            assert!(super::super::inf_norm(&(&x - &x_ref)) <= 1e-8);
        }
    }

    #[test]
    fn detects_exact_rank_deficiency() {
        // duplicated constraint row makes the saddle matrix singular
        let k = DMatrix::from_row_slice(
            3,
            3,
            &[3.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        );
        assert_eq!(LdltFactor::new(&k).unwrap_err(), FactorError::Singular);

        let zero = DMatrix::zeros(4, 4);
        assert_eq!(LdltFactor::new(&zero).unwrap_err(), FactorError::Singular);
    }

    #[test]
    fn detects_tiny_pivot_ratio() {
        let mut a = DMatrix::identity(3, 3);
        a[(2, 2)] = 1e-14;
        assert_eq!(LdltFactor::new(&a).unwrap_err(), FactorError::Singular);
    }

    #[test]
    fn handles_larger_systems_with_mixed_block_pivots() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for n in [60usize, 120] {
            let a = random_symmetric(n, &mut rng);
            let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let f = LdltFactor::new(&a).unwrap();
            let (x, res) = solve_refined(&a, &f, &b);
            assert!(res <= 1e-10 * (1.0 + super::super::inf_norm(&b)));
            let x_ref = a.clone().full_piv_lu().solve(&b).unwrap();
            assert!(
                super::super::inf_norm(&(&x - &x_ref))
                    <= 1e-7 * (1.0 + super::super::inf_norm(&x_ref))
            );
            let (min_p, max_p) = f.pivot_range();
            assert!(min_p > PIVOT_RATIO_TOL * max_p);
        }
    }

    #[test]
    fn rejects_non_square() {
        let a = DMatrix::zeros(2, 3);
        assert!(matches!(
            LdltFactor::new(&a).unwrap_err(),
            FactorError::NotSquare { nrows: 2, ncols: 3 }
        ));
    }

    #[test]
    fn one_by_one_matrix() {
        let a = DMatrix::from_row_slice(1, 1, &[-2.0]);
        let f = LdltFactor::new(&a).unwrap();
        let x = f.solve(&DVector::from_vec(vec![4.0]));
        assert_eq!(x[0], -2.0);
    }
}
