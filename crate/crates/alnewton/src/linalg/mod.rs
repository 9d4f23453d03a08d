//! Dense and sparse linear-algebra kernels shared by the solver modules.
//!
//! The solver formulas touch the constraint map `E` only through
//! matrix-vector products, transposed products and row-submatrix
//! extraction, so [`LinearMap`] exposes exactly that surface over dense,
//! coordinate-sparse and identity storage.

pub mod ldlt;
pub mod lu;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("vector has length {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("entry ({row}, {col}) is outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
}

/// Componentwise infinity norm.
pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Compressed-sparse-row matrix built from 1-indexed or 0-indexed triples.
/// Duplicate entries are summed, matching the usual coordinate-format
/// convention.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from 0-indexed (row, col, value) triples.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(LinalgError::IndexOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
        }
        let mut sorted: Vec<_> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut row = 0usize;
        for &(r, c, v) in &sorted {
            while row < r {
                row_ptr.push(col_idx.len());
                row += 1;
            }
            if let (Some(&last_c), Some(last_v)) = (col_idx.last(), values.last_mut()) {
                if col_idx.len() > row_ptr[row] && last_c == c {
                    *last_v += v;
                    continue;
                }
            }
            col_idx.push(c);
            values.push(v);
        }
        while row < nrows {
            row_ptr.push(col_idx.len());
            row += 1;
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn tr_matvec(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.ncols);
        for r in 0..self.nrows {
            let yr = y[r];
            if yr != 0.0 {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    x[self.col_idx[k]] += self.values[k] * yr;
                }
            }
        }
        x
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &r in rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                col_idx.push(self.col_idx[k]);
                values.push(self.values[k]);
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            nrows: rows.len(),
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// The linear map `E` of the composite problem, in one of three storages.
#[derive(Debug, Clone)]
pub enum LinearMap {
    Identity(usize),
    Dense(DMatrix<f64>),
    Sparse(SparseMatrix),
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        LinearMap::Identity(dim)
    }

    pub fn nrows(&self) -> usize {
        match self {
            LinearMap::Identity(n) => *n,
            LinearMap::Dense(m) => m.nrows(),
            LinearMap::Sparse(s) => s.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            LinearMap::Identity(n) => *n,
            LinearMap::Dense(m) => m.ncols(),
            LinearMap::Sparse(s) => s.ncols(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, LinearMap::Identity(_))
    }

    pub fn matvec(&self, x: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
        if x.len() != self.ncols() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ncols(),
                actual: x.len(),
            });
        }
        Ok(match self {
            LinearMap::Identity(_) => x.clone(),
            LinearMap::Dense(m) => m * x,
            LinearMap::Sparse(s) => s.matvec(x),
        })
    }

    pub fn tr_matvec(&self, y: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
        if y.len() != self.nrows() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.nrows(),
                actual: y.len(),
            });
        }
        Ok(match self {
            LinearMap::Identity(_) => y.clone(),
            LinearMap::Dense(m) => m.transpose() * y,
            LinearMap::Sparse(s) => s.tr_matvec(y),
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            LinearMap::Identity(n) => DMatrix::identity(*n, *n),
            LinearMap::Dense(m) => m.clone(),
            LinearMap::Sparse(s) => s.to_dense(),
        }
    }

    /// Row submatrix in the order given by `rows`; needed by the
    /// active-set reduced systems.
    pub fn select_rows(&self, rows: &[usize]) -> LinearMap {
        match self {
            LinearMap::Identity(n) => {
                let triplets: Vec<_> = rows.iter().enumerate().map(|(k, &r)| (k, r, 1.0)).collect();
                LinearMap::Sparse(
                    SparseMatrix::from_triplets(rows.len(), *n, &triplets)
                        .expect("identity row selection is always in range"),
                )
            }
            LinearMap::Dense(m) => {
                let mut out = DMatrix::zeros(rows.len(), m.ncols());
                for (k, &r) in rows.iter().enumerate() {
                    out.set_row(k, &m.row(r));
                }
                LinearMap::Dense(out)
            }
            LinearMap::Sparse(s) => LinearMap::Sparse(s.select_rows(rows)),
        }
    }
}
