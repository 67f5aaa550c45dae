//! Compressed sparse row storage for square real matrices.

use std::ops::{AddAssign, Mul};

use nalgebra::DMatrix;

/// Square real matrix in CSR layout. Column indices inside a row are sorted
/// and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix row by row. The closure receives the row index and a
    /// scratch buffer to push `(column, value)` pairs into; duplicates are
    /// summed and exact zeros dropped.
    pub fn from_rows<F>(dim: usize, mut row: F) -> Self
    where
        F: FnMut(usize, &mut Vec<(usize, f64)>),
    {
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut scratch = Vec::new();
        indptr.push(0);
        for i in 0..dim {
            scratch.clear();
            row(i, &mut scratch);
            scratch.sort_unstable_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < scratch.len() {
                let (j, mut v) = scratch[k];
                debug_assert!(j < dim, "column {j} out of range");
                k += 1;
                while k < scratch.len() && scratch[k].0 == j {
                    v += scratch[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            dim,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored entries as `(row, column, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `y = A x`.
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let (cols, vals) = self.row(i);
            let mut acc = T::default();
            for (&j, &v) in cols.iter().zip(vals) {
                acc += x[j] * v;
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply(x, &mut y);
        y
    }

    /// Row vector times matrix, `xᵀ A`.
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (i, j, v) in self.iter() {
            y[j] += x[i] * v;
        }
        y
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Largest `|A(i,j) - A(j,i)|` over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    /// Sum of absolute values in the worst row; an upper bound on the
    /// spectral radius.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
