//! Dense column-major matrices and the handful of vector kernels the rest of
//! the crate is built on. Everything here is deliberately plain `f64` slices;
//! the operation counts are dominated by dot products over design columns, so
//! the kernels are written to let LLVM vectorize them.

use crate::error::{Error, Result};

/// Dense matrix stored column-major, so that design columns are contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Mat {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    /// Build from column vectors; all columns must share one length.
    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self> {
        let n_cols = cols.len();
        if n_cols == 0 {
            return Err(Error::contract("matrix needs at least one column"));
        }
        let n_rows = cols[0].len();
        if n_rows == 0 {
            return Err(Error::contract("matrix needs at least one row"));
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (j, col) in cols.into_iter().enumerate() {
            if col.len() != n_rows {
                return Err(Error::contract(format!(
                    "column {j} has length {} but column 0 has length {n_rows}",
                    col.len()
                )));
            }
            data.extend_from_slice(&col);
        }
        Ok(Mat {
            n_rows,
            n_cols,
            data,
        })
    }

    /// Build from row-major records (the natural shape of sampled data).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::contract("matrix needs at least one row"));
        }
        let n_cols = rows[0].len();
        if n_cols == 0 {
            return Err(Error::contract("matrix needs at least one column"));
        }
        let mut m = Mat::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::contract(format!(
                    "row {i} has length {} but row 0 has length {n_cols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m.data[j * n_rows + i] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n_rows + i]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `X beta` for a full-length coefficient vector.
    pub fn mat_vec(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.n_cols {
            return Err(Error::contract(format!(
                "coefficient length {} does not match {} columns",
                beta.len(),
                self.n_cols
            )));
        }
        let mut out = vec![0.0; self.n_rows];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.col(j), &mut out);
            }
        }
        Ok(out)
    }

    /// New matrix with a leading column of ones.
    pub fn with_intercept_column(&self) -> Mat {
        let mut data = Vec::with_capacity(self.n_rows * (self.n_cols + 1));
        data.extend(std::iter::repeat_n(1.0, self.n_rows));
        data.extend_from_slice(&self.data);
        Mat {
            n_rows: self.n_rows,
            n_cols: self.n_cols + 1,
            data,
        }
    }

    /// New matrix restricted to the given rows (order preserved).
    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        let mut out = Mat::zeros(rows.len(), self.n_cols);
        for j in 0..self.n_cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            for (k, &i) in rows.iter().enumerate() {
                dst[k] = src[i];
            }
        }
        out
    }
}

/// Plain dot product, unrolled into four accumulators so the reduction can be
/// pipelined. The fixed summation order keeps results reproducible.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (x, y) in (&mut ca).zip(&mut cb) {
        s0 += x[0] * y[0];
        s1 += x[1] * y[1];
        s2 += x[2] * y[2];
        s3 += x[3] * y[3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        s += x * y;
    }
    s
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}
