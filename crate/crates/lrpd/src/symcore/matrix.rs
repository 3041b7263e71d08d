use nalgebra::DMatrix;

use crate::scalar::{Scalar, Q};

use super::SymError;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Dense symmetric matrix storing only the lower triangle, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "SymMatrix needs n >= 1");
        SymMatrix { n, data: vec![T::zero(); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(n >= 1, "SymMatrix needs n >= 1");
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    /// Build from the row-major lower triangle.
    pub fn from_lower(n: usize, data: Vec<T>) -> Result<Self, SymError> {
        if n == 0 {
            return Err(SymError::Empty);
        }
        if data.len() != n * (n + 1) / 2 {
            return Err(SymError::Dimension(format!(
                "expected {} lower-triangle entries for n = {n}, got {}",
                n * (n + 1) / 2,
                data.len()
            )));
        }
        Ok(SymMatrix { n, data })
    }

    /// Build from a full square array, rejecting asymmetric input.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, SymError> {
        let n = rows.len();
        if n == 0 {
            return Err(SymError::Empty);
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(SymError::Dimension(format!("row {i} has {} entries, expected {n}", r.len())));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(SymError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j].clone()))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[tri(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[tri(i, j)] = v;
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[tri(i, j)]
    }

    pub fn lower(&self) -> &[T] {
        &self.data
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    /// `self + Diag(d)`.
    pub fn add_diag(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut m = self.clone();
        for (i, v) in d.iter().enumerate() {
            *m.get_mut(i, i) += v.clone();
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SymMatrix<U> {
        SymMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        self.map(|v| v.to_f64())
    }

    /// Principal submatrix on the index list `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]).clone())
    }

    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Mat<T> {
        Mat::from_fn(rows.len(), cols.len(), |a, b| self.get(rows[a], cols[b]).clone())
    }

    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j).clone())
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_f64())
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> SymMatrix<f64> {
        SymMatrix::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let v = self.get(i, j).to_f64();
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Number of structurally nonzero entries in the full square matrix.
    pub fn nnz(&self) -> usize {
        let mut c = 0;
        for i in 0..self.n {
            for j in 0..=i {
                if !self.get(i, j).is_zero() {
                    c += if i == j { 1 } else { 2 };
                }
            }
        }
        c
    }

    pub fn off_diag_is_zero(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn quad_form(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            if x[i].is_zero() {
                continue;
            }
            let mut row = T::zero();
            for j in 0..self.n {
                if !x[j].is_zero() {
                    row += self.get(i, j).clone() * x[j].clone();
                }
            }
            acc += x[i].clone() * row;
        }
        acc
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..self.n {
                    s += self.get(i, j).clone() * x[j].clone();
                }
                s
            })
            .collect()
    }
}

impl SymMatrix<Q> {
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self, SymError> {
        let r: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&v| Q::int(v)).collect()).collect();
        Self::from_rows(&r)
    }
}

/// Dense rectangular matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, SymError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(SymError::Dimension("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j].clone()))
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Mat<T>) -> Result<Mat<T>, SymError> {
        if self.cols != other.rows {
            return Err(SymError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out: Mat<T> = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).clone() + a.clone() * b.clone();
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..self.cols {
                    s += self.get(i, j).clone() * x[j].clone();
                }
                s
            })
            .collect()
    }

    /// `self * selfᵀ` as a symmetric matrix.
    pub fn gram_rows(&self) -> SymMatrix<T> {
        SymMatrix::from_fn(self.rows, |i, j| {
            let mut s = T::zero();
            for k in 0..self.cols {
                s += self.get(i, k).clone() * self.get(j, k).clone();
            }
            s
        })
    }

    /// `selfᵀ * self` as a symmetric matrix.
    pub fn gram_cols(&self) -> SymMatrix<T> {
        SymMatrix::from_fn(self.cols, |i, j| {
            let mut s = T::zero();
            for k in 0..self.rows {
                s += self.get(k, i).clone() * self.get(k, j).clone();
            }
            s
        })
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

impl Mat<f64> {
    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}
