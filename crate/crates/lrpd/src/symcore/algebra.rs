use crate::scalar::Scalar;

use super::matrix::{Mat, SymMatrix};
use super::SymError;

/// Kronecker product of two dense matrices.
pub fn kron<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |i, j| a.get(i / p, j / q).clone() * b.get(i % p, j % q).clone())
}

/// Lower-triangular vectorization, row-major: (0,0), (1,0), (1,1), (2,0), ...
pub fn svec<T: Scalar>(v: &SymMatrix<T>) -> Vec<T> {
    v.lower().to_vec()
}

pub fn smat<T: Scalar>(v: &[T]) -> Result<SymMatrix<T>, SymError> {
    let r = svec_dim(v.len()).ok_or_else(|| SymError::Dimension(format!("length {} is not triangular", v.len())))?;
    SymMatrix::from_lower(r, v.to_vec())
}

/// Side length r with r(r+1)/2 = len.
pub fn svec_dim(len: usize) -> Option<usize> {
    let mut r = 0;
    while r * (r + 1) / 2 < len {
        r += 1;
    }
    (r * (r + 1) / 2 == len && r > 0).then_some(r)
}

/// Position of (i, j) in svec order.
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Coefficients c with `xᵀ V y = cᵀ svec(V)` for symmetric V: the symmetrized
/// Kronecker row of the characterization system.
pub fn svec_bilinear<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    let r = x.len();
    let mut c = vec![T::zero(); r * (r + 1) / 2];
    for a in 0..r {
        for b in 0..r {
            let t = x[a].clone() * y[b].clone();
            if !t.is_zero() {
                c[svec_index(a, b)] += t;
            }
        }
    }
    c
}

fn pivot_row<T: Scalar>(m: &[Vec<T>], col: usize, from: usize) -> Option<usize> {
    if T::EXACT {
        (from..m.len()).find(|&i| !m[i][col].is_zero())
    } else {
        let best = (from..m.len()).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        (!m[best][col].is_zero()).then_some(best)
    }
}

pub fn det<T: Scalar>(v: &SymMatrix<T>) -> T {
    det_rows(v.rows())
}

/// Determinant of a square matrix given by rows, by Gaussian elimination.
pub fn det_rows<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut acc = T::one();
    for c in 0..n {
        let Some(p) = pivot_row(&m, c, c) else {
            return T::zero();
        };
        if p != c {
            m.swap(p, c);
            acc = -acc;
        }
        let piv = m[c][c].clone();
        acc *= piv.clone();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / piv.clone();
            for j in c..n {
                let t = f.clone() * m[c][j].clone();
                m[i][j] -= t;
            }
        }
    }
    acc
}

/// Adjugate via cofactors; intended for the small blocks V in the solver.
pub fn adjugate<T: Scalar>(v: &SymMatrix<T>) -> SymMatrix<T> {
    let n = v.n();
    if n == 1 {
        return SymMatrix::from_diag(&[T::one()]);
    }
    let rows = v.rows();
    SymMatrix::from_fn(n, |i, j| {
        // adj(V)_ij = (-1)^(i+j) det(V with row j and column i removed)
        let minor: Vec<Vec<T>> = (0..n)
            .filter(|&a| a != j)
            .map(|a| (0..n).filter(|&b| b != i).map(|b| rows[a][b].clone()).collect())
            .collect();
        let d = det_rows(minor);
        if (i + j) % 2 == 0 {
            d
        } else {
            -d
        }
    })
}

/// Reduced row echelon form of an augmented system `[lhs | rhs]`.
#[derive(Clone, Debug)]
pub struct Rref<T> {
    /// Independent rows, each normalized to a leading 1 in its pivot column.
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub pivots: Vec<usize>,
    /// Some row reduced to `0 = c` with c nonzero.
    pub inconsistent: bool,
    pub ncols: usize,
}

impl<T: Scalar> Rref<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// The solution with all free variables set to zero.
    pub fn particular(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.ncols];
        for (k, &p) in self.pivots.iter().enumerate() {
            x[p] = self.rhs[k].clone();
        }
        x
    }

    /// Solution for given values of the free variables (in `free_columns` order).
    pub fn solve_with(&self, free: &[T]) -> Vec<T> {
        let fc = self.free_columns();
        let mut x = vec![T::zero(); self.ncols];
        for (c, v) in fc.iter().zip(free) {
            x[*c] = v.clone();
        }
        for (k, &p) in self.pivots.iter().enumerate() {
            let mut s = self.rhs[k].clone();
            for &c in &fc {
                if !self.rows[k][c].is_zero() {
                    s -= self.rows[k][c].clone() * x[c].clone();
                }
            }
            x[p] = s;
        }
        x
    }
}

/// Row reduction with exact pivots, or partial pivoting and a relative
/// threshold of `tol` times the row norm in float mode.
pub fn rref<T: Scalar>(lhs: &[Vec<T>], rhs: &[T], ncols: usize, tol: f64) -> Rref<T> {
    let mut m: Vec<Vec<T>> = lhs.to_vec();
    let mut b: Vec<T> = rhs.to_vec();
    let scale: Vec<f64> = m
        .iter()
        .map(|r| r.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let mut scale = scale;
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..ncols {
        if row >= m.len() {
            break;
        }
        let cand = if T::EXACT {
            (row..m.len()).find(|&i| !m[i][c].is_zero())
        } else {
            (row..m.len())
                .filter(|&i| m[i][c].to_f64().abs() > tol * scale[i])
                .max_by(|&a, &b| (m[a][c].to_f64().abs() / scale[a]).partial_cmp(&(m[b][c].to_f64().abs() / scale[b])).unwrap())
        };
        let Some(p) = cand else { continue };
        m.swap(p, row);
        b.swap(p, row);
        scale.swap(p, row);
        let piv = m[row][c].clone();
        for j in 0..ncols {
            m[row][j] = m[row][j].clone() / piv.clone();
        }
        b[row] = b[row].clone() / piv;
        for i in 0..m.len() {
            if i == row || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..ncols {
                if !m[row][j].is_zero() {
                    let t = f.clone() * m[row][j].clone();
                    m[i][j] -= t;
                }
            }
            let t = f * b[row].clone();
            b[i] -= t;
            if !T::EXACT {
                m[i][c] = T::zero();
            }
        }
        pivots.push(c);
        row += 1;
    }
    let inconsistent = (row..m.len()).any(|i| {
        if T::EXACT {
            !b[i].is_zero()
        } else {
            b[i].to_f64().abs() > tol * scale[i].max(1.0)
        }
    });
    m.truncate(row);
    b.truncate(row);
    Rref { rows: m, rhs: b, pivots, inconsistent, ncols }
}

/// Inverse of a nonsingular symmetric matrix.
pub fn inverse<T: Scalar>(v: &SymMatrix<T>, tol: f64) -> Result<SymMatrix<T>, SymError> {
    let n = v.n();
    let rows = v.rows();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let e: Vec<T> = (0..n).map(|i| if i == k { T::one() } else { T::zero() }).collect();
        let r = rref(&rows, &e, n, tol);
        if r.rank() < n {
            return Err(SymError::SingularBlock);
        }
        cols.push(r.particular());
    }
    Ok(SymMatrix::from_fn(n, |i, j| cols[j][i].clone()))
}

/// Solve `M x = b` for square nonsingular M.
pub fn solve<T: Scalar>(m: &[Vec<T>], b: &[T], tol: f64) -> Result<Vec<T>, SymError> {
    let n = m.len();
    let r = rref(m, b, n, tol);
    if r.rank() < n || r.inconsistent {
        return Err(SymError::SingularBlock);
    }
    Ok(r.particular())
}
