use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::scalar::Scalar;

use super::ldl::{self, Failure, Mode, Pivot};
use super::matrix::{Mat, SymMatrix};
use super::SymError;

/// Certificate that a matrix is not positive semidefinite.
#[derive(Clone, Debug, Serialize)]
pub struct PsdWitness<T> {
    /// Index whose reduced pivot was negative (or the first index of an indefinite 2x2 block).
    pub index: usize,
    /// Direction with `xᵀ M x < 0`.
    pub x: Vec<T>,
    /// The value `xᵀ M x`, recomputed on the original matrix.
    pub value: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdVerdict<T> {
    pub psd: bool,
    pub witness: Option<PsdWitness<T>>,
    /// Number of accepted pivots; the rank when `psd` holds.
    pub pivots: usize,
}

fn check_tol<T: Scalar>(tol: f64) -> Result<(), SymError> {
    if !(tol >= 0.0) || (!T::EXACT && tol == 0.0) {
        return Err(SymError::Tolerance(tol));
    }
    Ok(())
}

/// Pivoted LDLᵀ semidefiniteness test with an absolute pivot threshold.
pub fn psd_check<T: Scalar>(m: &SymMatrix<T>, tol: f64) -> Result<PsdVerdict<T>, SymError> {
    check_tol::<T>(tol)?;
    if !m.all_finite() {
        return Err(SymError::NonFinite);
    }
    let (e, store) = ldl::run(m, Mode::Psd, tol, None);
    let n = m.n();
    let seed: Option<(usize, Vec<(usize, T)>)> = match e.failure {
        None => None,
        Some(Failure::NegativeDiag(i)) => Some((i, vec![(i, T::one())])),
        Some(Failure::IndefinitePair(i, j)) => {
            // reduced form on span(e_i, e_j) at x = (1, t): s_ii + 2 t s_ij + t^2 s_jj
            let sij = store.get(i, j);
            let (sii, sjj) = (store.diag(i), store.diag(j));
            let unit = if sij > T::zero() { -T::one() } else { T::one() };
            let t = if (sii.clone() + sjj.clone() - T::from_i64(2) * sij.abs()).sign_tol(0.0) < 0 || sjj.is_zero() {
                unit
            } else {
                -sij / sjj
            };
            Some((i, vec![(i, T::one()), (j, t)]))
        }
    };
    let witness = seed.map(|(idx, s)| {
        let x = ldl::lift(&e.pivots, n, &s);
        let value = m.quad_form(&x);
        PsdWitness { index: idx, x, value }
    });
    Ok(PsdVerdict { psd: witness.is_none(), witness, pivots: e.rank })
}

/// Jacobi equilibration `D^{-1/2} M D^{-1/2}` with `D = |diag(M)|` (unit where zero).
/// Congruence by a positive diagonal preserves both rank and inertia.
pub fn equilibrate(m: &SymMatrix<f64>) -> SymMatrix<f64> {
    let s: Vec<f64> = m.diag().iter().map(|d| if d.abs() > 0.0 { 1.0 / d.abs().sqrt() } else { 1.0 }).collect();
    SymMatrix::from_fn(m.n(), |i, j| m.get(i, j) * s[i] * s[j])
}

/// Smallest eigenvalue of a float symmetric matrix.
pub fn lambda_min(m: &SymMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.to_nalgebra());
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `M = L Diag(d) Lᵀ` with unit pivots in `L`, one column per accepted pivot.
#[derive(Clone, Debug, PartialEq)]
pub struct LdlFactor<T> {
    pub l: Mat<T>,
    pub d: Vec<T>,
}

impl<T: Scalar> LdlFactor<T> {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn reconstruct(&self) -> SymMatrix<T> {
        let n = self.l.nrows();
        SymMatrix::from_fn(n, |i, j| {
            let mut s = T::zero();
            for k in 0..self.d.len() {
                let (a, b) = (self.l.get(i, k), self.l.get(j, k));
                if !a.is_zero() && !b.is_zero() {
                    s += a.clone() * self.d[k].clone() * b.clone();
                }
            }
            s
        })
    }

    /// Float factor `U = L Diag(d)^{1/2}`.
    pub fn to_gram_factor(&self) -> Mat<f64> {
        Mat::from_fn(self.l.nrows(), self.d.len(), |i, k| self.l.get(i, k).to_f64() * self.d[k].to_f64().max(0.0).sqrt())
    }
}

/// LDLᵀ factor of a PSD matrix, or `None` when the PSD test fails. In exact mode
/// the reconstruction is exact; in float mode rejected pivots are dropped.
pub fn psd_factor<T: Scalar>(m: &SymMatrix<T>, tol: f64) -> Result<Option<LdlFactor<T>>, SymError> {
    check_tol::<T>(tol)?;
    if !m.all_finite() {
        return Err(SymError::NonFinite);
    }
    let (e, _) = ldl::run(m, Mode::Psd, tol, None);
    if e.failure.is_some() {
        return Ok(None);
    }
    let n = m.n();
    let k = e.pivots.len();
    let mut l = Mat::zeros(n, k);
    let mut d = Vec::with_capacity(k);
    for (c, piv) in e.pivots.iter().enumerate() {
        let Pivot::One { p, d: dv, mult } = piv else {
            unreachable!("PSD elimination only takes 1x1 pivots")
        };
        l.set(*p, c, T::one());
        for (q, v) in mult {
            l.set(*q, c, v.clone());
        }
        d.push(dv.clone());
    }
    Ok(Some(LdlFactor { l, d }))
}

/// Strict positive definiteness: every pivot above `tol` (exact: above zero).
pub fn is_positive_definite<T: Scalar>(m: &SymMatrix<T>, tol: f64) -> Result<bool, SymError> {
    let v = psd_check(m, tol)?;
    Ok(v.psd && v.pivots == m.n())
}
