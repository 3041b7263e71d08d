use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::ldl::{self, Mode};
use super::matrix::SymMatrix;
use super::psd::equilibrate;
use super::SymError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub tolerance: f64,
    pub smallest_accepted_pivot: Option<f64>,
    pub largest_rejected_pivot: Option<f64>,
}

/// Exact rank in exact mode; in float mode the number of singular values above
/// `tol * sigma_max` (singular values of a symmetric matrix are |eigenvalues|).
/// The report's `tolerance` is that absolute threshold.
pub fn numeric_rank<T: Scalar>(m: &SymMatrix<T>, tol: f64) -> Result<RankReport, SymError> {
    if !m.all_finite() {
        return Err(SymError::NonFinite);
    }
    if T::EXACT {
        let (e, _) = ldl::run(m, Mode::General, 0.0, None);
        return Ok(RankReport {
            rank: e.rank,
            tolerance: 0.0,
            smallest_accepted_pivot: e.min_accepted,
            largest_rejected_pivot: None,
        });
    }
    if !(tol > 0.0) {
        return Err(SymError::Tolerance(tol));
    }
    Ok(svd_rank(&m.to_f64(), tol))
}

pub(crate) fn svd_rank(m: &SymMatrix<f64>, tol: f64) -> RankReport {
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = tol * smax;
    let rank = if smax == 0.0 { 0 } else { sv.iter().filter(|&&s| s > thr).count() };
    RankReport {
        rank,
        tolerance: thr,
        smallest_accepted_pivot: (rank > 0).then(|| sv[rank - 1]),
        largest_rejected_pivot: sv.get(rank).copied(),
    }
}

/// Float rank after Jacobi equilibration, which keeps graded-scale matrices
/// (huge pivot blocks next to unit-size Schur complements) from looking deficient.
/// Exact matrices get their exact rank.
pub fn scaled_rank<T: Scalar>(m: &SymMatrix<T>, tol: f64) -> Result<RankReport, SymError> {
    if T::EXACT {
        return numeric_rank(m, tol);
    }
    if !m.all_finite() {
        return Err(SymError::NonFinite);
    }
    if !(tol > 0.0) {
        return Err(SymError::Tolerance(tol));
    }
    Ok(svd_rank(&equilibrate(&m.to_f64()), tol))
}
