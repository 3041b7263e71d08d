//! Dense symmetric matrix kernel: storage, PSD tests, ranks, Schur complements,
//! Kronecker/svec helpers, adjugates and matrix file formats.
//!
//! Every routine is generic over [`Scalar`](crate::scalar::Scalar): with
//! [`Q`](crate::scalar::Q) results are exact and tolerances are ignored, with
//! `f64` they follow the stated thresholds.

mod algebra;
mod io;
pub(crate) mod ldl;
mod matrix;
mod psd;
mod rank;
mod schur;

use thiserror::Error;

pub use algebra::{adjugate, det, det_rows, inverse, kron, rref, smat, solve, svec, svec_bilinear, svec_dim, svec_index, Rref};
pub use io::{format_text, parse_dense_json, parse_matrix, parse_text, AnyMatrix};
pub use matrix::{Mat, SymMatrix};
pub use psd::{equilibrate, is_positive_definite, lambda_min, psd_check, psd_factor, LdlFactor, PsdVerdict, PsdWitness};
pub use rank::{numeric_rank, scaled_rank, RankReport};
pub use schur::schur_complement;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("non-finite entry in float matrix")]
    NonFinite,
    #[error("invalid tolerance {0}")]
    Tolerance(f64),
    #[error("block is singular and the range condition fails")]
    SingularBlock,
    #[error("parse error: {0}")]
    Parse(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::scalar::Q;

    #[test]
    fn psd_zero_one_by_one() {
        let m: SymMatrix<Q> = SymMatrix::zeros(1);
        assert!(psd_check(&m, 0.0).unwrap().psd);
    }

    #[test]
    fn psd_swap_matrix_witness() {
        for v in [
            psd_check(&SymMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]).unwrap(), 0.0).map(|v| {
                let w = v.witness.unwrap();
                (w.x.iter().map(|q| q.to_string()).collect::<Vec<_>>(), w.value.to_string())
            }),
            psd_check(&SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(), 1e-12).map(|v| {
                let w = v.witness.unwrap();
                (w.x.iter().map(|q| q.to_string()).collect::<Vec<_>>(), w.value.to_string())
            }),
        ] {
            let (x, val) = v.unwrap();
            assert_eq!(x, vec!["1", "-1"]);
            assert_eq!(val, "-2");
        }
    }

    #[test]
    fn psd_all_ones() {
        let m = SymMatrix::from_rows(&vec![vec![1.0; 3]; 3]).unwrap();
        let v = psd_check(&m, 1e-12).unwrap();
        assert!(v.psd && v.witness.is_none());
        assert!(psd_check(&m, 0.0).is_err());
    }

    #[test]
    fn psd_negative_pivot_witness_is_negative() {
        let m = SymMatrix::from_i64_rows(&[vec![2, 3, 0], vec![3, 4, 1], vec![0, 1, 5]]).unwrap();
        let v = psd_check(&m, 0.0).unwrap();
        let w = v.witness.unwrap();
        assert!(w.value < Q::int(0));
        assert_eq!(m.quad_form(&w.x), w.value);
    }

    #[test]
    fn ranks() {
        let ones = SymMatrix::from_rows(&vec![vec![1.0; 3]; 3]).unwrap();
        assert_eq!(numeric_rank(&ones, 1e-9).unwrap().rank, 1);
        let i4: SymMatrix<Q> = SymMatrix::identity(4);
        assert_eq!(numeric_rank(&i4, 0.0).unwrap().rank, 4);
        let a = example1().add_diag(&[2, 2, 3, 2, 2].map(Q::int));
        assert_eq!(numeric_rank(&a, 0.0).unwrap().rank, 3);
        assert_eq!(numeric_rank(&a.to_f64(), 1e-9).unwrap().rank, 3);
        assert!(psd_check(&a, 0.0).unwrap().psd);
    }

    #[test]
    fn rank_report_brackets_threshold() {
        let m = SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-12]]).unwrap();
        let r = numeric_rank(&m, 1e-9).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.smallest_accepted_pivot.unwrap() >= r.tolerance);
        assert!(r.largest_rejected_pivot.unwrap() < r.tolerance);
        assert!(numeric_rank(&m, 0.0).is_err());
    }

    #[test]
    fn factor_reconstructs_exactly() {
        let a = example1().add_diag(&[2, 2, 3, 2, 2].map(Q::int));
        let f = psd_factor(&a, 0.0).unwrap().unwrap();
        assert_eq!(f.rank(), 3);
        assert_eq!(f.reconstruct(), a);
        assert!(psd_factor(&example1(), 0.0).unwrap().is_none());
    }

    #[test]
    fn smat_svec_round_trip() {
        let v = SymMatrix::from_i64_rows(&[vec![1, 2, 3], vec![2, 4, 5], vec![3, 5, 6]]).unwrap();
        assert_eq!(svec(&v), [1, 2, 4, 3, 5, 6].map(Q::int).to_vec());
        assert_eq!(smat(&svec(&v)).unwrap(), v);
        assert!(smat(&[Q::int(1), Q::int(2)]).is_err());
    }
}
