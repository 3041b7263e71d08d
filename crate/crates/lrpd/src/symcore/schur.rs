use crate::scalar::Scalar;

use super::ldl::{self, Mode};
use super::matrix::{Mat, SymMatrix};
use super::SymError;

fn complement(n: usize, j: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !j.contains(i)).collect()
}

/// `M(J̄,J̄) − M(J̄,J) M(J,J)⁺ M(J,J̄)`, with rows of the result ordered as J̄ ascending.
///
/// A singular `M(J,J)` is accepted when `M(J̄,J)` lies in its row space, which is
/// the condition under which the rank additivity still holds for PSD `M`.
pub fn schur_complement<T: Scalar>(m: &SymMatrix<T>, j: &[usize], tol: f64) -> Result<SymMatrix<T>, SymError> {
    let n = m.n();
    if j.is_empty() || j.len() >= n || j.iter().any(|&i| i >= n) {
        return Err(SymError::Dimension(format!("index set {:?} for n = {}", j, n)));
    }
    if !m.all_finite() {
        return Err(SymError::NonFinite);
    }
    let jbar = complement(n, j);
    if T::EXACT {
        exact_schur(m, j, &jbar)
    } else {
        if !(tol > 0.0) {
            return Err(SymError::Tolerance(tol));
        }
        float_schur(m, j, &jbar, tol)
    }
}

fn exact_schur<T: Scalar>(m: &SymMatrix<T>, j: &[usize], jbar: &[usize]) -> Result<SymMatrix<T>, SymError> {
    let n = m.n();
    let mut allowed = vec![false; n];
    for &i in j {
        allowed[i] = true;
    }
    let (e, store) = ldl::run(m, Mode::General, 0.0, Some(&allowed));
    // J-rows that were not pivoted must be zero against everything still active.
    for &i in j {
        if e.active[i] && (!store.diag(i).is_zero() || !store.row(i, &e.active).is_empty()) {
            return Err(SymError::SingularBlock);
        }
    }
    Ok(SymMatrix::from_fn(jbar.len(), |a, b| store.get(jbar[a], jbar[b])))
}

fn float_schur<T: Scalar>(m: &SymMatrix<T>, j: &[usize], jbar: &[usize], tol: f64) -> Result<SymMatrix<T>, SymError> {
    let mf = m.to_f64();
    let a = mf.block(j, j).to_nalgebra();
    let w = mf.block(jbar, j).to_nalgebra();
    let c = mf.block(jbar, jbar).to_nalgebra();
    let amax = a.amax().max(f64::MIN_POSITIVE);
    let pinv = a.clone().pseudo_inverse(tol * amax).map_err(|_| SymError::SingularBlock)?;
    let v = &w * &pinv;
    let resid = (&w - &v * &a).norm();
    if resid > tol * w.norm().max(1.0) {
        return Err(SymError::SingularBlock);
    }
    let s = c - &v * w.transpose();
    let sm = Mat::from_nalgebra(&s);
    Ok(SymMatrix::from_fn(jbar.len(), |x, y| T::from_f64(0.5 * (sm.get(x, y) + sm.get(y, x)))))
}
