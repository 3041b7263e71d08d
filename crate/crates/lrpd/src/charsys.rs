//! Linear phase for a fixed index set `J`: the characterization system in the
//! entries of `V = (U_J U_Jᵀ)⁻¹` and the solver that decides it when the linear
//! part alone pins `V` down.
//!
//! For P2 (`A + Diag(d) = UUᵀ`, zero diagonal) the rows are
//! `A(J,i)ᵀ V A(J,j) = A_ij` for `i < j` in `J̄`. For P1 (`A − Diag(d) = UUᵀ`)
//! the same rows hold and additionally `d_i(V) = A_ii − A(J,i)ᵀ V A(J,i)` for
//! `i ∈ J̄` are affine functions of `svec(V)` that must stay nonnegative.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::symcore::{
    inverse, is_positive_definite, rref, svec_bilinear, Rref, SymError, SymMatrix,
};

/// Relative row-reduction threshold used in float mode.
pub const RREF_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum CharKind {
    P1,
    P2,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharError {
    #[error("index set must have between 1 and n-1 distinct entries below n")]
    BadIndexSet,
    #[error("P2 input must have zero diagonal")]
    NonzeroDiagonal,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Affine map `d_i(V) = constant − coeffsᵀ svec(V)` for one `i ∈ J̄` (P1 only).
#[derive(Clone, Debug)]
pub struct AffineD<T> {
    pub index: usize,
    pub coeffs: Vec<T>,
    pub constant: T,
}

impl<T: Scalar> AffineD<T> {
    pub fn eval(&self, sv: &[T]) -> T {
        let mut s = self.constant.clone();
        for (c, v) in self.coeffs.iter().zip(sv) {
            if !c.is_zero() {
                s -= c.clone() * v.clone();
            }
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct CharSystem<T> {
    pub kind: CharKind,
    pub a: SymMatrix<T>,
    pub j: Vec<usize>,
    pub jbar: Vec<usize>,
    /// All raw rows, one per pair `i < l` in `J̄`.
    pub raw_lhs: Vec<Vec<T>>,
    pub raw_rhs: Vec<T>,
    /// Independent basis of the raw rows (row-reduced).
    pub linear_lhs: Vec<Vec<T>>,
    pub linear_rhs: Vec<T>,
    pub reduced: Rref<T>,
    pub d_affine: Vec<AffineD<T>>,
}

impl<T: Scalar> CharSystem<T> {
    pub fn r(&self) -> usize {
        self.j.len()
    }

    pub fn unknowns(&self) -> usize {
        let r = self.r();
        r * (r + 1) / 2
    }

    pub fn inconsistent(&self) -> bool {
        self.reduced.inconsistent
    }
}

fn check_index_set(n: usize, j: &[usize]) -> Result<(), CharError> {
    let mut s = j.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != j.len() || j.is_empty() || j.len() >= n || j.iter().any(|&i| i >= n) {
        return Err(CharError::BadIndexSet);
    }
    Ok(())
}

fn column<T: Scalar>(a: &SymMatrix<T>, j: &[usize], i: usize) -> Vec<T> {
    j.iter().map(|&x| a.get(x, i).clone()).collect()
}

/// Build the linear rows for index set `j` (0-based, any order; sorted internally).
pub fn assemble_linear_system<T: Scalar>(a: &SymMatrix<T>, j: &[usize], kind: CharKind) -> Result<CharSystem<T>, CharError> {
    let n = a.n();
    check_index_set(n, j)?;
    if kind == CharKind::P2 && a.diag().iter().any(|v| !v.is_zero()) {
        return Err(CharError::NonzeroDiagonal);
    }
    let mut j = j.to_vec();
    j.sort_unstable();
    let jbar: Vec<usize> = (0..n).filter(|i| !j.contains(i)).collect();
    let cols: Vec<Vec<T>> = jbar.iter().map(|&i| column(a, &j, i)).collect();
    let mut raw_lhs = Vec::new();
    let mut raw_rhs = Vec::new();
    for x in 0..jbar.len() {
        for y in x + 1..jbar.len() {
            raw_lhs.push(svec_bilinear(&cols[x], &cols[y]));
            raw_rhs.push(a.get(jbar[x], jbar[y]).clone());
        }
    }
    let r = j.len();
    let nv = r * (r + 1) / 2;
    let reduced = rref(&raw_lhs, &raw_rhs, nv, RREF_TOL);
    let d_affine = match kind {
        CharKind::P2 => Vec::new(),
        CharKind::P1 => jbar
            .iter()
            .zip(&cols)
            .map(|(&i, c)| AffineD { index: i, coeffs: svec_bilinear(c, c), constant: a.get(i, i).clone() })
            .collect(),
    };
    Ok(CharSystem {
        kind,
        a: a.clone(),
        linear_lhs: reduced.rows.clone(),
        linear_rhs: reduced.rhs.clone(),
        j,
        jbar,
        raw_lhs,
        raw_rhs,
        reduced,
        d_affine,
    })
}

#[derive(Clone, Debug)]
pub enum Alg1Outcome<T> {
    Solved { d: Vec<T>, v: SymMatrix<T> },
    InfeasibleForJ(String),
    Underdetermined { lhs: Vec<Vec<T>>, rhs: Vec<T> },
    RejectedForJ(String),
}

impl<T> Alg1Outcome<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Alg1Outcome::Solved { .. } => "solved",
            Alg1Outcome::InfeasibleForJ(_) => "infeasible-for-J",
            Alg1Outcome::Underdetermined { .. } => "underdetermined",
            Alg1Outcome::RejectedForJ(_) => "rejected-for-J",
        }
    }
}

const SINGULAR_NOTE: &str = "either the problem has no solution at this rank or U(J,:) is singular in every solution";

/// `d` from `V`: on `J` the diagonal of `V⁻¹`, on `J̄` the quadratic forms
/// `A(J,i)ᵀ V A(J,i)`; for P1 both are subtracted from `diag(A)`.
pub fn recover_d<T: Scalar>(a: &SymMatrix<T>, j: &[usize], v: &SymMatrix<T>, kind: CharKind, tol: f64) -> Result<Vec<T>, CharError> {
    let vinv = inverse(v, tol)?;
    Ok(recover_d_with_inverse(a, j, v, &vinv, kind))
}

pub(crate) fn recover_d_with_inverse<T: Scalar>(
    a: &SymMatrix<T>,
    j: &[usize],
    v: &SymMatrix<T>,
    vinv: &SymMatrix<T>,
    kind: CharKind,
) -> Vec<T> {
    let n = a.n();
    (0..n)
        .map(|i| {
            let w = match j.iter().position(|&x| x == i) {
                Some(p) => vinv.get(p, p).clone(),
                None => v.quad_form(&column(a, j, i)),
            };
            match kind {
                CharKind::P2 => w,
                CharKind::P1 => a.get(i, i).clone() - w,
            }
        })
        .collect()
}

fn close<T: Scalar>(x: &T, y: &T, tol: f64) -> bool {
    if T::EXACT {
        x == y
    } else {
        (x.to_f64() - y.to_f64()).abs() <= tol * (1.0 + y.to_f64().abs())
    }
}

/// Check the nonlinear conditions for a candidate `V` and produce `d`.
pub fn finish_from_v<T: Scalar>(a: &SymMatrix<T>, j: &[usize], v: SymMatrix<T>, kind: CharKind, tol: f64) -> Alg1Outcome<T> {
    match is_positive_definite(&v, if T::EXACT { 0.0 } else { tol }) {
        Ok(true) => {}
        Ok(false) => return Alg1Outcome::InfeasibleForJ(format!("V is not positive definite; {}", SINGULAR_NOTE)),
        Err(e) => return Alg1Outcome::RejectedForJ(e.to_string()),
    }
    let vinv = match inverse(&v, tol) {
        Ok(x) => x,
        Err(_) => return Alg1Outcome::InfeasibleForJ(format!("V is singular; {}", SINGULAR_NOTE)),
    };
    let r = j.len();
    for x in 0..r {
        for y in x + 1..r {
            if !close(vinv.get(x, y), a.get(j[x], j[y]), tol.max(1e-9)) {
                return Alg1Outcome::InfeasibleForJ(format!(
                    "(V⁻¹)[{},{}] = {} differs from A = {}; {}",
                    j[x] + 1,
                    j[y] + 1,
                    vinv.get(x, y),
                    a.get(j[x], j[y]),
                    SINGULAR_NOTE
                ));
            }
        }
    }
    let d = recover_d_with_inverse(a, j, &v, &vinv, kind);
    if kind == CharKind::P1 {
        if let Some((i, di)) = d.iter().enumerate().find(|(_, di)| di.sign_tol(if T::EXACT { 0.0 } else { tol }) < 0) {
            return Alg1Outcome::InfeasibleForJ(format!("d[{}] = {} is negative at the unique V; {}", i + 1, di, SINGULAR_NOTE));
        }
    }
    Alg1Outcome::Solved { d, v }
}

/// The linear phase for one index set.
pub fn algorithm1<T: Scalar>(a: &SymMatrix<T>, j: &[usize], tol: f64, kind: CharKind) -> Result<Alg1Outcome<T>, CharError> {
    let sys = assemble_linear_system(a, j, kind)?;
    Ok(algorithm1_on(&sys, tol))
}

pub fn algorithm1_on<T: Scalar>(sys: &CharSystem<T>, tol: f64) -> Alg1Outcome<T> {
    if sys.inconsistent() {
        return Alg1Outcome::InfeasibleForJ(format!("the linear system in svec(V) is inconsistent; {}", SINGULAR_NOTE));
    }
    if sys.reduced.rank() < sys.unknowns() {
        return Alg1Outcome::Underdetermined { lhs: sys.linear_lhs.clone(), rhs: sys.linear_rhs.clone() };
    }
    let sv = sys.reduced.particular();
    let v = match SymMatrix::from_lower(sys.r(), sv) {
        Ok(v) => v,
        Err(e) => return Alg1Outcome::RejectedForJ(e.to_string()),
    };
    finish_from_v(&sys.a, &sys.j, v, sys.kind, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::scalar::Q;
    use crate::symcore::{numeric_rank, psd_check, smat};

    #[test]
    fn example1_is_underdetermined() {
        let a = example1();
        let sys = assemble_linear_system(&a, &[0, 1, 2], CharKind::P2).unwrap();
        assert!(!sys.inconsistent());
        assert_eq!(sys.raw_lhs.len(), 1);
        // the single row pins V_21 = 1
        assert_eq!(sys.linear_lhs[0], [0, 1, 0, 0, 0, 0].map(Q::int).to_vec());
        assert_eq!(sys.linear_rhs[0], Q::int(1));
        assert!(matches!(algorithm1(&a, &[0, 1, 2], 0.0, CharKind::P2).unwrap(), Alg1Outcome::Underdetermined { .. }));
    }

    #[test]
    fn swap_matrix_singleton() {
        let a = SymMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let sys = assemble_linear_system(&a, &[0], CharKind::P2).unwrap();
        assert_eq!(sys.raw_lhs.len(), 0);
        assert_eq!(sys.unknowns(), 1);
        assert!(matches!(algorithm1_on(&sys, 0.0), Alg1Outcome::Underdetermined { .. }));
    }

    #[test]
    fn ones_minus_identity() {
        let a = SymMatrix::from_i64_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        match algorithm1(&a, &[0], 0.0, CharKind::P2).unwrap() {
            Alg1Outcome::Solved { d, .. } => assert_eq!(d, vec![Q::int(1); 3]),
            o => panic!("{:?}", o.label()),
        }
    }

    #[test]
    fn recover_identity_v() {
        let a: SymMatrix<Q> = SymMatrix::zeros(4);
        let v = SymMatrix::identity(2);
        let d = recover_d(&a, &[1, 3], &v, CharKind::P2, 0.0).unwrap();
        assert_eq!(d, [0, 1, 0, 1].map(Q::int).to_vec());
    }

    #[test]
    fn planted_rank_two() {
        let u = [[1, 2], [0, 1], [3, -1], [1, 1], [-2, 1], [2, 3]];
        let n = u.len();
        let g = SymMatrix::from_fn(n, |i, j| Q::int(u[i][0] * u[j][0] + u[i][1] * u[j][1]));
        let a = SymMatrix::from_fn(n, |i, j| if i == j { Q::int(0) } else { g.get(i, j).clone() });
        match algorithm1(&a, &[0, 1], 0.0, CharKind::P2).unwrap() {
            Alg1Outcome::Solved { d, v } => {
                assert_eq!(d, g.diag());
                let full = a.add_diag(&d);
                assert_eq!(numeric_rank(&full, 0.0).unwrap().rank, 2);
                assert!(psd_check(&full, 0.0).unwrap().psd);
                // V = (U_J U_Jᵀ)⁻¹
                let gj = g.principal(&[0, 1]);
                assert_eq!(inverse(&gj, 0.0).unwrap(), v);
            }
            o => panic!("{}", o.label()),
        }
    }

    #[test]
    fn p1_affine_d_matches() {
        let u = [[1, 2], [0, 1], [3, -1], [1, 1], [-2, 1]];
        let n = u.len();
        let extra = [1, 0, 2, 0, 3];
        let a = SymMatrix::from_fn(n, |i, j| Q::int(u[i][0] * u[j][0] + u[i][1] * u[j][1] + if i == j { extra[i] } else { 0 }));
        let sys = assemble_linear_system(&a, &[0, 1], CharKind::P1).unwrap();
        match algorithm1_on(&sys, 0.0) {
            Alg1Outcome::Solved { d, v } => {
                assert_eq!(d, extra.map(Q::int).to_vec());
                let sv = crate::symcore::svec(&v);
                for f in &sys.d_affine {
                    assert_eq!(f.eval(&sv), Q::int(extra[f.index]));
                }
                assert_eq!(smat(&sv).unwrap(), v);
            }
            o => panic!("{}", o.label()),
        }
    }

    #[test]
    fn rejects_bad_sets() {
        let a = example1();
        assert!(assemble_linear_system(&a, &[], CharKind::P2).is_err());
        assert!(assemble_linear_system(&a, &[0, 0], CharKind::P2).is_err());
        assert!(assemble_linear_system(&a, &[0, 1, 2, 3, 4], CharKind::P2).is_err());
        let b = a.add_diag(&[Q::int(1), Q::int(0), Q::int(0), Q::int(0), Q::int(0)]);
        assert_eq!(assemble_linear_system(&b, &[0], CharKind::P2).unwrap_err(), CharError::NonzeroDiagonal);
    }
}
