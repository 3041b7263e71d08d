//! Small reference instances used by tests, examples and the acceptance suite.

use crate::scalar::Q;
use crate::symcore::SymMatrix;

/// 5×5 zero-diagonal matrix whose minimum (P2) rank is 3, attained for
/// example at `d = [2, 2, 3, 2, 2]`.
pub fn example1() -> SymMatrix<Q> {
    SymMatrix::from_i64_rows(&[
        vec![0, 1, 2, 1, 0],
        vec![1, 0, 2, 0, 1],
        vec![2, 2, 0, 0, 0],
        vec![1, 0, 0, 0, 1],
        vec![0, 1, 0, 1, 0],
    ])
    .unwrap()
}

/// Six-row extension of [`example1`] whose rank-3 solutions with `J = {1,2,3}`
/// are exactly the two points `V⁻¹(1,1) = V⁻¹(2,2) ∈ {2, 4}`.
pub fn example1_six() -> SymMatrix<Q> {
    SymMatrix::from_i64_rows(&[
        vec![0, 1, 2, 1, 0, 1],
        vec![1, 0, 2, 0, 1, 1],
        vec![2, 2, 0, 0, 0, -1],
        vec![1, 0, 0, 0, 1, 5],
        vec![0, 1, 0, 1, 0, 5],
        vec![1, 1, -1, 5, 5, 0],
    ])
    .unwrap()
}

/// The family member of [`example1`] parameterized by the (1,1) and (2,2)
/// entries: returns the diagonal `d` with `A + Diag(d)` of rank 3.
pub fn example1_family(alpha: &Q, beta: &Q) -> Vec<Q> {
    let one = Q::int(1);
    let gamma = Q::int(4) * (alpha.clone() + beta.clone() - one.clone()) / (alpha.clone() * beta.clone());
    vec![
        alpha.clone(),
        beta.clone(),
        gamma,
        beta.clone() / (alpha.clone() - one.clone()),
        alpha.clone() / (beta.clone() - one),
    ]
}
