//! Generators and small helpers shared by the integration targets.
#![allow(dead_code)]

use lrpd::cli::DecompositionFile;
use lrpd::decompose::{Instance, Kind, SolveResult};
use lrpd::scalar::{Scalar, Q};
use lrpd::symcore::{numeric_rank, SymMatrix};
use rand::Rng;

/// `n × k` integer factor with entries in `-span..=span`.
pub fn int_factor(rng: &mut impl Rng, n: usize, k: usize, span: i64) -> Vec<Vec<i64>> {
    (0..n).map(|_| (0..k).map(|_| rng.gen_range(-span..=span)).collect()).collect()
}

pub fn gram(u: &[Vec<i64>]) -> SymMatrix<Q> {
    SymMatrix::from_fn(u.len(), |i, j| Q::int(u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum()))
}

pub fn exact_rank(m: &SymMatrix<Q>) -> usize {
    numeric_rank(m, 0.0).unwrap().rank
}

/// A planted rank-`r` Gram matrix `UUᵀ` with no zero row, so every zeroed
/// diagonal entry carries information.
pub fn planted_gram(rng: &mut impl Rng, n: usize, r: usize, span: i64) -> SymMatrix<Q> {
    loop {
        let u = int_factor(rng, n, r, span);
        if u.iter().any(|row| row.iter().all(|&v| v == 0)) {
            continue;
        }
        let m = gram(&u);
        if exact_rank(&m) == r {
            return m;
        }
    }
}

pub fn zero_diag(m: &SymMatrix<Q>) -> SymMatrix<Q> {
    SymMatrix::from_fn(m.n(), |i, j| if i == j { Q::int(0) } else { m.get(i, j).clone() })
}

pub fn random_sym(rng: &mut impl Rng, n: usize, span: i64) -> SymMatrix<Q> {
    let lower: Vec<Q> = (0..n * (n + 1) / 2).map(|_| Q::new(rng.gen_range(-span..=span), rng.gen_range(1..=4))).collect();
    SymMatrix::from_lower(n, lower).unwrap()
}

/// Random instance of the requested kind within `n`, with a fraction of the
/// off-diagonal pairs fixed for P3.
pub fn random_instance(rng: &mut impl Rng, kind: Kind, n: usize, r: usize) -> Instance<Q> {
    let mut a = random_sym(rng, n, 3);
    if kind != Kind::P1 {
        a = zero_diag(&a);
    }
    match kind {
        Kind::P3 => {
            let x: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.7)).collect();
            let a = SymMatrix::from_fn(n, |i, j| if x.contains(&(j.min(i), j.max(i))) { a.get(i, j).clone() } else { Q::int(0) });
            Instance::p3(a, x, r)
        }
        _ => Instance::new(kind, a, r),
    }
}

/// Canonical JSON of a solver result, used to compare runs byte for byte.
pub fn result_json<T: Scalar>(res: &SolveResult<T>) -> String {
    let body = match res {
        SolveResult::Feasible(dec) => serde_json::json!({ "decomposition": DecompositionFile::from_decomposition(dec, "") }),
        SolveResult::Infeasible { subsets_checked } => serde_json::json!({ "subsets_checked": subsets_checked }),
        SolveResult::Unknown(notes) => serde_json::json!({ "notes": notes }),
    };
    serde_json::json!({ "label": res.label(), "body": body }).to_string()
}
