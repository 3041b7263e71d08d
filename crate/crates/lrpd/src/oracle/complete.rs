use serde::{Deserialize, Serialize};

use crate::decompose::psd_and_rank;
use crate::reductions::PartialMatrix;
use crate::scalar::Scalar;
use crate::symcore::{lambda_min, SymMatrix};

use super::OracleError;

const MAX_UNKNOWNS: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompletionGrid {
    pub values: Vec<f64>,
    /// Sweeps of alternating projection (rank-`r` truncation, then reset
    /// the specified entries) applied to every grid point.
    pub refine_iters: usize,
    pub tol: f64,
}

impl Default for CompletionGrid {
    fn default() -> Self {
        CompletionGrid { values: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0], refine_iters: 200, tol: 1e-8 }
    }
}

/// Distinct PSD completions of the lowest rank found, as values for
/// `unknowns` (row-major upper-triangle order, diagonal included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub unknowns: Vec<(usize, usize)>,
    pub best_rank: Option<usize>,
    pub completions: Vec<Vec<f64>>,
    pub evaluated: usize,
}

/// Exhaustive grid over the unspecified entries, then local polishing of
/// every grid point toward rank `r`. Results are deduplicated to 1e-6.
pub fn small_completion_search(pm: &PartialMatrix, r: usize, grid: &CompletionGrid) -> Result<CompletionResult, OracleError> {
    let unknowns = pm.unknowns();
    let k = unknowns.len();
    if k > MAX_UNKNOWNS {
        return Err(OracleError::TooManyUnknowns(k, MAX_UNKNOWNS));
    }
    let n = pm.n();
    let base = SymMatrix::from_fn(n, |i, j| pm.get(i, j).map_or(0.0, |v| v.to_f64()));
    let build = |x: &[f64]| {
        let mut m = base.clone();
        for (&(i, j), &v) in unknowns.iter().zip(x) {
            m.set(j, i, v);
        }
        m
    };
    let g = grid.values.len().max(1);
    let total = if k == 0 { 1 } else { g.pow(k as u32) };
    let mut found: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut evaluated = 0;
    for code in 0..total {
        let mut c = code;
        let mut x: Vec<f64> = (0..k)
            .map(|_| {
                let v = grid.values.get(c % g).copied().unwrap_or(0.0);
                c /= g;
                v
            })
            .collect();
        for attempt in 0..2 {
            if attempt == 1 {
                if k == 0 || grid.refine_iters == 0 {
                    break;
                }
                x = polish(&build, &unknowns, &x, r, grid.refine_iters);
            }
            evaluated += 1;
            let m = build(&x);
            if let Ok((true, _, rank)) = psd_and_rank(&m, grid.tol) {
                found.push((rank, x.clone()));
            }
        }
    }
    let best_rank = found.iter().map(|f| f.0).min();
    let mut completions: Vec<Vec<f64>> = Vec::new();
    for (rank, x) in found {
        if Some(rank) != best_rank {
            continue;
        }
        let x: Vec<f64> = x.iter().map(|v| (v * 1e6).round() / 1e6).collect();
        if !completions.iter().any(|c| c.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-6)) {
            completions.push(x);
        }
    }
    completions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(CompletionResult { unknowns, best_rank, completions, evaluated })
}

fn polish(build: &impl Fn(&[f64]) -> SymMatrix<f64>, unknowns: &[(usize, usize)], x0: &[f64], r: usize, iters: usize) -> Vec<f64> {
    use nalgebra::SymmetricEigen;
    let mut x = x0.to_vec();
    for _ in 0..iters {
        let m = build(&x);
        let eig = SymmetricEigen::new(m.to_nalgebra());
        let mut idx: Vec<usize> = (0..m.n()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut change = 0.0f64;
        let mut next = x.clone();
        for (t, &(i, j)) in unknowns.iter().enumerate() {
            let v: f64 = idx.iter().take(r).filter(|&&q| eig.eigenvalues[q] > 0.0).map(|&q| eig.eigenvalues[q] * eig.eigenvectors[(i, q)] * eig.eigenvectors[(j, q)]).sum();
            change = change.max((v - x[t]).abs());
            next[t] = v;
        }
        x = next;
        if change < 1e-15 {
            break;
        }
    }
    // shift the diagonal unknowns up to the PSD cone
    let lm = lambda_min(&build(&x));
    if lm < 0.0 {
        for (t, &(i, j)) in unknowns.iter().enumerate() {
            if i == j {
                x[t] -= lm;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::lemma_block;
    use crate::scalar::Q;

    #[test]
    fn lemma_block_unique_rank_one() {
        let res = small_completion_search(&lemma_block(), 1, &CompletionGrid::default()).unwrap();
        assert_eq!(res.best_rank, Some(1));
        assert_eq!(res.completions, vec![vec![1.0, 1.0, 1.0]]);
    }

    #[test]
    fn fully_specified() {
        let pm = PartialMatrix::from_fn(2, |i, j| Some(if i == j { Q::int(2) } else { Q::int(1) }));
        let res = small_completion_search(&pm, 1, &CompletionGrid::default()).unwrap();
        assert_eq!(res.best_rank, Some(2));
        assert_eq!(res.completions, vec![Vec::<f64>::new()]);
    }

    #[test]
    fn two_by_two_family() {
        let pm = PartialMatrix::from_fn(2, |i, j| if i == j { None } else { Some(Q::int(1)) });
        let res = small_completion_search(&pm, 1, &CompletionGrid::default()).unwrap();
        assert_eq!(res.best_rank, Some(1));
        assert!(res.completions.contains(&vec![1.0, 1.0]));
        assert!(res.completions.iter().all(|c| (c[0] * c[1] - 1.0).abs() < 1e-5), "{:?}", res.completions);
    }

    #[test]
    fn too_many_unknowns() {
        assert!(matches!(small_completion_search(&PartialMatrix::unspecified(4), 1, &CompletionGrid::default()), Err(OracleError::TooManyUnknowns(10, 6))));
    }
}
