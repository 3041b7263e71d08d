use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{psd_and_rank, Instance, Kind};
use crate::scalar::Scalar;
use crate::symcore::{lambda_min, SymMatrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Values for grid starts of the diagonal direction.
    pub grid: Vec<f64>,
    /// Cap on alternating-projection sweeps per trial.
    pub refine_iters: usize,
    /// Relative tolerance of the PSD and rank checks.
    pub rank_tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { grid: vec![0.5, 1.0, 2.0, 3.0, 4.0], refine_iters: 300, rank_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub trial: usize,
    /// `grid` or `random`.
    pub start: String,
    /// Lowest verified rank among the PSD points this trial visited.
    pub rank: Option<usize>,
}

/// Outcome of random probing. `best_rank_found` is the minimum over the
/// trials; `hits` counts trials that verified at rank at most `target_rank`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub label: String,
    pub seed: u64,
    pub trials: usize,
    pub target_rank: usize,
    pub best_rank_found: Option<usize>,
    pub hits: usize,
    pub samples: Vec<ProbeSample>,
}

pub fn rank_probe<T: Scalar>(inst: &Instance<T>, r: usize, trials: usize, seed: u64) -> ProbeReport {
    rank_probe_with(inst, r, trials, seed, &ProbeConfig::default())
}

/// Each trial picks a positive diagonal direction `w` (grid or uniform),
/// plus a random fill on the free pairs for P3, moves to the PSD boundary
/// along `w`, then runs alternating projections onto rank-`r` matrices and
/// the affine set of the instance, repairing PSD at the end. Trial `t` uses
/// stream `t` of a ChaCha8 generator seeded by `seed`, so the report does
/// not depend on the thread count.
pub fn rank_probe_with<T: Scalar>(inst: &Instance<T>, r: usize, trials: usize, seed: u64, cfg: &ProbeConfig) -> ProbeReport {
    let a = inst.a.to_f64();
    let free = if inst.kind == Kind::P3 { inst.free_pairs() } else { Vec::new() };
    let samples: Vec<ProbeSample> = (0..trials).into_par_iter().map(|t| trial(inst.kind, &a, &free, r, t, seed, cfg)).collect();
    let best_rank_found = samples.iter().filter_map(|s| s.rank).min();
    let hits = samples.iter().filter(|s| s.rank.is_some_and(|k| k <= r)).count();
    ProbeReport { label: "evidence".into(), seed, trials, target_rank: r, best_rank_found, hits, samples }
}

struct Point {
    d: Vec<f64>,
    fill: Vec<f64>,
}

fn completed(kind: Kind, a: &SymMatrix<f64>, free: &[(usize, usize)], p: &Point) -> SymMatrix<f64> {
    let sign = if kind == Kind::P1 { -1.0 } else { 1.0 };
    let mut m = a.add_diag(&p.d.iter().map(|v| sign * v).collect::<Vec<_>>());
    for (&(i, j), v) in free.iter().zip(&p.fill) {
        m.set(j, i, m.get(j, i) + v);
    }
    m
}

fn trial(kind: Kind, a: &SymMatrix<f64>, free: &[(usize, usize)], r: usize, t: usize, seed: u64, cfg: &ProbeConfig) -> ProbeSample {
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    let grid = t % 2 == 0 && !cfg.grid.is_empty();
    let w: Vec<f64> = (0..n).map(|_| if grid { cfg.grid[rng.gen_range(0..cfg.grid.len())] } else { rng.gen_range(0.25..4.0) }).collect();
    let scale = a.max_abs().max(1.0);
    let fill: Vec<f64> = free.iter().map(|_| rng.gen_range(-1.0..1.0) * scale).collect();

    // boundary along w: A + L ± t Diag(w) with t at the edge of the PSD cone
    let mut p = Point { d: vec![0.0; n], fill };
    let base = completed(kind, a, free, &p);
    let s: Vec<f64> = w.iter().map(|v| 1.0 / v.sqrt()).collect();
    let lm = lambda_min(&SymMatrix::from_fn(n, |i, j| base.get(i, j) * s[i] * s[j]));
    let step = if kind == Kind::P1 { lm.max(0.0) } else { -lm };
    p.d = w.iter().map(|v| step * v).collect();

    let mut best = evaluate(kind, a, free, &p, cfg.rank_tol);
    for _ in 0..cfg.refine_iters {
        let m = completed(kind, a, free, &p);
        let mr = truncate(&m, r);
        let mut change = 0.0f64;
        for i in 0..n {
            let v = match kind {
                Kind::P1 => (a.get(i, i) - mr[(i, i)]).max(0.0),
                _ => mr[(i, i)] - a.get(i, i),
            };
            change = change.max((v - p.d[i]).abs());
            p.d[i] = v;
        }
        for (k, &(i, j)) in free.iter().enumerate() {
            let v = mr[(j, i)] - a.get(j, i);
            change = change.max((v - p.fill[k]).abs());
            p.fill[k] = v;
        }
        if change <= 1e-14 * scale {
            break;
        }
    }
    newton(kind, a, free, r, &mut p);
    let lm = lambda_min(&completed(kind, a, free, &p));
    if lm < 0.0 {
        for v in p.d.iter_mut() {
            *v = if kind == Kind::P1 { (*v + lm).max(0.0) } else { *v - lm };
        }
    }
    let refined = evaluate(kind, a, free, &p, cfg.rank_tol);
    best = match (best, refined) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    ProbeSample { trial: t, start: if grid { "grid" } else { "random" }.into(), rank: best }
}

/// Sum of the `n − r` smallest eigenvalues in absolute value.
fn tail(m: &SymMatrix<f64>, r: usize) -> f64 {
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[..m.n() - r].iter().map(|v| v.abs()).sum()
}

/// Gauss-Newton on `VᵀMV = 0` with `V` spanning the `n − r` smallest
/// eigenvectors; alternating projections converge only linearly near a
/// low-rank point, this finishes the job.
fn newton(kind: Kind, a: &SymMatrix<f64>, free: &[(usize, usize)], r: usize, p: &mut Point) {
    let n = a.n();
    if r >= n {
        return;
    }
    let c = n - r;
    let sign = if kind == Kind::P1 { -1.0 } else { 1.0 };
    let scale = a.max_abs().max(1.0);
    let mut res = tail(&completed(kind, a, free, p), r);
    for _ in 0..30 {
        if res <= 1e-15 * scale {
            break;
        }
        let m = completed(kind, a, free, p);
        let eig = SymmetricEigen::new(m.to_nalgebra());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let v = DMatrix::from_fn(n, c, |i, k| eig.eigenvectors[(i, idx[k])]);
        let rm = v.transpose() * m.to_nalgebra() * &v;
        let rows: Vec<(usize, usize)> = (0..c).flat_map(|x| (x..c).map(move |y| (x, y))).collect();
        let nv = n + free.len();
        let jac = DMatrix::from_fn(rows.len(), nv, |e, q| {
            let (x, y) = rows[e];
            if q < n {
                sign * v[(q, x)] * v[(q, y)]
            } else {
                let (i, j) = free[q - n];
                v[(i, x)] * v[(j, y)] + v[(j, x)] * v[(i, y)]
            }
        });
        let rhs = nalgebra::DVector::from_fn(rows.len(), |e, _| -rm[(rows[e].0, rows[e].1)]);
        let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-12) else { return };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let mut q = Point { d: p.d.clone(), fill: p.fill.clone() };
            for i in 0..n {
                q.d[i] += t * step[i];
                if kind == Kind::P1 {
                    q.d[i] = q.d[i].max(0.0);
                }
            }
            for k in 0..free.len() {
                q.fill[k] += t * step[n + k];
            }
            let rq = tail(&completed(kind, a, free, &q), r);
            if rq < res {
                *p = q;
                res = rq;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
}

fn evaluate(kind: Kind, a: &SymMatrix<f64>, free: &[(usize, usize)], p: &Point, tol: f64) -> Option<usize> {
    if kind == Kind::P1 && p.d.iter().any(|&v| v < 0.0) {
        return None;
    }
    let m = completed(kind, a, free, p);
    match psd_and_rank(&m, tol) {
        Ok((true, _, rank)) => Some(rank),
        _ => None,
    }
}

/// Best rank-`r` PSD approximation: keep the `r` largest eigenvalues, clipped at zero.
fn truncate(m: &SymMatrix<f64>, r: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let mut idx: Vec<usize> = (0..m.n()).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let mut out = DMatrix::zeros(m.n(), m.n());
    for &k in idx.iter().take(r) {
        let lam = eig.eigenvalues[k];
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += lam * v * v.transpose();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;

    #[test]
    fn example1_never_below_three() {
        let inst = Instance::new(Kind::P2, example1(), 2);
        let rep = rank_probe(&inst, 2, 400, 7);
        assert_eq!(rep.label, "evidence");
        assert_eq!(rep.hits, 0);
        assert_eq!(rep.best_rank_found, Some(3));
    }

    #[test]
    fn ones_off_diagonal() {
        let a = SymMatrix::<f64>::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        let rep = rank_probe(&Instance::new(Kind::P2, a, 1), 1, 20, 1);
        assert_eq!(rep.best_rank_found, Some(1));
    }

    #[test]
    fn planted_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u: Vec<[f64; 2]> = (0..6).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let a = SymMatrix::from_fn(6, |i, j| if i == j { 0.0 } else { u[i][0] * u[j][0] + u[i][1] * u[j][1] });
        let rep = rank_probe(&Instance::new(Kind::P2, a, 2), 2, 20, 5);
        assert_eq!(rep.best_rank_found, Some(2));
    }

    #[test]
    fn thread_independent() {
        let inst = Instance::new(Kind::P2, example1(), 3);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| rank_probe(&inst, 3, 16, 9));
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| rank_probe(&inst, 3, 16, 9));
        assert_eq!(one, many);
    }
}
