//! Multi-start Gauss-Newton for square or underdetermined systems.
//!
//! Steps are minimum-norm least-squares corrections from an SVD, so on a
//! positive-dimensional solution set each start lands on some nearby point.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::poly::Poly;
use super::SolveBudget;

const GRID: [f64; 10] = [-8.0, -4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0, 8.0];

pub(crate) struct Run {
    pub points: Vec<Vec<f64>>,
    pub starts: usize,
    pub converged: usize,
}

/// Full grid for up to three unknowns; beyond that the diagonal, the axes
/// through the all-ones point, and a seeded sample of grid points.
fn starts(k: usize, budget: &SolveBudget) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if k == 0 {
        return vec![vec![]];
    }
    if k <= 3 {
        let total = GRID.len().pow(k as u32);
        for mut idx in 0..total {
            let mut p = Vec::with_capacity(k);
            for _ in 0..k {
                p.push(GRID[idx % GRID.len()]);
                idx /= GRID.len();
            }
            out.push(p);
        }
    } else {
        for g in GRID {
            out.push(vec![g; k]);
        }
        for i in 0..k {
            for g in GRID {
                let mut p = vec![1.0; k];
                p[i] = g;
                out.push(p);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x9e37_79b9_7f4a_7c15);
        for _ in 0..1024 {
            out.push((0..k).map(|_| GRID[rng.gen_range(0..GRID.len())]).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.random_starts {
        out.push((0..k).map(|_| rng.gen_range(-10.0..10.0)).collect());
    }
    out
}

fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Problem<'a> {
    eqs: &'a [Poly<f64>],
    jac: Vec<Vec<Poly<f64>>>,
    k: usize,
}

impl Problem<'_> {
    fn f(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.eqs.len(), self.eqs.iter().map(|p| p.eval_f64(x)))
    }

    fn j(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.eqs.len(), self.k, |i, c| self.jac[i][c].eval_f64(x))
    }

    fn descend(&self, x0: &[f64], max_iter: usize, tol: f64) -> Option<Vec<f64>> {
        let mut x = x0.to_vec();
        let mut f = self.f(&x);
        for _ in 0..max_iter {
            let fn_ = norm_inf(&f);
            if !fn_.is_finite() {
                return None;
            }
            if fn_ <= tol * 1e-4 {
                break;
            }
            let jm = self.j(&x);
            let svd = jm.svd(true, true);
            let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
            if smax == 0.0 {
                return None;
            }
            let step = svd.solve(&f, 1e-12 * smax).ok()?;
            let f2 = f.norm_squared();
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-6 {
                let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
                let fnew = self.f(&xn);
                if fnew.norm_squared() < f2 {
                    x = xn;
                    f = fnew;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            if x.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
                return None;
            }
        }
        if norm_inf(&f) <= tol {
            Some(x)
        } else {
            None
        }
    }
}

/// Points with every equation ≤ `budget.tol`, every constraint positive and
/// every `nonzero` polynomial nonzero, in start order.
pub(crate) fn search(eqs: &[Poly<f64>], cons: &[Poly<f64>], nonzero: &[Poly<f64>], k: usize, budget: &SolveBudget) -> Run {
    let pr = Problem { eqs, jac: eqs.iter().map(|p| (0..k).map(|i| p.derivative(i)).collect()).collect(), k };
    let st = starts(k, budget);
    // side conditions must hold with a margin relative to the point's scale,
    // so limits on the boundary (a vanishing determinant) are not accepted
    let margin = |p: &Poly<f64>, x: &[f64]| 1e-9 * x.iter().fold(1.0f64, |m, v| m.max(v.abs())).powi(p.degree() as i32);
    let admissible = |x: &[f64]| {
        cons.iter().all(|c| c.eval_f64(x) > margin(c, x)) && nonzero.iter().all(|q| q.eval_f64(x).abs() > margin(q, x))
    };
    let work = |x0: &Vec<f64>| -> Option<Vec<f64>> {
        let x = if eqs.is_empty() { x0.clone() } else { pr.descend(x0, budget.max_iter, budget.tol)? };
        Some(x)
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(budget.threads.max(1)).build().expect("thread pool");
    let found: Vec<Option<Vec<f64>>> = pool.install(|| st.par_iter().map(work).collect());
    let converged = found.iter().filter(|x| x.is_some()).count();
    let mut points: Vec<Vec<f64>> = Vec::new();
    for x in found.into_iter().flatten() {
        if !admissible(&x) {
            continue;
        }
        if points.iter().any(|p| p.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-6)) {
            continue;
        }
        points.push(x);
    }
    Run { points, starts: st.len(), converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let b = SolveBudget::default();
        assert_eq!(starts(2, &b).len(), 100 + 32);
        assert_eq!(starts(5, &b).len(), 10 + 50 + 1024 + 32);
    }

    #[test]
    fn finds_both_circle_line_points() {
        let x = Poly::<f64>::var(2, 0);
        let y = Poly::<f64>::var(2, 1);
        let c = x.mul(&x).add(&y.mul(&y)).sub(&Poly::constant(2, 5.0));
        let l = y.sub(&x).sub(&Poly::constant(2, 1.0));
        let run = search(&[c, l], &[], &[], 2, &SolveBudget::default());
        assert_eq!(run.points.len(), 2);
    }

    #[test]
    fn threads_do_not_change_result() {
        let x = Poly::<f64>::var(3, 0);
        let y = Poly::<f64>::var(3, 1);
        let z = Poly::<f64>::var(3, 2);
        let e = vec![x.mul(&y).sub(&Poly::constant(3, 1.0)), y.mul(&z).sub(&x)];
        let a = search(&e, &[], &[], 3, &SolveBudget { threads: 1, ..Default::default() });
        let b = search(&e, &[], &[], 3, &SolveBudget { threads: 8, ..Default::default() });
        assert_eq!(a.points, b.points);
    }
}
