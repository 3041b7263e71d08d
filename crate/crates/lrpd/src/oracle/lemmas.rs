use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed `lhs / rhs` for the bound lemmas, 0 otherwise.
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

/// Sample hypotheses of the inverse-of-sum bound, the `K D Kᵀ` perturbation
/// bound and the negative-off-diagonal rank lemma, and count conclusions
/// that fail. Each lemma also gets its degenerate case as trial 0.
pub fn check_perturbation_lemmas(trials: usize, seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![inverse_of_sum(trials, &mut rng), kdk(trials, &mut rng), negative_offdiag(trials, &mut rng)];
    LemmaReport { seed, checks }
}

fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = random(n, n, rng);
    (&m + m.transpose()) * 0.5
}

/// `b` rescaled to Frobenius norm `target`.
fn scaled(b: DMatrix<f64>, target: f64) -> DMatrix<f64> {
    let f = b.norm();
    if f == 0.0 {
        b
    } else {
        b * (target / f)
    }
}

fn inverse_of_sum(trials: usize, rng: &mut ChaCha8Rng) -> LemmaCheck {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let n = rng.gen_range(1..=6);
        let a = loop {
            let a = random(n, n, rng) + DMatrix::identity(n, n) * rng.gen_range(-2.0..2.0);
            if a.clone().try_inverse().is_some_and(|i| i.norm() < 1e6) {
                break a;
            }
        };
        let ainv = a.clone().try_inverse().unwrap();
        let rho = if t == 0 { 0.0 } else { rng.gen_range(0.0..0.99) };
        let b = scaled(random(n, n, rng), rho / ainv.norm());
        let (bn, an) = (b.norm(), ainv.norm());
        let Some(inv) = (&a + &b).try_inverse() else {
            violations += 1;
            continue;
        };
        let z = (inv - &ainv).norm();
        let bound = bn * an * an / (1.0 - bn * an);
        if t == 0 && z != 0.0 {
            violations += 1;
        }
        if bound > 0.0 {
            worst = worst.max(z / bound);
        }
        if z > bound * (1.0 + 1e-9) + 1e-12 * an {
            violations += 1;
        }
    }
    LemmaCheck { name: "inverse of a perturbed matrix".into(), trials, violations, worst_ratio: worst }
}

fn kdk(trials: usize, rng: &mut ChaCha8Rng) -> LemmaCheck {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let k = random(m, n, rng);
        let (d, h, delta) = if t == 0 {
            (DMatrix::identity(n, n), DMatrix::zeros(m, n), DMatrix::zeros(n, n))
        } else {
            let g = random(n, n, rng);
            let d = &g * g.transpose() + DMatrix::identity(n, n) * rng.gen_range(0.05..2.0);
            let dinv = d.clone().try_inverse().unwrap().norm();
            let h = scaled(random(m, n, rng), rng.gen_range(0.0..0.5) * k.norm());
            let delta = scaled(random_sym(n, rng), rng.gen_range(0.0..0.5) / dinv);
            (d, h, delta)
        };
        let dinv = d.clone().try_inverse().unwrap();
        let Some(pinv) = (&d + &delta).try_inverse() else {
            violations += 1;
            continue;
        };
        let kh = &k + &h;
        let lhs = (&kh * pinv * kh.transpose() - &k * &dinv * k.transpose()).norm();
        let (kn, dn) = (k.norm(), dinv.norm());
        let rhs = 0.5 * kn * dn * (9.0 * kn * dn * delta.norm() + 5.0 * h.norm());
        if t == 0 && lhs != 0.0 {
            violations += 1;
        }
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
        if lhs > rhs * (1.0 + 1e-9) + 1e-12 * kn * kn * dn {
            violations += 1;
        }
    }
    LemmaCheck { name: "K D^-1 K^T under perturbation".into(), trials, violations, worst_ratio: worst }
}

/// PSD matrices with negative off-diagonal entries: a weighted Laplacian
/// (singular) or one with a positive diagonal shift, congruent by a random
/// positive diagonal. Checks rank ≥ n − 1, a positive null vector at rank
/// n − 1, and a positive inverse at full rank.
fn negative_offdiag(trials: usize, rng: &mut ChaCha8Rng) -> LemmaCheck {
    let mut violations = 0;
    for t in 0..trials {
        let n = if t == 0 { 1 } else { rng.gen_range(2..=7) };
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let w = rng.gen_range(0.1..2.0);
                a[(i, j)] = -w;
                a[(j, i)] = -w;
                a[(i, i)] += w;
                a[(j, j)] += w;
            }
        }
        let singular = t % 2 == 1;
        if !singular || n == 1 {
            for i in 0..n {
                a[(i, i)] += rng.gen_range(0.05..1.0);
            }
        }
        let s: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let a = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * s[i] * s[j]);
        let eig = SymmetricEigen::new(a.clone());
        let top = eig.eigenvalues.iter().fold(0.0f64, |x, &y| x.max(y.abs()));
        let tol = 1e-10 * top.max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < -tol) {
            violations += 1;
            continue;
        }
        let rank = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
        if rank + 1 < n {
            violations += 1;
        } else if rank + 1 == n {
            let k = (0..n).min_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])).unwrap();
            let v = eig.eigenvectors.column(k);
            let sign = v[0].signum();
            if v.iter().any(|&x| x * sign <= 0.0) {
                violations += 1;
            }
        } else {
            match a.try_inverse() {
                Some(inv) if inv.iter().all(|&x| x > 0.0) => {}
                _ => violations += 1,
            }
        }
    }
    LemmaCheck { name: "negative off-diagonal rank".into(), trials, violations, worst_ratio: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_trials_each() {
        let rep = check_perturbation_lemmas(100, 11);
        assert_eq!(rep.checks.len(), 3);
        for c in &rep.checks {
            assert_eq!(c.trials, 100);
            assert_eq!(c.violations, 0, "{:?}", c);
            assert!(c.worst_ratio <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn reproducible() {
        assert_eq!(check_perturbation_lemmas(10, 2), check_perturbation_lemmas(10, 2));
    }
}
