use super::p2::{accept, rank_loop, rank_zero, work_tol};
use super::{enumerate, DecomposeBudget, DecomposeError, Decomposition, Instance, JVerdict, Kind, SolveResult};
use crate::charsys::{algorithm1, Alg1Outcome, CharKind};
use crate::polysolve::{algorithm2, Solution};
use crate::scalar::Scalar;
use crate::symcore::{lambda_min, numeric_rank, psd_check, rref, solve, svec_bilinear, SymMatrix};

fn tri(r: usize) -> usize {
    r * (r + 1) / 2
}

fn is_psd<T: Scalar>(a: &SymMatrix<T>, tol: f64) -> Result<bool, DecomposeError> {
    if T::EXACT {
        Ok(psd_check(a, 0.0)?.psd)
    } else {
        Ok(lambda_min(&a.to_f64()) >= -tol * a.max_abs().max(1.0))
    }
}

/// `d` at a float solution of the P1 system: the `d_J` unknowns and
/// `A_ii − A(J,i)ᵀ V A(J,i)` on `J̄`.
fn d_at(a: &SymMatrix<f64>, j: &[usize], sol: &Solution) -> Vec<f64> {
    let r = j.len();
    let sv = &sol.values[..tri(r)];
    (0..a.n())
        .map(|i| match j.iter().position(|&x| x == i) {
            Some(p) => sol.values[tri(r) + r + p],
            None => {
                let col: Vec<f64> = j.iter().map(|&x| *a.get(x, i)).collect();
                let c = svec_bilinear(&col, &col);
                a.get(i, i) - c.iter().zip(sv).map(|(x, y)| x * y).sum::<f64>()
            }
        })
        .collect()
}

/// Nonlinear phase for P1 with the facet recursion: whenever every solution
/// found has some `d_i < 0`, pin one such `d_i` to zero and re-solve. Only
/// equations that raise the rank of the linear part are appended.
fn facet_recursion<T: Scalar>(inst: &Instance<T>, j: &[usize], lhs: &[Vec<T>], rhs: &[T], budget: &DecomposeBudget) -> JVerdict<T> {
    let tol = work_tol::<T>(budget);
    let r = j.len();
    let af = inst.a.to_f64();
    let nsv = tri(r);
    let mut facets: Vec<usize> = Vec::new();
    // linear rows in svec(V) for the facets on J̄, plus the system's own rows
    let mut rows: Vec<Vec<f64>> = lhs.iter().map(|row| row.iter().map(|x| x.to_f64()).collect()).collect();
    let rank_of = |rows: &[Vec<f64>]| rref(rows, &vec![0.0; rows.len()], nsv, 1e-10).rank();
    let base_rank = rank_of(&rows);
    let mut jbar_facets = 0;
    loop {
        let res = match algorithm2(&inst.a, j, lhs, rhs, CharKind::P1, &facets, &budget.solver, tol) {
            Ok(r) => r,
            Err(e) => return JVerdict::Unknown(e.to_string()),
        };
        match res.outcome {
            Alg1Outcome::Solved { d, .. } => return accept(inst, Decomposition::from_d(d), budget),
            Alg1Outcome::InfeasibleForJ(_) if res.complete && facets.is_empty() => return JVerdict::Infeasible,
            Alg1Outcome::InfeasibleForJ(m) if res.complete => {
                return JVerdict::Unknown(format!("no solution on the facet {:?} ({}); the recursion alone does not certify infeasibility", facets.iter().map(|i| i + 1).collect::<Vec<_>>(), m))
            }
            _ => {}
        }
        if res.solutions.is_empty() {
            return JVerdict::Unknown(match res.outcome {
                Alg1Outcome::RejectedForJ(m) | Alg1Outcome::InfeasibleForJ(m) => m,
                _ => "no solution found".into(),
            });
        }
        if facets.len() >= nsv {
            return JVerdict::Unknown(format!("facet recursion reached its depth bound {}", nsv));
        }
        // most negative d_i over the solutions whose facet is new and independent
        let mut best: Option<(f64, usize)> = None;
        for sol in &res.solutions {
            for (i, di) in d_at(&af, j, sol).into_iter().enumerate() {
                if di >= -budget.tol || facets.contains(&i) || best.is_some_and(|(b, _)| b <= di) {
                    continue;
                }
                let ok = if j.contains(&i) {
                    true
                } else {
                    let col: Vec<f64> = j.iter().map(|&x| *af.get(x, i)).collect();
                    let mut t = rows.clone();
                    t.push(svec_bilinear(&col, &col));
                    rank_of(&t) > rank_of(&rows)
                };
                if ok {
                    best = Some((di, i));
                }
            }
        }
        let Some((_, i)) = best else {
            return JVerdict::Unknown(match res.outcome {
                Alg1Outcome::RejectedForJ(m) | Alg1Outcome::InfeasibleForJ(m) => format!("no independent facet to append: {}", m),
                _ => "no independent facet to append".into(),
            });
        };
        if !j.contains(&i) {
            let col: Vec<f64> = j.iter().map(|&x| *af.get(x, i)).collect();
            rows.push(svec_bilinear(&col, &col));
            jbar_facets += 1;
            assert_eq!(rank_of(&rows), base_rank + jbar_facets, "facet equations must stay independent");
        }
        facets.push(i);
    }
}

fn p1_for_j<T: Scalar>(inst: &Instance<T>, j: &[usize], budget: &DecomposeBudget) -> JVerdict<T> {
    let tol = work_tol::<T>(budget);
    match algorithm1(&inst.a, j, tol, CharKind::P1) {
        Err(e) => JVerdict::Unknown(e.to_string()),
        Ok(Alg1Outcome::Solved { d, .. }) => accept(inst, Decomposition::from_d(d), budget),
        Ok(Alg1Outcome::InfeasibleForJ(_)) => JVerdict::Infeasible,
        Ok(Alg1Outcome::RejectedForJ(m)) => JVerdict::Unknown(m),
        Ok(Alg1Outcome::Underdetermined { lhs, rhs }) => facet_recursion(inst, j, &lhs, &rhs, budget),
    }
}

/// Rank at most `inst.r` for P1 (`A − Diag(d) ⪰ 0`, `d ≥ 0`).
pub fn solve_p1<T: Scalar>(inst: &Instance<T>, budget: &DecomposeBudget) -> Result<SolveResult<T>, DecomposeError> {
    if inst.kind != Kind::P1 {
        return Err(DecomposeError::Instance("solve_p1 needs a P1 instance".into()));
    }
    inst.validate()?;
    let n = inst.n();
    // A = M + Diag(d) with M ⪰ 0 and d ≥ 0 forces A ⪰ 0
    if !is_psd(&inst.a, budget.tol)? {
        return Ok(SolveResult::Infeasible { subsets_checked: 0 });
    }
    let rank_a = numeric_rank(&inst.a, work_tol::<T>(budget))?.rank;
    let zero = rank_zero(inst, &-T::one());
    rank_loop(inst, budget, zero, |rr| {
        let sub = inst.with_rank(rr);
        if rank_a <= rr {
            return Ok((accept(&sub, Decomposition::from_d(vec![T::zero(); n]), budget), 0, vec![]));
        }
        if rr + 1 >= n {
            // A ≻ 0 here: take the last Schur complement off the diagonal
            let head: Vec<usize> = (0..n - 1).collect();
            let blk = inst.a.principal(&head);
            let b: Vec<T> = head.iter().map(|&i| inst.a.get(i, n - 1).clone()).collect();
            let x = solve(&blk.rows(), &b, 1e-14)?;
            let mut d = vec![T::zero(); n];
            let mut s = inst.a.get(n - 1, n - 1).clone();
            for i in 0..n - 1 {
                s -= b[i].clone() * x[i].clone();
            }
            d[n - 1] = s;
            return Ok((accept(&sub, Decomposition::from_d(d), budget), 0, vec![]));
        }
        Ok(enumerate(n, rr, budget, |j| p1_for_j(&sub, j, budget)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::verify;
    use crate::scalar::Q;

    fn q(rows: &[Vec<i64>]) -> SymMatrix<Q> {
        SymMatrix::from_i64_rows(rows).unwrap()
    }

    fn feasible(r: SolveResult<Q>) -> Decomposition<Q> {
        match r {
            SolveResult::Feasible(d) => d,
            o => panic!("{:?}", o),
        }
    }

    #[test]
    fn all_ones_needs_nothing() {
        let inst = Instance::new(Kind::P1, q(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]), 1);
        let dec = feasible(solve_p1(&inst, &DecomposeBudget::default()).unwrap());
        assert_eq!(dec.d, vec![Q::int(0); 3]);
    }

    #[test]
    fn identity_goes_to_zero() {
        let inst = Instance::new(Kind::P1, SymMatrix::<Q>::identity(3), 1);
        let dec = feasible(solve_p1(&inst, &DecomposeBudget::default()).unwrap());
        assert_eq!(dec.d, vec![Q::int(1); 3]);
        assert_eq!(dec.achieved_rank, 0);
    }

    #[test]
    fn indefinite_is_infeasible() {
        let inst = Instance::new(Kind::P1, q(&[vec![0, 1], vec![1, 0]]), 1);
        assert!(matches!(solve_p1(&inst, &DecomposeBudget::default()).unwrap(), SolveResult::Infeasible { .. }));
    }

    #[test]
    fn planted_rank_one_plus_noise() {
        // u uᵀ + Diag(1, 2, 0, 3) with u = (1, 2, 1, 1)
        let u = [1, 2, 1, 1];
        let g = [1, 2, 0, 3];
        let a = SymMatrix::from_fn(4, |i, j| Q::int(u[i] * u[j] + if i == j { g[i] } else { 0 }));
        let inst = Instance::new(Kind::P1, a, 1);
        let dec = feasible(solve_p1(&inst, &DecomposeBudget::default()).unwrap());
        assert_eq!(dec.d, g.iter().map(|&x| Q::int(x)).collect::<Vec<_>>());
        assert!(verify(&inst, &dec, 0.0).pass);
    }

    #[test]
    fn negative_noise_is_rejected() {
        // the unique rank-one fit has u1² = 4 > A11
        let a = q(&[vec![3, 4, 4], vec![4, 10, 4], vec![4, 4, 10]]);
        let inst = Instance::new(Kind::P1, a.clone(), 1);
        let out = solve_p1(&inst, &DecomposeBudget::default()).unwrap();
        assert!(!out.is_feasible(), "{:?}", out);
        assert!(solve_p1(&inst.with_rank(2), &DecomposeBudget::default()).unwrap().is_feasible());
    }

    #[test]
    fn corank_one_schur() {
        let a = q(&[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]);
        let inst = Instance::new(Kind::P1, a, 2);
        let dec = feasible(solve_p1(&inst, &DecomposeBudget::default()).unwrap());
        assert!(verify(&inst, &dec, 0.0).pass);
        assert!(dec.achieved_rank <= 2);
    }
}
