use super::{enumerate, gershgorin, verify, DecomposeBudget, DecomposeError, Decomposition, Instance, JVerdict, Kind, SolveResult};
use crate::charsys::{algorithm1, Alg1Outcome, CharKind};
use crate::polysolve::algorithm2;
use crate::scalar::Scalar;
use crate::symcore::{solve, SymMatrix};

pub(crate) fn work_tol<T: Scalar>(budget: &DecomposeBudget) -> f64 {
    if T::EXACT {
        0.0
    } else {
        budget.tol
    }
}

/// `d` for an `A + Diag(d)` of rank at most `n − 1`: dominate the leading
/// `n − 1` block and put its Schur complement in the last slot.
pub(crate) fn corank_one_d<T: Scalar>(a: &SymMatrix<T>) -> Result<Vec<T>, DecomposeError> {
    let n = a.n();
    let g = gershgorin(a) + T::one();
    let mut d = vec![g; n];
    if n == 1 {
        d[0] = -a.get(0, 0).clone();
        return Ok(d);
    }
    let head: Vec<usize> = (0..n - 1).collect();
    let mut blk = a.principal(&head);
    for i in 0..n - 1 {
        let v = blk.get(i, i).clone() + d[i].clone();
        blk.set(i, i, v);
    }
    let b: Vec<T> = head.iter().map(|&i| a.get(i, n - 1).clone()).collect();
    let x = solve(&blk.rows(), &b, 1e-14)?;
    let mut s = -a.get(n - 1, n - 1).clone();
    for i in 0..n - 1 {
        s += b[i].clone() * x[i].clone();
    }
    d[n - 1] = s;
    Ok(d)
}

/// One index set for P2: the linear phase, then the nonlinear one.
pub(crate) fn p2_for_j<T: Scalar>(inst: &Instance<T>, j: &[usize], budget: &DecomposeBudget) -> JVerdict<T> {
    let tol = work_tol::<T>(budget);
    let d = match algorithm1(&inst.a, j, tol, CharKind::P2) {
        Err(e) => return JVerdict::Unknown(e.to_string()),
        Ok(Alg1Outcome::Solved { d, .. }) => d,
        Ok(Alg1Outcome::InfeasibleForJ(_)) => return JVerdict::Infeasible,
        Ok(Alg1Outcome::RejectedForJ(m)) => return JVerdict::Unknown(m),
        Ok(Alg1Outcome::Underdetermined { lhs, rhs }) => {
            match algorithm2(&inst.a, j, &lhs, &rhs, CharKind::P2, &[], &budget.solver, tol) {
                Err(e) => return JVerdict::Unknown(e.to_string()),
                Ok(r) => match r.outcome {
                    Alg1Outcome::Solved { d, .. } => d,
                    Alg1Outcome::InfeasibleForJ(_) if r.complete => return JVerdict::Infeasible,
                    Alg1Outcome::InfeasibleForJ(m) | Alg1Outcome::RejectedForJ(m) => return JVerdict::Unknown(m),
                    Alg1Outcome::Underdetermined { .. } => return JVerdict::Unknown("underdetermined after the nonlinear phase".into()),
                },
            }
        }
    };
    accept(inst, Decomposition::from_d(d), budget)
}

/// Keep a candidate only when it passes the verifier.
pub(crate) fn accept<T: Scalar>(inst: &Instance<T>, dec: Decomposition<T>, budget: &DecomposeBudget) -> JVerdict<T> {
    let rep = verify(inst, &dec, budget.tol);
    if rep.pass {
        JVerdict::Feasible(dec)
    } else {
        let bad: Vec<String> = rep.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        JVerdict::Unknown(format!("candidate failed verification ({})", bad.join("; ")))
    }
}

/// Rank exactly `rr` or less, without looking at smaller ranks.
pub(crate) fn p2_at_rank<T: Scalar>(inst: &Instance<T>, rr: usize, budget: &DecomposeBudget) -> Result<(JVerdict<T>, usize, Vec<String>), DecomposeError> {
    let n = inst.n();
    let sub = inst.with_rank(rr);
    if rr + 1 >= n {
        let d = corank_one_d(&inst.a)?;
        return Ok((accept(&sub, Decomposition::from_d(d), budget), 0, vec![]));
    }
    Ok(enumerate(n, rr, budget, |j| p2_for_j(&sub, j, budget)))
}

pub(crate) fn rank_zero<T: Scalar>(inst: &Instance<T>, sign: &T) -> Option<Decomposition<T>> {
    if inst.a.off_diag_is_zero() {
        Some(Decomposition::from_d(inst.a.diag().into_iter().map(|v| -v * sign.clone()).collect()))
    } else {
        None
    }
}

/// Shared rank loop. `at_rank` answers for one rank.
pub(crate) fn rank_loop<T: Scalar>(
    inst: &Instance<T>,
    budget: &DecomposeBudget,
    zero: Option<Decomposition<T>>,
    mut at_rank: impl FnMut(usize) -> Result<(JVerdict<T>, usize, Vec<String>), DecomposeError>,
) -> Result<SolveResult<T>, DecomposeError> {
    if let Some(dec) = zero {
        if verify(inst, &dec, budget.tol).pass {
            return Ok(SolveResult::Feasible(dec.finalize(inst, budget.tol)?));
        }
    }
    let mut notes = Vec::new();
    let mut checked = 0;
    for rr in 1..=inst.r {
        let (v, c, mut ns) = at_rank(rr)?;
        checked += c;
        match v {
            JVerdict::Feasible(dec) => return Ok(SolveResult::Feasible(dec.finalize(inst, budget.tol)?)),
            JVerdict::Infeasible => {}
            JVerdict::Unknown(m) => {
                notes.push(format!("rank {}: {}", rr, m));
                notes.append(&mut ns);
            }
        }
    }
    if notes.is_empty() {
        if inst.eps > 0.0 {
            return Ok(SolveResult::Unknown(vec![format!(
                "no exact decomposition up to rank {}; infeasibility is not decided for a perturbation budget of {:e}",
                inst.r, inst.eps
            )]));
        }
        Ok(SolveResult::Infeasible { subsets_checked: checked })
    } else {
        Ok(SolveResult::Unknown(notes))
    }
}

/// Rank at most `inst.r` for P2.
pub fn solve_p2<T: Scalar>(inst: &Instance<T>, budget: &DecomposeBudget) -> Result<SolveResult<T>, DecomposeError> {
    if inst.kind != Kind::P2 {
        return Err(DecomposeError::Instance("solve_p2 needs a P2 instance".into()));
    }
    inst.validate()?;
    rank_loop(inst, budget, rank_zero(inst, &T::one()), |rr| p2_at_rank(inst, rr, budget))
}

#[derive(Clone, Debug)]
pub struct MinRank<T> {
    pub rank: usize,
    pub decomposition: Decomposition<T>,
    /// Every smaller rank was ruled out with complete certificates.
    pub certified: bool,
    pub notes: Vec<String>,
}

/// Smallest rank the drivers can reach. Ranks from `n − 1` on always
/// succeed, so this never fails for a valid input.
pub fn solve_p2_min<T: Scalar>(a: &SymMatrix<T>, budget: &DecomposeBudget) -> Result<MinRank<T>, DecomposeError> {
    let n = a.n();
    let inst = Instance::new(Kind::P2, a.clone(), n);
    inst.validate()?;
    if let Some(dec) = rank_zero(&inst, &T::one()) {
        return Ok(MinRank { rank: 0, decomposition: dec.finalize(&inst, budget.tol)?, certified: true, notes: vec![] });
    }
    let mut certified = true;
    let mut notes = Vec::new();
    for rr in 1..=n {
        let (v, _, mut ns) = p2_at_rank(&inst, rr, budget)?;
        match v {
            JVerdict::Feasible(dec) => {
                let dec = dec.finalize(&inst.with_rank(rr), budget.tol)?;
                return Ok(MinRank { rank: dec.achieved_rank, decomposition: dec, certified, notes });
            }
            JVerdict::Infeasible => {}
            JVerdict::Unknown(m) => {
                certified = false;
                notes.push(format!("rank {}: {}", rr, m));
                notes.append(&mut ns);
            }
        }
    }
    Err(DecomposeError::Instance("no decomposition found at any rank".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::scalar::Q;

    #[test]
    fn example1_rank_three_not_two() {
        let b = DecomposeBudget::default();
        let inst = Instance::new(Kind::P2, example1(), 3);
        match solve_p2(&inst, &b).unwrap() {
            SolveResult::Feasible(dec) => {
                assert_eq!(dec.achieved_rank, 3);
                assert!(verify(&inst, &dec, 0.0).pass);
            }
            o => panic!("{:?}", o),
        }
        match solve_p2(&inst.with_rank(2), &b).unwrap() {
            SolveResult::Infeasible { subsets_checked } => assert_eq!(subsets_checked, 5 + 10),
            o => panic!("{:?}", o),
        }
    }

    #[test]
    fn swap_matrix() {
        let a = SymMatrix::<Q>::from_i64_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let m = solve_p2_min(&a, &DecomposeBudget::default()).unwrap();
        assert_eq!(m.rank, 1);
        assert!(m.certified);
        // any d with d1 d2 = 1, d > 0 works
        let d = &m.decomposition.d;
        assert_eq!(d[0].clone() * d[1].clone(), Q::int(1));
        assert!(d[0].sign_tol(0.0) > 0);
    }

    #[test]
    fn corank_one_is_psd() {
        let a = example1();
        let d = corank_one_d(&a).unwrap();
        let m = a.add_diag(&d);
        assert!(crate::symcore::psd_check(&m, 0.0).unwrap().psd);
        assert_eq!(crate::symcore::numeric_rank(&m, 0.0).unwrap().rank, 4);
    }

    #[test]
    fn float_mode_example() {
        let inst = Instance::new(Kind::P2, example1().to_f64(), 3);
        let b = DecomposeBudget::default();
        assert!(solve_p2(&inst, &b).unwrap().is_feasible());
        assert!(matches!(solve_p2(&inst.with_rank(2), &b).unwrap(), SolveResult::Infeasible { .. }));
    }

    #[test]
    fn zero_matrix_is_rank_zero() {
        let a: SymMatrix<Q> = SymMatrix::zeros(3);
        let m = solve_p2_min(&a, &DecomposeBudget::default()).unwrap();
        assert_eq!(m.rank, 0);
    }
}
