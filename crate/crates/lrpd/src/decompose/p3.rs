use serde::{Deserialize, Serialize};

use super::p2::{accept, corank_one_d, p2_at_rank, rank_loop};
use super::{enumerate, DecomposeBudget, DecomposeError, Decomposition, Instance, JVerdict, Kind, SolveResult};
use crate::polysolve::inner2::{sym_adj, sym_det};
use crate::polysolve::{solve_system, Poly, PolyError, PolySystem, Solution, SolveOutcome};
use crate::reductions::reduce_p3_to_p2;
use crate::scalar::{Scalar, Q};
use crate::symcore::{inverse, SymMatrix};

/// Which path produced the final verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P3Route {
    /// `A = 0`, so `L = 0` already works.
    Trivial,
    /// Per-`J` polynomial system in the free entries.
    Direct,
    /// Through the P2 instance of size `2m + n`.
    Compiled,
    /// Diagonal fill of rank `n − 1`.
    Fallback,
}

/// Entry of the completed matrix: a constant from `A` or an unknown.
#[derive(Clone, Copy)]
enum Slot {
    Fixed,
    Var(usize),
}

struct DirectSystem<T> {
    sys: PolySystem<T>,
    /// For each `(x, y)` with `x ∈ J` (or both in `J`), the slot.
    slots: Vec<Vec<Slot>>,
    unknowns: usize,
}

/// Unknowns are the diagonal on `J` and the free pairs touching `J`; the
/// equations ask the Schur complement of `M_JJ` to vanish on the fixed pairs
/// inside `J̄`, with `M_JJ ≻ 0` through leading-minor slacks.
fn direct_system<T: Scalar>(inst: &Instance<T>, j: &[usize]) -> Result<DirectSystem<T>, PolyError> {
    let n = inst.n();
    let r = j.len();
    let jbar: Vec<usize> = (0..n).filter(|x| !j.contains(x)).collect();
    let fixed = |x: usize, y: usize| x != y && inst.x.binary_search(&(x.min(y), x.max(y))).is_ok();
    let mut slots = vec![vec![Slot::Fixed; n]; n];
    let mut names = Vec::new();
    for &x in j {
        for y in 0..n {
            if j.contains(&y) && y > x {
                continue;
            }
            if !fixed(x, y) && matches!(slots[x][y], Slot::Fixed) {
                slots[x][y] = Slot::Var(names.len());
                slots[y][x] = Slot::Var(names.len());
                names.push(format!("m{}_{}", x.max(y) + 1, x.min(y) + 1));
            }
        }
    }
    let unknowns = names.len();
    names.extend((1..=r).map(|k| format!("z{}", k)));
    let nv = names.len();
    let entry = |x: usize, y: usize| match slots[x][y] {
        Slot::Var(v) => Poly::var(nv, v),
        Slot::Fixed => Poly::constant(nv, inst.a.get(x, y).clone()),
    };
    let w: Vec<Vec<Poly<T>>> = j.iter().map(|&x| j.iter().map(|&y| entry(x, y)).collect()).collect();
    let det = sym_det(&w, nv);
    let adj: Vec<Vec<Poly<T>>> = (0..r).map(|a| (0..r).map(|b| sym_adj(&w, a, b, nv)).collect()).collect();
    let mut eqs = Vec::new();
    for (p, &i) in jbar.iter().enumerate() {
        let ci: Vec<Poly<T>> = j.iter().map(|&x| entry(x, i)).collect();
        for &l in &jbar[p + 1..] {
            if !fixed(i, l) {
                continue;
            }
            let cl: Vec<Poly<T>> = j.iter().map(|&x| entry(x, l)).collect();
            let mut q = Poly::zero(nv);
            for a in 0..r {
                for b in 0..r {
                    if !ci[a].is_zero() && !cl[b].is_zero() {
                        q = q.add(&ci[a].mul(&adj[a][b]).mul(&cl[b]));
                    }
                }
            }
            eqs.push(q.sub(&det.scale(inst.a.get(i, l))));
        }
    }
    for k in 1..=r {
        let lead: Vec<Vec<Poly<T>>> = w[..k].iter().map(|row| row[..k].to_vec()).collect();
        let z = Poly::var(nv, unknowns + k - 1);
        eqs.push(sym_det(&lead, nv).mul(&z.mul(&z)).sub(&Poly::constant(nv, T::one())));
    }
    let sys = PolySystem::new(names, eqs)?.with_slacks((unknowns..nv).collect());
    Ok(DirectSystem { sys, slots, unknowns })
}

/// Rational near a float, preferring small denominators.
fn rationalize(v: f64) -> Option<Q> {
    let w = 1e-9 * (1.0 + v.abs());
    Some(Q::simplest_between(&Q::from_f64_exact(v - w)?, &Q::from_f64_exact(v + w)?))
}

/// Completed matrix at a solution: `M_JJ` and `M(J, J̄)` from the slots,
/// `M(J̄, J̄)` as the Schur fill `M(J̄,J) M_JJ⁻¹ M(J,J̄)`.
fn complete<T: Scalar>(inst: &Instance<T>, j: &[usize], ds: &DirectSystem<T>, vals: &[T], tol: f64) -> Option<SymMatrix<T>> {
    let n = inst.n();
    let r = j.len();
    let at = |x: usize, y: usize| match ds.slots[x][y] {
        Slot::Var(v) => vals[v].clone(),
        Slot::Fixed => inst.a.get(x, y).clone(),
    };
    let w = SymMatrix::from_fn(r, |a, b| at(j[a], j[b]));
    let winv = inverse(&w, tol).ok()?;
    let jbar: Vec<usize> = (0..n).filter(|x| !j.contains(x)).collect();
    let mut m: SymMatrix<T> = SymMatrix::zeros(n);
    for &x in j {
        for y in 0..n {
            m.set(x, y, at(x, y));
        }
    }
    for (p, &i) in jbar.iter().enumerate() {
        let ci: Vec<T> = j.iter().map(|&x| at(x, i)).collect();
        let wi = winv.mul_vec(&ci);
        for &l in &jbar[p..] {
            let mut s = T::zero();
            for (a, &x) in j.iter().enumerate() {
                s += wi[a].clone() * at(x, l);
            }
            m.set(i, l, s);
        }
    }
    Some(m)
}

fn direct_for_j<T: Scalar>(inst: &Instance<T>, j: &[usize], budget: &DecomposeBudget) -> JVerdict<T> {
    let ds = match direct_system(inst, j) {
        Ok(d) => d,
        Err(e) => return JVerdict::Unknown(e.to_string()),
    };
    let sols: Vec<Solution> = match solve_system(&ds.sys, &budget.solver) {
        Err(e) => return JVerdict::Unknown(e.to_string()),
        Ok(SolveOutcome::NoneFoundComplete) => return JVerdict::Infeasible,
        Ok(SolveOutcome::NoneFoundIncomplete(rep)) => {
            return JVerdict::Unknown(format!("search incomplete: {} unknowns, {} starts, {}", rep.unknowns, rep.starts, rep.note))
        }
        Ok(SolveOutcome::Solutions(s)) => s,
    };
    let tol = if T::EXACT { 0.0 } else { budget.tol };
    let mut last = String::from("no solution found");
    for sol in &sols {
        let vals: Option<Vec<T>> = (0..ds.unknowns)
            .map(|v| {
                if T::EXACT {
                    sol.exact[v].clone().or_else(|| rationalize(sol.values[v])).map(|q| T::from_q(&q))
                } else {
                    Some(T::from_f64(sol.values[v]))
                }
            })
            .collect();
        let Some(m) = vals.and_then(|v| complete(inst, j, &ds, &v, tol)) else {
            last = "solution did not yield a nonsingular block".into();
            continue;
        };
        match accept(inst, Decomposition::from_fill(m.sub(&inst.a)), budget) {
            f @ JVerdict::Feasible(_) => return f,
            JVerdict::Unknown(msg) => last = msg,
            JVerdict::Infeasible => {}
        }
    }
    JVerdict::Unknown(format!("uncertified: {}", last))
}

/// The compiled route at one rank: P2 on `B` at rank `2m + rr`, then the
/// backward map.
fn compiled_at_rank<T: Scalar>(inst: &Instance<T>, rr: usize, budget: &DecomposeBudget) -> Result<(JVerdict<T>, usize, Vec<String>), DecomposeError> {
    let c = reduce_p3_to_p2(&inst.a, &inst.x)?;
    // the per-J system has one unknown per entry of V before elimination,
    // and symbolic elimination on anything much larger does not finish
    let k = 2 * c.m + rr;
    if k * (k + 1) / 2 > budget.solver.var_cap {
        return Ok((JVerdict::Unknown(format!("compiled rank {} needs {} unknowns, cap {}", k, k * (k + 1) / 2, budget.solver.var_cap)), 0, vec![]));
    }
    let big = Instance::new(Kind::P2, c.b.clone(), k);
    let (v, k, notes) = p2_at_rank(&big, 2 * c.m + rr, budget)?;
    let v = match v {
        JVerdict::Feasible(dec) => match c.backward(&dec.d) {
            Ok(r) => accept(&inst.with_rank(rr), Decomposition::from_fill(r), budget),
            Err(e) => JVerdict::Unknown(e.to_string()),
        },
        o => o,
    };
    Ok((v, k, notes))
}

/// Rank at most `inst.r` for P3. The direct route runs first at each rank;
/// an incomplete answer there falls through to the compiled route when the
/// number of free pairs is within `budget.p3_compiled_cap`.
pub fn solve_p3<T: Scalar>(inst: &Instance<T>, budget: &DecomposeBudget) -> Result<(SolveResult<T>, P3Route), DecomposeError> {
    if inst.kind != Kind::P3 {
        return Err(DecomposeError::Instance("solve_p3 needs a P3 instance".into()));
    }
    inst.validate()?;
    let n = inst.n();
    let m = inst.free_pairs().len();
    let zero = if inst.a.nnz() == 0 { Some(Decomposition::from_fill(SymMatrix::zeros(n))) } else { None };
    if zero.is_some() {
        return Ok((rank_loop(inst, budget, zero, |_| unreachable!())?, P3Route::Trivial));
    }
    let mut route = P3Route::Direct;
    let res = rank_loop(inst, budget, None, |rr| {
        let sub = inst.with_rank(rr);
        if rr + 1 >= n {
            route = P3Route::Fallback;
            let d = corank_one_d(&inst.a)?;
            return Ok((accept(&sub, Decomposition::from_fill(SymMatrix::from_diag(&d)), budget), 0, vec![]));
        }
        let direct = enumerate(n, rr, budget, |j| direct_for_j(&sub, j, budget));
        if !matches!(direct.0, JVerdict::Unknown(_)) || m > budget.p3_compiled_cap {
            route = P3Route::Direct;
            return Ok(direct);
        }
        let comp = compiled_at_rank(inst, rr, budget)?;
        if matches!(comp.0, JVerdict::Unknown(_)) {
            let mut notes = direct.2;
            notes.extend(comp.2);
            return Ok((comp.0, direct.1 + comp.1, notes));
        }
        route = P3Route::Compiled;
        Ok(comp)
    })?;
    Ok((res, route))
}

/// The compiled route on its own, for cross-checking the direct one.
pub fn solve_p3_compiled<T: Scalar>(inst: &Instance<T>, budget: &DecomposeBudget) -> Result<SolveResult<T>, DecomposeError> {
    inst.validate()?;
    let m = inst.free_pairs().len();
    if m > budget.p3_compiled_cap {
        return Ok(SolveResult::Unknown(vec![format!("{} free pairs exceed the compiled-route cap {}", m, budget.p3_compiled_cap)]));
    }
    rank_loop(inst, budget, None, |rr| compiled_at_rank(inst, rr, budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::verify;

    fn q(rows: &[Vec<i64>]) -> SymMatrix<Q> {
        SymMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn one_free_pair() {
        let a = q(&[vec![0, 0, 1], vec![0, 0, 1], vec![1, 1, 0]]);
        let inst = Instance::p3(a, vec![(0, 2), (1, 2)], 1);
        let (res, route) = solve_p3(&inst, &DecomposeBudget::default()).unwrap();
        assert_eq!(route, P3Route::Direct);
        match res {
            SolveResult::Feasible(dec) => {
                assert!(verify(&inst, &dec, 0.0).pass);
                assert_eq!(dec.achieved_rank, 1);
            }
            o => panic!("{:?}", o),
        }
        assert!(solve_p3_compiled(&inst, &DecomposeBudget::default()).unwrap().is_feasible());
    }

    #[test]
    fn all_fixed_zero() {
        let inst = Instance::p3(SymMatrix::<Q>::zeros(3), vec![(0, 1), (0, 2), (1, 2)], 1);
        let (res, route) = solve_p3(&inst, &DecomposeBudget::default()).unwrap();
        assert_eq!(route, P3Route::Trivial);
        assert!(res.is_feasible());
    }

    #[test]
    fn fixed_cycle_needs_rank_three() {
        // Gram vectors with v0 ⟂ v2, v1 ⟂ v3 and unit products around the
        // 4-cycle do not fit in the plane
        let a = q(&[vec![0, 1, 0, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 0, 1, 0]]);
        let x = vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)];
        let inst = Instance::p3(a, x, 2);
        let (res, _) = solve_p3(&inst, &DecomposeBudget::default()).unwrap();
        assert!(matches!(res, SolveResult::Infeasible { .. }), "{:?}", res);
        let (res, route) = solve_p3(&inst.with_rank(3), &DecomposeBudget::default()).unwrap();
        assert!(res.is_feasible());
        assert_eq!(route, P3Route::Fallback);
        let a2 = q(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        let neg = SymMatrix::from_fn(3, |i, j| if i == j { Q::int(0) } else { -a2.get(i, j).clone() });
        let inst2 = Instance::p3(neg, vec![(0, 1), (0, 2), (1, 2)], 1);
        let (res2, _) = solve_p3(&inst2, &DecomposeBudget::default()).unwrap();
        assert!(matches!(res2, SolveResult::Infeasible { .. }), "{:?}", res2);
    }
}
