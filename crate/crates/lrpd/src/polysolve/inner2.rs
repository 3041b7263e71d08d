//! The nonlinear phase for one index set `J`: the polynomial system in
//! `svec(V)` with adjugate equations and the `z` encoding of `V ≻ 0`, its
//! solution, and exact recovery of a certified `V`.

use std::collections::HashMap;

use crate::charsys::{finish_from_v, Alg1Outcome, CharKind};
use crate::scalar::{Scalar, Q};
use crate::symcore::{inverse, svec_bilinear, svec_index, SymMatrix};

fn tri(r: usize) -> usize {
    r * (r + 1) / 2
}

use super::{solve_system, Poly, PolyError, PolySystem, SolveBudget, SolveOutcome, Solution};

/// Determinant of the submatrix on `rows` × `cols` by cofactor expansion,
/// memoized on the set of remaining columns.
pub(crate) fn minor<T: Scalar>(m: &[Vec<Poly<T>>], rows: &[usize], cols: &[usize], nvars: usize) -> Poly<T> {
    fn go<T: Scalar>(m: &[Vec<Poly<T>>], rows: &[usize], cols: &[usize], k: usize, mask: u64, nvars: usize, memo: &mut HashMap<u64, Poly<T>>) -> Poly<T> {
        if k == rows.len() {
            return Poly::constant(nvars, T::one());
        }
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let mut acc = Poly::zero(nvars);
        let mut sign = true;
        for (c, &col) in cols.iter().enumerate() {
            if mask & (1 << c) != 0 {
                continue;
            }
            let e = &m[rows[k]][col];
            if !e.is_zero() {
                let sub = go(m, rows, cols, k + 1, mask | (1 << c), nvars, memo);
                let t = e.mul(&sub);
                acc = if sign { acc.add(&t) } else { acc.sub(&t) };
            }
            sign = !sign;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    assert_eq!(rows.len(), cols.len());
    assert!(cols.len() < 64);
    go(m, rows, cols, 0, 0, nvars, &mut HashMap::new())
}

pub(crate) fn sym_det<T: Scalar>(m: &[Vec<Poly<T>>], nvars: usize) -> Poly<T> {
    let idx: Vec<usize> = (0..m.len()).collect();
    minor(m, &idx, &idx, nvars)
}

/// Adjugate entry `(i, j)`: the signed minor with row `j` and column `i` removed.
pub(crate) fn sym_adj<T: Scalar>(m: &[Vec<Poly<T>>], i: usize, j: usize, nvars: usize) -> Poly<T> {
    let n = m.len();
    let rows: Vec<usize> = (0..n).filter(|&x| x != j).collect();
    let cols: Vec<usize> = (0..n).filter(|&x| x != i).collect();
    let p = minor(m, &rows, &cols, nvars);
    if (i + j) % 2 == 0 {
        p
    } else {
        p.neg()
    }
}

/// Variable names: `svec(V)` entries `v11, v21, v22, …` (local to `J`),
/// then `z1..zr`, then `d1..dr` for P1.
pub fn inner2_names(r: usize, kind: CharKind) -> Vec<String> {
    let sep = if r >= 10 { "_" } else { "" };
    let mut names = Vec::new();
    for a in 0..r {
        for b in 0..=a {
            names.push(format!("v{}{}{}", a + 1, sep, b + 1));
        }
    }
    names.extend((1..=r).map(|k| format!("z{}", k)));
    if kind == CharKind::P1 {
        names.extend((1..=r).map(|k| format!("d{}", k)));
    }
    names
}

fn column<T: Scalar>(a: &SymMatrix<T>, j: &[usize], i: usize) -> Vec<T> {
    j.iter().map(|&x| a.get(x, i).clone()).collect()
}

fn symbolic_v<T: Scalar>(r: usize, nvars: usize) -> Vec<Vec<Poly<T>>> {
    (0..r).map(|a| (0..r).map(|b| Poly::var(nvars, svec_index(a, b))).collect()).collect()
}

/// Assemble the system: the linear rows, `A_ij det V − adj(V)_ij = 0` for
/// `i < j` in `J` (and the diagonal with `A_jj − d_j` for P1), and
/// `det(V_k) z_k² = 1` for the leading principal blocks.
pub fn assemble_inner2<T: Scalar>(a: &SymMatrix<T>, j: &[usize], lhs: &[Vec<T>], rhs: &[T], kind: CharKind) -> Result<PolySystem<T>, PolyError> {
    let r = j.len();
    let nsv = tri(r);
    if lhs.len() != rhs.len() || lhs.iter().any(|row| row.len() != nsv) {
        return Err(PolyError::Dimension(format!("linear part must have {} columns and matching right-hand side", nsv)));
    }
    if r == 0 || j.iter().any(|&x| x >= a.n()) {
        return Err(PolyError::Dimension("index set out of range".into()));
    }
    let names = inner2_names(r, kind);
    let nv = names.len();
    let mut eqs = Vec::new();
    for (row, b) in lhs.iter().zip(rhs) {
        let mut c: Vec<T> = row.clone();
        c.resize(nv, T::zero());
        eqs.push(Poly::affine(nv, &c, -b.clone()));
    }
    let v = symbolic_v::<T>(r, nv);
    let det = sym_det(&v, nv);
    for x in 0..r {
        for y in x + 1..r {
            let e = det.scale(a.get(j[x], j[y])).sub(&sym_adj(&v, x, y, nv));
            eqs.push(e);
        }
    }
    if kind == CharKind::P1 {
        for x in 0..r {
            let w = Poly::constant(nv, a.get(j[x], j[x]).clone()).sub(&Poly::var(nv, nsv + r + x));
            eqs.push(w.mul(&det).sub(&sym_adj(&v, x, x, nv)));
        }
    }
    for k in 1..=r {
        let lead: Vec<Vec<Poly<T>>> = v[..k].iter().map(|row| row[..k].to_vec()).collect();
        let z = Poly::var(nv, nsv + k - 1);
        eqs.push(sym_det(&lead, nv).mul(&z.mul(&z)).sub(&Poly::constant(nv, T::one())));
    }
    Ok(PolySystem::new(names, eqs)?.with_slacks((nsv..nsv + r).collect()))
}

/// The facet equation `d_i = 0` in the system's variables.
pub fn facet_equation<T: Scalar>(a: &SymMatrix<T>, j: &[usize], i: usize, nvars: usize) -> Poly<T> {
    let r = j.len();
    match j.iter().position(|&x| x == i) {
        Some(p) => Poly::var(nvars, tri(r) + r + p),
        None => {
            let col = column(a, j, i);
            let mut c = svec_bilinear(&col, &col);
            c.resize(nvars, T::zero());
            Poly::affine(nvars, &c, T::zero()).sub(&Poly::constant(nvars, a.get(i, i).clone())).neg()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Alg2Result<T> {
    pub outcome: Alg1Outcome<T>,
    /// Solutions of the system, in the order they were tried.
    pub solutions: Vec<Solution>,
    /// The solver's answer is exhaustive.
    pub complete: bool,
}

/// `V` from the leading `svec` coordinates of a solution.
pub fn v_from_solution(r: usize, sol: &Solution) -> SymMatrix<f64> {
    SymMatrix::from_lower(r, sol.values[..tri(r)].to_vec()).expect("svec length")
}

fn exact_v<T: Scalar>(r: usize, sol: &Solution) -> Option<SymMatrix<T>> {
    let sv: Option<Vec<T>> = sol.exact[..tri(r)].iter().map(|q| q.as_ref().map(T::from_q)).collect();
    SymMatrix::from_lower(r, sv?).ok()
}

/// Exact `V = W⁻¹` near a float solution, where `W` agrees with `A` off the
/// diagonal on `J`. Tries rational approximations of `diag(W)` first; with a
/// single remaining equation, pins all diagonal entries but one and solves
/// for the last, since every equation is affine in each entry.
fn polish(a: &SymMatrix<Q>, j: &[usize], facets: &[usize], sol: &Solution) -> Option<SymMatrix<Q>> {
    let r = j.len();
    let vf = v_from_solution(r, sol);
    let wf = inverse(&vf, 1e-12).ok()?;
    let in_j: Vec<usize> = facets.iter().filter_map(|f| j.iter().position(|x| x == f)).collect();
    let jbar: Vec<usize> = (0..a.n()).filter(|x| !j.contains(x)).collect();
    let w: Vec<Vec<Poly<Q>>> = (0..r)
        .map(|x| {
            (0..r)
                .map(|y| {
                    if x != y {
                        Poly::constant(r, a.get(j[x], j[y]).clone())
                    } else if in_j.contains(&x) {
                        Poly::constant(r, a.get(j[x], j[x]).clone())
                    } else {
                        Poly::var(r, x)
                    }
                })
                .collect()
        })
        .collect();
    let det = sym_det(&w, r);
    let mut adj = vec![vec![Poly::zero(r); r]; r];
    for x in 0..r {
        for y in 0..r {
            adj[x][y] = sym_adj(&w, x, y, r);
        }
    }
    let qform = |ci: &[Q], cl: &[Q]| {
        let mut p = Poly::zero(r);
        for x in 0..r {
            for y in 0..r {
                let c = ci[x].clone() * cl[y].clone();
                if !c.is_zero() {
                    p = p.add(&adj[x][y].scale(&c));
                }
            }
        }
        p
    };
    let mut eqs = Vec::new();
    for (p, &i) in jbar.iter().enumerate() {
        let ci = column(a, j, i);
        for &l in &jbar[p + 1..] {
            eqs.push(qform(&ci, &column(a, j, l)).sub(&det.scale(a.get(i, l))));
        }
        if facets.contains(&i) {
            eqs.push(det.scale(a.get(i, i)).sub(&qform(&ci, &ci)));
        }
    }
    eqs.retain(|e| !e.is_zero());
    let free: Vec<usize> = (0..r).filter(|x| !in_j.contains(x)).collect();
    let target: Vec<f64> = (0..r).map(|x| *wf.get(x, x)).collect();
    let build = |t: &[Q]| -> Option<SymMatrix<Q>> {
        if !eqs.iter().all(|e| e.eval(t).is_zero()) {
            return None;
        }
        let wm = SymMatrix::from_fn(r, |x, y| if x == y { t[x].clone() } else { a.get(j[x], j[y]).clone() });
        inverse(&wm, 0.0).ok()
    };
    let base = |x: usize| -> Q {
        if in_j.contains(&x) {
            a.get(j[x], j[x]).clone()
        } else {
            Q::int(0)
        }
    };
    // rational approximations, coarse to fine
    let conv: Vec<Vec<Q>> = free.iter().map(|&x| Q::convergents(target[x], 1_000_000)).collect();
    if conv.iter().all(|c| !c.is_empty()) {
        let depth = conv.iter().map(Vec::len).max().unwrap_or(0);
        for lvl in 0..depth {
            let mut t: Vec<Q> = (0..r).map(base).collect();
            for (k, &x) in free.iter().enumerate() {
                t[x] = conv[k][lvl.min(conv[k].len() - 1)].clone();
            }
            if let Some(v) = build(&t) {
                return Some(v);
            }
        }
    }
    if eqs.len() == 1 && !free.is_empty() {
        for &u in free.iter().rev() {
            let mut e = eqs[0].clone();
            let mut t: Vec<Q> = (0..r).map(base).collect();
            for &x in &free {
                if x == u {
                    continue;
                }
                let w = 1e-6 * (1.0 + target[x].abs());
                let lo = Q::from_f64_exact(target[x] - w)?;
                let hi = Q::from_f64_exact(target[x] + w)?;
                t[x] = Q::simplest_between(&lo, &hi);
                e = e.fix(x, &t[x]);
            }
            if e.degree_in(u) != 1 || e.degree() != 1 {
                continue;
            }
            let (c, c0) = e.as_affine()?;
            t[u] = -c0 / c[u].clone();
            if let Some(v) = build(&t) {
                return Some(v);
            }
        }
    }
    None
}

/// Solve the nonlinear system for `J` and turn the first certified solution
/// into `d`. `facets` lists indices whose `d_i` is pinned to zero.
#[allow(clippy::too_many_arguments)]
pub fn algorithm2<T: Scalar>(
    a: &SymMatrix<T>,
    j: &[usize],
    lhs: &[Vec<T>],
    rhs: &[T],
    kind: CharKind,
    facets: &[usize],
    budget: &SolveBudget,
    tol: f64,
) -> Result<Alg2Result<T>, PolyError> {
    let mut sys = assemble_inner2(a, j, lhs, rhs, kind)?;
    let nv = sys.var_count();
    for &f in facets {
        sys.push(facet_equation(a, j, f, nv));
    }
    let out = solve_system(&sys, budget)?;
    let r = j.len();
    let sols = match out {
        SolveOutcome::NoneFoundComplete => {
            return Ok(Alg2Result {
                outcome: Alg1Outcome::InfeasibleForJ("the nonlinear system has no real solution".into()),
                solutions: vec![],
                complete: true,
            })
        }
        SolveOutcome::NoneFoundIncomplete(rep) => {
            return Ok(Alg2Result {
                outcome: Alg1Outcome::RejectedForJ(format!(
                    "search incomplete: {} unknowns, {} starts, {}",
                    rep.unknowns, rep.starts, rep.note
                )),
                solutions: vec![],
                complete: false,
            })
        }
        SolveOutcome::Solutions(s) => s,
    };
    let mut last = String::from("no solution certified");
    let aq: Option<SymMatrix<Q>> = if T::EXACT { Some(a.map(|x| x.to_q().expect("exact entry"))) } else { None };
    for sol in &sols {
        let cand: Option<SymMatrix<T>> = if T::EXACT {
            exact_v::<T>(r, sol)
                .or_else(|| polish(aq.as_ref().unwrap(), j, facets, sol).map(|v| v.map(T::from_q)))
        } else {
            Some(v_from_solution(r, sol).map(|x| T::from_f64(*x)))
        };
        let Some(v) = cand else {
            last = "a float solution was found but no exact point was recovered near it (uncertified)".into();
            continue;
        };
        match finish_from_v(a, j, v, kind, if T::EXACT { 0.0 } else { tol }) {
            o @ Alg1Outcome::Solved { .. } => return Ok(Alg2Result { outcome: o, solutions: sols, complete: true }),
            Alg1Outcome::InfeasibleForJ(m) | Alg1Outcome::RejectedForJ(m) => last = m,
            Alg1Outcome::Underdetermined { .. } => {}
        }
    }
    Ok(Alg2Result { outcome: Alg1Outcome::RejectedForJ(format!("uncertified: {}", last)), solutions: sols, complete: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsys::assemble_linear_system;
    use crate::fixtures::{example1, example1_six};

    fn q(a: &[Vec<i64>]) -> SymMatrix<Q> {
        SymMatrix::from_i64_rows(a).unwrap()
    }

    #[test]
    fn rank_one_system() {
        let a = q(&[vec![0, 1], vec![1, 0]]);
        let s = assemble_inner2(&a, &[0], &[], &[], CharKind::P2).unwrap();
        assert_eq!(s.names, vec!["v11", "z1"]);
        assert_eq!(s.to_text(), "vars: v11 z1\nslack: z1\nv11*z1^2 - 1 = 0\n");
    }

    #[test]
    fn adjugate_equations_match_numeric() {
        let v = symbolic_v::<Q>(3, 6);
        let pt: Vec<Q> = [4, 1, 3, 2, 1, 5].iter().map(|&x| Q::int(x)).collect();
        let num = SymMatrix::from_lower(3, pt.clone()).unwrap();
        let adj = crate::symcore::adjugate(&num);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(sym_adj(&v, x, y, 6).eval(&pt), *adj.get(x, y));
            }
        }
        assert_eq!(sym_det(&v, 6).eval(&pt), crate::symcore::det(&num));
    }

    #[test]
    fn example_five_certifies() {
        let a = example1();
        let sys = assemble_linear_system(&a, &[0, 1, 2], CharKind::P2).unwrap();
        let r = algorithm2(&a, &[0, 1, 2], &sys.linear_lhs, &sys.linear_rhs, CharKind::P2, &[], &SolveBudget::default(), 1e-9).unwrap();
        match r.outcome {
            Alg1Outcome::Solved { d, .. } => {
                let m = a.add_diag(&d);
                assert!(crate::symcore::psd_check(&m, 0.0).unwrap().psd);
                assert_eq!(crate::symcore::numeric_rank(&m, 0.0).unwrap().rank, 3);
            }
            o => panic!("{:?}", o),
        }
    }

    #[test]
    fn example_six_two_points() {
        let a = example1_six();
        let sys = assemble_linear_system(&a, &[0, 1, 2], CharKind::P2).unwrap();
        let s = assemble_inner2(&a, &[0, 1, 2], &sys.linear_lhs, &sys.linear_rhs, CharKind::P2).unwrap();
        let out = solve_system(&s, &SolveBudget::default()).unwrap();
        let mut alphas: Vec<f64> = out
            .solutions()
            .iter()
            .map(|sol| *inverse(&v_from_solution(3, sol), 1e-12).unwrap().get(0, 0))
            .collect();
        alphas.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(alphas.len(), 2, "{:?}", alphas);
        assert!((alphas[0] - 2.0).abs() < 1e-6 && (alphas[1] - 4.0).abs() < 1e-6);
    }
}
