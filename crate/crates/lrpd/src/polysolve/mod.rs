//! Polynomial systems and a bounded-degree real solver.
//!
//! [`solve_system`] first removes what it can exactly: affine equations by
//! row reduction, and "slack" variables `z` that occur only in one equation
//! of the form `c + q·z² = 0` with `c` a nonzero constant, which become the
//! strict side constraint `−c·q > 0`. With at most two unknowns left, the
//! exact backend in [`exact`] finds every real solution. Otherwise a
//! multi-start Gauss-Newton search runs and the outcome is labelled
//! incomplete when it finds nothing.

pub mod bivar;
pub mod exact;
pub mod inner2;
mod newton;
pub mod poly;
pub mod upoly;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, Q};
use crate::symcore::rref;

pub use exact::Val;
pub use inner2::{algorithm2, assemble_inner2, inner2_names, Alg2Result};
pub use poly::Poly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{vars} unknowns remain after elimination, above the cap of {cap}")]
    VariableCapExceeded { vars: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// A list of polynomial equations `p = 0` over shared named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem<T> {
    pub names: Vec<String>,
    pub equations: Vec<Poly<T>>,
    /// Variables whose sign carries no information (they only encode a
    /// positivity condition); solutions report them nonnegative.
    pub slacks: Vec<usize>,
}

fn default_names(names: &[String]) -> bool {
    names.iter().enumerate().all(|(i, s)| *s == format!("x{}", i + 1))
}

impl<T: Scalar> PolySystem<T> {
    pub fn new(names: Vec<String>, equations: Vec<Poly<T>>) -> Result<Self, PolyError> {
        if let Some(p) = equations.iter().find(|p| p.nvars() != names.len()) {
            return Err(PolyError::Dimension(format!("equation over {} variables, system has {}", p.nvars(), names.len())));
        }
        Ok(PolySystem { names, equations, slacks: Vec::new() })
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    /// Which equations have degree at most one.
    pub fn linear_mask(&self) -> Vec<bool> {
        self.equations.iter().map(|p| p.degree() <= 1).collect()
    }

    /// Largest absolute equation value at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.equations.iter().map(|p| p.eval_f64(x).abs()).fold(0.0, f64::max)
    }

    pub fn with_slacks(mut self, slacks: Vec<usize>) -> Self {
        assert!(slacks.iter().all(|&v| v < self.names.len()));
        self.slacks = slacks;
        self
    }

    pub fn push(&mut self, p: Poly<T>) {
        assert_eq!(p.nvars(), self.names.len());
        self.equations.push(p);
    }

    /// One equation per line. Blank lines and `#` comments are skipped. An
    /// optional leading `vars: a b c` line fixes the variable order and a
    /// `slack: z1 z2` line marks sign-free variables. Without `vars:`, names
    /// are taken in order of appearance, except that names all of the form `x<k>` are ordered by `k` and fill `x1..xmax`.
    pub fn parse_text(s: &str) -> Result<Self, PolyError> {
        let mut names: Vec<String> = Vec::new();
        let mut fixed = false;
        let mut lines = Vec::new();
        let mut slack_names: Vec<String> = Vec::new();
        for raw in s.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("vars:") {
                if fixed || !lines.is_empty() {
                    return Err(PolyError::Parse("`vars:` must come first and only once".into()));
                }
                names = rest.split_whitespace().map(str::to_string).collect();
                fixed = true;
                continue;
            }
            if let Some(rest) = line.strip_prefix("slack:") {
                slack_names.extend(rest.split_whitespace().map(str::to_string));
                continue;
            }
            lines.push(line.to_string());
        }
        if !fixed {
            for l in &lines {
                let _ = parse_equation_tree::<T>(l, &mut names, true)?;
            }
            let idx: Option<Vec<usize>> =
                names.iter().map(|s| s.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()).filter(|&k| k >= 1)).collect();
            if let Some(idx) = idx {
                let max = idx.iter().copied().max().unwrap_or(0);
                names = (1..=max).map(|k| format!("x{}", k)).collect();
            }
        }
        let mut eqs = Vec::new();
        for l in &lines {
            let build = parse_equation_tree::<T>(l, &mut names, false)?;
            eqs.push(build(names.len()));
        }
        let slacks = slack_names
            .iter()
            .map(|s| names.iter().position(|n| n == s).ok_or_else(|| PolyError::Parse(format!("unknown slack variable `{}`", s))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolySystem::new(names, eqs)?.with_slacks(slacks))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !default_names(&self.names) {
            out.push_str("vars: ");
            out.push_str(&self.names.join(" "));
            out.push('\n');
        }
        if !self.slacks.is_empty() {
            let s: Vec<&str> = self.slacks.iter().map(|&v| self.names[v].as_str()).collect();
            out.push_str("slack: ");
            out.push_str(&s.join(" "));
            out.push('\n');
        }
        for p in &self.equations {
            out.push_str(&p.format(&self.names));
            out.push_str(" = 0\n");
        }
        out
    }
}

use poly::parse_equation_tree;

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    vars: Vec<String>,
    equations: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    slack: Vec<String>,
}

impl<T: Scalar> Serialize for PolySystem<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SystemDoc {
            vars: self.names.clone(),
            equations: self.equations.iter().map(|p| p.format(&self.names)).collect(),
            slack: self.slacks.iter().map(|&v| self.names[v].clone()).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for PolySystem<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = SystemDoc::deserialize(d)?;
        let mut names = doc.vars.clone();
        let mut eqs = Vec::new();
        for e in &doc.equations {
            let b = parse_equation_tree::<T>(e, &mut names, false).map_err(serde::de::Error::custom)?;
            eqs.push(b(names.len()));
        }
        let slacks = doc
            .slack
            .iter()
            .map(|s| names.iter().position(|n| n == s).ok_or_else(|| serde::de::Error::custom(format!("unknown slack variable `{}`", s))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolySystem::new(names, eqs).map_err(serde::de::Error::custom)?.with_slacks(slacks))
    }
}

impl<T: Scalar> fmt::Display for PolySystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Limits and knobs for [`solve_system`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveBudget {
    /// Most unknowns allowed after exact elimination.
    pub var_cap: usize,
    pub max_iter: usize,
    pub random_starts: usize,
    pub seed: u64,
    pub threads: usize,
    /// Residual bound for accepted numeric solutions.
    pub tol: f64,
    /// Solutions kept after sorting.
    pub max_solutions: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { var_cap: 12, max_iter: 100, random_starts: 32, seed: 0, threads: 1, tol: 1e-8, max_solutions: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub values: Vec<f64>,
    /// Exact coordinates where known.
    pub exact: Vec<Option<Q>>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    /// Unknowns left after elimination.
    pub unknowns: usize,
    pub starts: usize,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "data")]
pub enum SolveOutcome {
    Solutions(Vec<Solution>),
    NoneFoundComplete,
    NoneFoundIncomplete(SearchReport),
}

impl SolveOutcome {
    pub fn solutions(&self) -> &[Solution] {
        match self {
            SolveOutcome::Solutions(s) => s,
            _ => &[],
        }
    }
}

/// How an eliminated variable is recovered from the rest.
#[derive(Clone, Debug)]
enum Rec<T> {
    Affine(usize, Poly<T>),
    /// `z = sqrt(−c/q)`, nonnegative root.
    Slack(usize, T, Poly<T>),
    /// `x = num/den`.
    Ratio(usize, Poly<T>, Poly<T>),
    Free(usize),
}

struct Reduced<T> {
    records: Vec<Rec<T>>,
    eqs: Vec<Poly<T>>,
    cons: Vec<Poly<T>>,
    nonzero: Vec<Poly<T>>,
    active: Vec<usize>,
    infeasible: bool,
    /// Some elimination lost solutions (a ratio with a denominator that may vanish).
    lossy: bool,
}

fn negligible<T: Scalar>(c: &T, scale: f64) -> bool {
    if T::EXACT {
        c.is_zero()
    } else {
        c.to_f64().abs() <= 1e-12 * scale.max(1.0)
    }
}

fn chop<T: Scalar>(p: Poly<T>) -> Poly<T> {
    if T::EXACT {
        return p;
    }
    let s = p.max_abs_coeff();
    let n = p.nvars();
    Poly::from_terms(n, p.terms().filter(|(_, c)| c.to_f64().abs() > 1e-14 * s).map(|(e, c)| (e.clone(), c.clone())))
}

/// Split `p` as `Σ_k p_k·x^k`, returning the `p_k` (none of which use `x`).
fn coeffs_in<T: Scalar>(p: &Poly<T>, x: usize) -> Vec<Poly<T>> {
    let d = p.degree_in(x) as usize;
    let n = p.nvars();
    let mut out = vec![Poly::zero(n); d + 1];
    for (e, c) in p.terms() {
        let mut f = e.clone();
        let k = f[x] as usize;
        f[x] = 0;
        out[k].add_term(f, c.clone());
    }
    out
}

fn eliminate<T: Scalar>(nvars: usize, equations: &[Poly<T>], slacks: &[usize]) -> Reduced<T> {
    let mut r = Reduced {
        records: Vec::new(),
        eqs: equations.iter().cloned().map(chop).collect(),
        cons: Vec::new(),
        nonzero: Vec::new(),
        active: (0..nvars).collect(),
        infeasible: false,
        lossy: false,
    };
    loop {
        r.eqs.retain(|p| !p.is_zero());
        if r.eqs.iter().any(|p| p.is_constant() && !negligible(&p.constant_term(), p.max_abs_coeff())) {
            r.infeasible = true;
            return r;
        }
        r.eqs.retain(|p| !p.is_constant());
        // affine equations
        let (lin, rest): (Vec<Poly<T>>, Vec<Poly<T>>) = r.eqs.drain(..).partition(|p| p.degree() <= 1);
        r.eqs = rest;
        if !lin.is_empty() {
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            for p in &lin {
                let (c, c0) = p.as_affine().expect("degree at most one");
                lhs.push(c);
                rhs.push(-c0);
            }
            let red = rref(&lhs, &rhs, nvars, 1e-10);
            if red.inconsistent {
                r.infeasible = true;
                return r;
            }
            for (k, &p) in red.pivots.iter().enumerate() {
                let mut coeffs: Vec<T> = red.rows[k].iter().map(|c| -c.clone()).collect();
                coeffs[p] = T::zero();
                let expr = chop(Poly::affine(nvars, &coeffs, red.rhs[k].clone()));
                let sub = |q: &Poly<T>| chop(q.substitute(p, &expr));
                r.eqs = r.eqs.iter().map(sub).collect();
                r.cons = r.cons.iter().map(sub).collect();
                r.nonzero = r.nonzero.iter().map(sub).collect();
                r.records.push(Rec::Affine(p, expr));
                r.active.retain(|&v| v != p);
            }
            continue;
        }
        if let Some((x, e)) = find_single(&r, Some(slacks), |cs| cs.len() == 3 && cs[1].is_zero() && cs[0].is_constant() && !cs[0].is_zero()) {
            let cs = coeffs_in(&r.eqs[e], x);
            let c = cs[0].constant_term();
            r.cons.push(cs[2].scale(&-c.clone()));
            r.records.push(Rec::Slack(x, c, cs[2].clone()));
            r.eqs.remove(e);
            r.active.retain(|&v| v != x);
            continue;
        }
        if let Some((x, e)) = find_single(&r, None, |cs| cs.len() == 2) {
            let cs = coeffs_in(&r.eqs[e], x);
            let q = cs[1].clone();
            let guarded = q.is_constant() || r.cons.iter().any(|c| *c == q || *c == q.neg());
            if !guarded {
                r.lossy = true;
            }
            r.nonzero.push(q.clone());
            r.records.push(Rec::Ratio(x, cs[0].neg(), q));
            r.eqs.remove(e);
            r.active.retain(|&v| v != x);
            continue;
        }
        break;
    }
    let used = |v: usize, r: &Reduced<T>| r.eqs.iter().chain(&r.cons).chain(&r.nonzero).any(|p| p.uses(v));
    let free: Vec<usize> = r.active.iter().copied().filter(|&v| !used(v, &r)).collect();
    for v in free {
        r.records.push(Rec::Free(v));
        r.active.retain(|&w| w != v);
    }
    r
}

/// An active variable used by exactly one equation and no side condition,
/// whose coefficient pattern in that equation passes `pat`.
/// With `only`, just those variables are considered.
fn find_single<T: Scalar>(r: &Reduced<T>, only: Option<&[usize]>, pat: impl Fn(&[Poly<T>]) -> bool) -> Option<(usize, usize)> {
    for &x in &r.active {
        if only.is_some_and(|o| !o.contains(&x)) {
            continue;
        }
        if r.cons.iter().chain(&r.nonzero).any(|p| p.uses(x)) {
            continue;
        }
        let hits: Vec<usize> = (0..r.eqs.len()).filter(|&e| r.eqs[e].uses(x)).collect();
        if hits.len() == 1 && pat(&coeffs_in(&r.eqs[hits[0]], x)) {
            return Some((x, hits[0]));
        }
    }
    None
}

fn sqrt_exact(q: &Q) -> Option<Q> {
    if q.signum() < 0 {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &sn * &sn == n && &sd * &sd == d {
        Some(Q::from_big(num_rational::BigRational::new(sn, sd)))
    } else {
        None
    }
}

fn eval_mixed<T: Scalar>(p: &Poly<T>, xq: &[Option<Q>], xf: &[f64]) -> (Option<Q>, f64) {
    if T::EXACT && p.vars_used().iter().all(|&v| xq[v].is_some()) {
        let pt: Vec<Q> = xq.iter().map(|v| v.clone().unwrap_or_default()).collect();
        let val = p.map_coeffs(|c| c.to_q().expect("exact coefficient")).eval(&pt);
        let f = val.to_f64();
        (Some(val), f)
    } else {
        (None, p.eval_f64(xf))
    }
}

/// Fill in eliminated variables; `None` when a recorded denominator vanishes
/// or a slack square would be negative.
fn reconstruct<T: Scalar>(red: &Reduced<T>, nvars: usize, point: &[Val]) -> Option<(Vec<Option<Q>>, Vec<f64>)> {
    let mut xq: Vec<Option<Q>> = vec![None; nvars];
    let mut xf = vec![0.0; nvars];
    for (k, &v) in red.active.iter().enumerate() {
        xq[v] = point[k].exact();
        xf[v] = point[k].to_f64();
    }
    for rec in red.records.iter().rev() {
        match rec {
            Rec::Free(v) => {
                xq[*v] = Some(Q::int(0));
                xf[*v] = 0.0;
            }
            Rec::Affine(v, e) => {
                let (q, f) = eval_mixed(e, &xq, &xf);
                xq[*v] = q;
                xf[*v] = f;
            }
            Rec::Ratio(v, num, den) => {
                let (nq, nf) = eval_mixed(num, &xq, &xf);
                let (dq, df) = eval_mixed(den, &xq, &xf);
                match (nq, dq) {
                    (Some(n), Some(d)) => {
                        if d.is_zero() {
                            return None;
                        }
                        let q = n / d;
                        xf[*v] = q.to_f64();
                        xq[*v] = Some(q);
                    }
                    _ => {
                        if df == 0.0 {
                            return None;
                        }
                        xq[*v] = None;
                        xf[*v] = nf / df;
                    }
                }
            }
            Rec::Slack(v, c, q) => {
                let (qq, qf) = eval_mixed(q, &xq, &xf);
                let cq = c.to_q();
                match (qq, cq) {
                    (Some(qv), Some(cv)) if T::EXACT => {
                        if qv.is_zero() {
                            return None;
                        }
                        let s = -cv / qv;
                        if s.signum() <= 0 {
                            return None;
                        }
                        xf[*v] = s.to_f64().sqrt();
                        xq[*v] = sqrt_exact(&s);
                    }
                    _ => {
                        let s = -c.to_f64() / qf;
                        if !(s > 0.0) {
                            return None;
                        }
                        xf[*v] = s.sqrt();
                        xq[*v] = None;
                    }
                }
            }
        }
    }
    Some((xq, xf))
}

fn sort_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e6).round() as i64).collect()
}

fn finish<T: Scalar>(sys: &PolySystem<T>, red: &Reduced<T>, points: Vec<Vec<Val>>, budget: &SolveBudget, exact: bool) -> Vec<Solution> {
    let n = sys.var_count();
    let mut sols = Vec::new();
    for p in points {
        let Some((xq, xf)) = reconstruct(red, n, &p) else { continue };
        let residual = if exact && xq.iter().all(|q| q.is_some()) {
            let pt: Vec<Q> = xq.iter().map(|q| q.clone().unwrap()).collect();
            let zero = sys.equations.iter().all(|e| e.map_coeffs(|c| c.to_q().expect("exact coefficient")).eval(&pt).is_zero());
            if !zero {
                continue;
            }
            0.0
        } else {
            sys.residual(&xf)
        };
        if !(residual <= budget.tol) && !exact {
            continue;
        }
        sols.push(Solution { values: xf, exact: xq, residual });
    }
    let mut kept: Vec<Solution> = Vec::new();
    for s in sols {
        let dup = kept.iter().any(|k| k.values.iter().zip(&s.values).all(|(a, b)| (a - b).abs() <= 1e-6));
        if !dup {
            kept.push(s);
        }
    }
    kept.sort_by(|a, b| sort_key(&a.values).cmp(&sort_key(&b.values)));
    kept.truncate(budget.max_solutions);
    kept
}

/// Solve `sys` for real points. In exact mode with at most two unknowns left
/// after elimination the search is complete.
pub fn solve_system<T: Scalar>(sys: &PolySystem<T>, budget: &SolveBudget) -> Result<SolveOutcome, PolyError> {
    let n = sys.var_count();
    let red = eliminate(n, &sys.equations, &sys.slacks);
    if red.infeasible {
        return Ok(if T::EXACT {
            SolveOutcome::NoneFoundComplete
        } else {
            SolveOutcome::NoneFoundIncomplete(SearchReport { unknowns: 0, starts: 0, note: "linear part inconsistent to tolerance".into() })
        });
    }
    let k = red.active.len();
    if k > budget.var_cap {
        return Err(PolyError::VariableCapExceeded { vars: k, cap: budget.var_cap });
    }
    let mut map = vec![None; n];
    for (i, &v) in red.active.iter().enumerate() {
        map[v] = Some(i);
    }
    let local = |ps: &[Poly<T>]| -> Vec<Poly<T>> { ps.iter().map(|p| p.remap(k, &map)).collect() };
    let (eqs, cons, nonzero) = (local(&red.eqs), local(&red.cons), local(&red.nonzero));

    if T::EXACT && k <= 2 {
        let to_q = |ps: &[Poly<T>]| -> Vec<Poly<Q>> { ps.iter().map(|p| p.map_coeffs(|c| c.to_q().expect("exact coefficient"))).collect() };
        let (eq, cq, nq) = (to_q(&eqs), to_q(&cons), to_q(&nonzero));
        let res = match k {
            0 => {
                let ok = eq.is_empty() && cq.iter().all(|c| c.constant_term().signum() > 0) && nq.iter().all(|c| !c.constant_term().is_zero());
                exact::ExactResult { points: if ok { vec![vec![]] } else { vec![] }, complete: true, notes: vec![] }
            }
            1 => exact::solve1(&eq, &cq),
            _ => exact::solve2(&eq, &cq),
        };
        let before = res.points.len();
        let pts: Vec<Vec<Val>> = res
            .points
            .into_iter()
            .filter(|p| {
                let ex: Option<Vec<Q>> = p.iter().map(Val::exact).collect();
                nq.iter().all(|q| match &ex {
                    Some(x) => !q.eval(x).is_zero(),
                    None => q.eval_f64(&p.iter().map(Val::to_f64).collect::<Vec<_>>()) != 0.0,
                })
            })
            .collect();
        let complete = res.complete && !red.lossy && pts.len() == before;
        let sols = finish(sys, &red, pts, budget, true);
        if !sols.is_empty() {
            return Ok(SolveOutcome::Solutions(sols));
        }
        return Ok(if complete {
            SolveOutcome::NoneFoundComplete
        } else {
            let mut note = res.notes.join("; ");
            if red.lossy {
                note = format!("{}{}a ratio elimination may have dropped solutions", note, if note.is_empty() { "" } else { "; " });
            }
            SolveOutcome::NoneFoundIncomplete(SearchReport { unknowns: k, starts: 0, note })
        });
    }

    let ef: Vec<Poly<f64>> = eqs.iter().map(|p| p.to_f64()).collect();
    let cf: Vec<Poly<f64>> = cons.iter().map(|p| p.to_f64()).collect();
    let nf: Vec<Poly<f64>> = nonzero.iter().map(|p| p.to_f64()).collect();
    let run = newton::search(&ef, &cf, &nf, k, budget);
    let pts = run.points.into_iter().map(|p| p.into_iter().map(Val::Approx).collect()).collect();
    let sols = finish(sys, &red, pts, budget, false);
    if sols.is_empty() {
        Ok(SolveOutcome::NoneFoundIncomplete(SearchReport {
            unknowns: k,
            starts: run.starts,
            note: format!("no start converged to an admissible point ({} converged)", run.converged),
        }))
    } else {
        Ok(SolveOutcome::Solutions(sols))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(s: &str) -> PolySystem<Q> {
        PolySystem::parse_text(s).unwrap()
    }

    #[test]
    fn square_has_two_roots() {
        let out = solve_system(&sys("x1^2 = 4"), &SolveBudget::default()).unwrap();
        let v: Vec<f64> = out.solutions().iter().map(|s| s.values[0]).collect();
        assert_eq!(v, vec![-2.0, 2.0]);
        assert!(out.solutions().iter().all(|s| s.exact[0].is_some()));
    }

    #[test]
    fn chain_is_unique() {
        let out = solve_system(&sys("x1 = 2\nx2 = x1^2\nx3 = x2^2"), &SolveBudget::default()).unwrap();
        assert_eq!(out.solutions().len(), 1);
        assert_eq!(out.solutions()[0].exact, vec![Some(Q::int(2)), Some(Q::int(4)), Some(Q::int(16))]);
    }

    #[test]
    fn slack_encodes_positivity() {
        // x > 0 via x*z^2 = 1
        let out = solve_system(&sys("slack: x2\nx1^2 = 4\nx1*x2^2 = 1"), &SolveBudget::default()).unwrap();
        assert_eq!(out.solutions().len(), 1);
        let s = &out.solutions()[0];
        assert_eq!(s.exact[0], Some(Q::int(2)));
        assert!((s.values[1] - 0.5f64.sqrt()).abs() < 1e-15);
        let none = solve_system(&sys("slack: x2\nx1^2 = 4\nx1*x2^2 = -1\nx1 = 2"), &SolveBudget::default()).unwrap();
        assert_eq!(none, SolveOutcome::NoneFoundComplete);
    }

    #[test]
    fn inconsistent_linear_part() {
        assert_eq!(solve_system(&sys("x1 + x2 = 1\n2*x1 + 2*x2 = 3"), &SolveBudget::default()).unwrap(), SolveOutcome::NoneFoundComplete);
    }

    #[test]
    fn float_mode_uses_newton() {
        let s: PolySystem<f64> = PolySystem::parse_text("x1^2 + x2^2 + x3^2 = 3\nx1 = x2\nx2*x3 = 1").unwrap();
        let out = solve_system(&s, &SolveBudget::default()).unwrap();
        assert!(!out.solutions().is_empty());
        for sol in out.solutions() {
            assert!(sol.residual <= 1e-8);
        }
    }

    #[test]
    fn newton_for_three_unknowns() {
        let s = sys("x1^2 + x2^2 + x3^2 = 3\nx1*x2 = 1\nx2*x3 = 1");
        let out = solve_system(&s, &SolveBudget::default()).unwrap();
        // x2^2 in {1, 2}, x1 = x3 = 1/x2
        assert_eq!(out.solutions().len(), 4);
        assert!(out.solutions().iter().any(|s| s.values.iter().all(|v| (v - 1.0).abs() < 1e-9)));
    }

    #[test]
    fn cap_applies_after_elimination() {
        let b = SolveBudget { var_cap: 1, ..Default::default() };
        assert!(solve_system(&sys("x1 = 1\nx2 = 2\nx3 = x1 + x2"), &b).is_ok());
        assert!(matches!(solve_system(&sys("x1*x2 = 1\nx2*x3 = 1\nx1*x3 = 1"), &b), Err(PolyError::VariableCapExceeded { .. })));
    }

    #[test]
    fn text_and_json_round_trip() {
        let s = sys("x1 = 2\nx2 - x1^2 = 0\n# comment\nx3 = x2^2");
        assert_eq!(s.var_count(), 3);
        assert_eq!(s.linear_mask(), vec![true, false, false]);
        assert_eq!(sys(&s.to_text()), s);
        let j = serde_json::to_string(&s).unwrap();
        let back: PolySystem<Q> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let named = sys("vars: b a\nslack: a\na*b^2 = 1");
        assert_eq!(named.names, vec!["b", "a"]);
        assert_eq!(sys(&named.to_text()), named);
    }
}
