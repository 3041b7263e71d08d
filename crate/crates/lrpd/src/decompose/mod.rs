//! Drivers for P1, P2 and P3 and the universal verifier.
//!
//! Each driver walks target ranks upward from 1 and, per rank, enumerates
//! index sets `J` in lexicographic order. Sets are processed in parallel
//! chunks; the reported witness always belongs to the smallest feasible `J`
//! so the answer does not depend on the thread count. A verdict of
//! `Infeasible` needs every `J` at every rank to end with a complete
//! certificate; anything else downgrades to `Unknown`.

mod p1;
mod p2;
mod p3;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charsys::CharError;
use crate::polysolve::{PolyError, SolveBudget};
use crate::scalar::Scalar;
use crate::symcore::{equilibrate, lambda_min, numeric_rank, psd_check, psd_factor, scaled_rank, SymError, SymMatrix};

pub use p1::solve_p1;
pub use p2::{solve_p2, solve_p2_min, MinRank};
pub use p3::{solve_p3, solve_p3_compiled, P3Route};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    P1,
    P2,
    P3,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A problem instance. `x` lists the pairs `(i, j)`, `i < j`, on which the
/// P3 fill must vanish. `eps > 0` allows a perturbation `H` with
/// `‖H‖_F ≤ eps`; with `sparsity_constrained`, `H` must vanish where `A` does.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    pub kind: Kind,
    pub a: SymMatrix<T>,
    pub x: Vec<(usize, usize)>,
    pub r: usize,
    pub eps: f64,
    pub sparsity_constrained: bool,
}

impl<T: Scalar> Instance<T> {
    pub fn new(kind: Kind, a: SymMatrix<T>, r: usize) -> Self {
        Instance { kind, a, x: Vec::new(), r, eps: 0.0, sparsity_constrained: false }
    }

    pub fn p3(a: SymMatrix<T>, x: Vec<(usize, usize)>, r: usize) -> Self {
        let mut x: Vec<(usize, usize)> = x.into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect();
        x.sort_unstable();
        x.dedup();
        Instance { kind: Kind::P3, a, x, r, eps: 0.0, sparsity_constrained: false }
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn with_rank(&self, r: usize) -> Self {
        Instance { r, ..self.clone() }
    }

    /// Off-diagonal pairs not in `X` (P3's free pattern), lexicographic.
    pub fn free_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.x.binary_search(&(i, j)).is_err() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Check the structural invariants for the instance kind.
    pub fn validate(&self) -> Result<(), DecomposeError> {
        let n = self.n();
        if self.r < 1 || self.r > n {
            return Err(DecomposeError::Instance(format!("rank {} outside 1..={}", self.r, n)));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(DecomposeError::Instance("eps must be a finite nonnegative number".into()));
        }
        if matches!(self.kind, Kind::P2 | Kind::P3) && self.a.diag().iter().any(|v| !v.is_zero()) {
            return Err(DecomposeError::Instance("P2/P3 input must have zero diagonal".into()));
        }
        if self.kind == Kind::P3 {
            if self.x.iter().any(|&(i, j)| i >= j || j >= n) {
                return Err(DecomposeError::Instance("pattern pairs must be (i, j) with i < j < n".into()));
            }
            for (i, j) in self.free_pairs() {
                if !self.a.get(i, j).is_zero() {
                    return Err(DecomposeError::Instance(format!("A[{},{}] is nonzero outside the fixed pattern", i + 1, j + 1)));
                }
            }
        } else if !self.x.is_empty() {
            return Err(DecomposeError::Instance("a fixed pattern is only meaningful for P3".into()));
        }
        Ok(())
    }
}

/// A solution witness. For P3 `l` holds the full fill (its diagonal
/// included) and `d` its diagonal; `u` is a float Gram factor of the
/// completed matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<T> {
    pub d: Vec<T>,
    pub l: Option<SymMatrix<T>>,
    pub h: Option<SymMatrix<T>>,
    pub u: Option<Vec<Vec<f64>>>,
    pub achieved_rank: usize,
    pub residual: f64,
}

impl<T: Scalar> Decomposition<T> {
    pub fn from_d(d: Vec<T>) -> Self {
        Decomposition { d, l: None, h: None, u: None, achieved_rank: 0, residual: 0.0 }
    }

    pub fn from_fill(l: SymMatrix<T>) -> Self {
        Decomposition { d: l.diag(), l: Some(l), h: None, u: None, achieved_rank: 0, residual: 0.0 }
    }

    /// The matrix that must be PSD of low rank.
    pub fn completed(&self, inst: &Instance<T>) -> Result<SymMatrix<T>, DecomposeError> {
        let n = inst.n();
        let mut m = match inst.kind {
            Kind::P1 | Kind::P2 => {
                if self.d.len() != n {
                    return Err(DecomposeError::Instance(format!("d has length {}, expected {}", self.d.len(), n)));
                }
                let d: Vec<T> = if inst.kind == Kind::P1 { self.d.iter().map(|v| -v.clone()).collect() } else { self.d.clone() };
                inst.a.add_diag(&d)
            }
            Kind::P3 => {
                let l = self.l.as_ref().ok_or_else(|| DecomposeError::Instance("P3 decomposition needs the fill L".into()))?;
                if l.n() != n {
                    return Err(DecomposeError::Instance("fill has the wrong size".into()));
                }
                inst.a.add(l)
            }
        };
        if let Some(h) = &self.h {
            if h.n() != n {
                return Err(DecomposeError::Instance("perturbation has the wrong size".into()));
            }
            m = m.add(h);
        }
        Ok(m)
    }

    /// Fill in `achieved_rank`, `residual` and the Gram factor.
    pub fn finalize(mut self, inst: &Instance<T>, tol: f64) -> Result<Self, DecomposeError> {
        let m = self.completed(inst)?;
        self.achieved_rank = psd_and_rank(&m, tol)?.2;
        self.residual = self.h.as_ref().map_or(0.0, |h| h.frobenius());
        let ptol = if T::EXACT { 0.0 } else { tol * m.max_abs().max(1.0) };
        if let Some(f) = psd_factor(&m, ptol)? {
            let g = f.to_gram_factor();
            self.u = Some((0..g.nrows()).map(|i| g.row(i).to_vec()).collect());
        }
        Ok(self)
    }

    /// Verify and record rank and residual, skipping the Gram factor.
    pub fn certify(mut self, inst: &Instance<T>, tol: f64) -> (Self, VerifyReport) {
        let rep = verify(inst, &self, tol);
        self.achieved_rank = rep.rank;
        self.residual = self.h.as_ref().map_or(0.0, |h| h.frobenius());
        (self, rep)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub rank: usize,
    pub checks: Vec<Check>,
}

/// Check a decomposition against an instance: sign of `d` (P1), pattern of
/// `L` (P3), budget and sparsity of `H`, PSD and rank of the completed
/// matrix. Exact mode ignores `tol`; float mode treats it as relative.
pub fn verify<T: Scalar>(inst: &Instance<T>, dec: &Decomposition<T>, tol: f64) -> VerifyReport {
    let mut checks = Vec::new();
    let mut add = |name: &str, pass: bool, detail: String| checks.push(Check { name: name.into(), pass, detail });
    let n = inst.n();
    let m = match dec.completed(inst) {
        Ok(m) => m,
        Err(e) => {
            add("dimensions", false, e.to_string());
            return VerifyReport { pass: false, rank: 0, checks };
        }
    };
    add("dimensions", true, format!("n = {}", n));
    let scale = m.max_abs().max(1.0);
    let ztol = if T::EXACT { 0.0 } else { tol * scale };
    if inst.kind == Kind::P1 {
        let bad: Vec<usize> = (0..n).filter(|&i| dec.d[i].sign_tol(ztol) < 0).collect();
        add("d nonnegative", bad.is_empty(), if bad.is_empty() { "ok".into() } else { format!("negative at {:?}", bad.iter().map(|i| i + 1).collect::<Vec<_>>()) });
    }
    if inst.kind == Kind::P3 {
        let l = dec.l.as_ref().unwrap();
        let bad: Vec<(usize, usize)> = inst.x.iter().copied().filter(|&(i, j)| l.get(i, j).sign_tol(ztol) != 0).collect();
        add("L fits X", bad.is_empty(), if bad.is_empty() { format!("{} fixed pairs", inst.x.len()) } else { format!("nonzero at {:?}", bad) });
    }
    match &dec.h {
        Some(h) => {
            let f = h.frobenius();
            add("perturbation budget", f <= inst.eps * (1.0 + 1e-12), format!("|H|_F = {:e}, budget {:e}", f, inst.eps));
            if inst.sparsity_constrained {
                let mut bad = 0;
                for i in 0..n {
                    for j in 0..=i {
                        if inst.a.get(i, j).is_zero() && !h.get(i, j).is_zero() {
                            bad += 1;
                        }
                    }
                }
                add("perturbation sparsity", bad == 0, format!("{} entries break the pattern of A", bad));
            }
        }
        None => {}
    }
    let (psd, detail, rank) = match psd_and_rank(&m, tol) {
        Ok(x) => x,
        Err(e) => {
            add("psd", false, e.to_string());
            return VerifyReport { pass: false, rank: 0, checks };
        }
    };
    add("psd", psd, detail);
    add("rank", rank <= inst.r, format!("rank {} vs target {}", rank, inst.r));
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport { pass, rank, checks }
}

/// Length of the leading block that is diagonal with positive entries.
fn diagonal_prefix<T: Scalar>(m: &SymMatrix<T>) -> usize {
    let n = m.n();
    let mut k = 0;
    while k < n && m.get(k, k).sign_tol(0.0) > 0 && (0..k).all(|j| m.get(k, j).is_zero()) {
        k += 1;
    }
    k
}

/// `M₂₂ − M₂₁ D⁻¹ M₁₂` for a diagonal leading block `D` of size `k`,
/// touching only the nonzeros of `M₂₁`.
fn eliminate_prefix<T: Scalar>(m: &SymMatrix<T>, k: usize) -> SymMatrix<T> {
    let n = m.n();
    let rest: Vec<usize> = (k..n).collect();
    let mut s = m.principal(&rest);
    for u in 0..k {
        let nz: Vec<(usize, T)> = (k..n).filter(|&i| !m.get(i, u).is_zero()).map(|i| (i - k, m.get(i, u).clone())).collect();
        let inv = T::one() / m.get(u, u).clone();
        for (a, (i, x)) in nz.iter().enumerate() {
            let xi = x.clone() * inv.clone();
            for (j, y) in &nz[..=a] {
                let v = s.get(*i, *j).clone() - xi.clone() * y.clone();
                s.set(*i, *j, v);
            }
        }
    }
    s
}

/// PSD verdict, a short description and the rank. Exact mode first removes
/// a leading positive diagonal block by Schur complement (inertia and rank
/// add up), which keeps gadget witnesses with thousands of rows cheap.
/// Float mode works on the Jacobi-equilibrated matrix.
pub(crate) fn psd_and_rank<T: Scalar>(m: &SymMatrix<T>, tol: f64) -> Result<(bool, String, usize), SymError> {
    let n = m.n();
    if T::EXACT {
        let k = diagonal_prefix(m);
        let (s, note) = if k >= 8 && k < n { (eliminate_prefix(m, k), format!(" after eliminating a diagonal block of {}", k)) } else { (m.clone(), String::new()) };
        let k = if note.is_empty() { 0 } else { k };
        let v = psd_check(&s, 0.0)?;
        let rank = k + numeric_rank(&s, 0.0)?.rank;
        let detail = if v.psd { format!("exact LDL{}", note) } else { format!("exact LDL{}: witness {:?}", note, v.witness) };
        return Ok((v.psd, detail, rank));
    }
    let e = equilibrate(&m.to_f64());
    let thr = -tol * e.max_abs().max(1.0);
    let (psd, detail) = if n <= 1200 {
        let lm = lambda_min(&e);
        (lm >= thr, format!("equilibrated lambda_min = {:e}, threshold {:e}", lm, thr))
    } else {
        let v = psd_check(&e, tol)?;
        (v.psd, format!("equilibrated LDL with pivot tolerance {:e}", tol))
    };
    Ok((psd, detail, scaled_rank(m, tol)?.rank))
}

/// Knobs for the drivers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecomposeBudget {
    pub solver: SolveBudget,
    /// Threads for the `J` enumeration.
    pub threads: usize,
    /// Float tolerance (relative); ignored in exact mode.
    pub tol: f64,
    /// Index sets per parallel chunk.
    pub chunk: usize,
    /// Most index sets tried per rank before giving up with `Unknown`.
    pub max_subsets: usize,
    /// Largest `|X^c|` accepted by the compiled P3 route.
    pub p3_compiled_cap: usize,
}

impl Default for DecomposeBudget {
    fn default() -> Self {
        DecomposeBudget { solver: SolveBudget::default(), threads: 1, tol: 1e-7, chunk: 32, max_subsets: 200_000, p3_compiled_cap: 6 }
    }
}

impl DecomposeBudget {
    pub fn with_threads(mut self, t: usize) -> Self {
        self.threads = t;
        self.solver.threads = t;
        self
    }

    pub fn with_seed(mut self, s: u64) -> Self {
        self.solver.seed = s;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveResult<T> {
    Feasible(Decomposition<T>),
    Infeasible { subsets_checked: usize },
    Unknown(Vec<String>),
}

impl<T> SolveResult<T> {
    pub fn label(&self) -> &'static str {
        match self {
            SolveResult::Feasible(_) => "feasible",
            SolveResult::Infeasible { .. } => "infeasible",
            SolveResult::Unknown(_) => "unknown",
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveResult::Feasible(_))
    }
}

/// Dispatch on the instance kind.
pub fn solve<T: Scalar>(inst: &Instance<T>, budget: &DecomposeBudget) -> Result<SolveResult<T>, DecomposeError> {
    match inst.kind {
        Kind::P1 => solve_p1(inst, budget),
        Kind::P2 => solve_p2(inst, budget),
        Kind::P3 => solve_p3(inst, budget).map(|(r, _)| r),
    }
}

/// `C(n, r)` in lexicographic order.
pub(crate) fn subsets(n: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if r <= n { Some((0..r).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut c = out.clone();
        let mut i = r;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - r + i {
                c[i] += 1;
                for k in i + 1..r {
                    c[k] = c[k - 1] + 1;
                }
                cur = Some(c);
                break;
            }
        }
        Some(out)
    })
}

/// Per-`J` verdict inside a rank.
#[derive(Clone, Debug)]
pub(crate) enum JVerdict<T> {
    Feasible(Decomposition<T>),
    Infeasible,
    Unknown(String),
}

/// Run `f` over all `r`-subsets in parallel chunks and reduce: the first
/// feasible set in lexicographic order wins; otherwise infeasible when every
/// set is, unknown when any is.
pub(crate) fn enumerate<T: Scalar>(
    n: usize,
    r: usize,
    budget: &DecomposeBudget,
    f: impl Fn(&[usize]) -> JVerdict<T> + Sync,
) -> (JVerdict<T>, usize, Vec<String>) {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(budget.threads.max(1)).build().expect("thread pool");
    let mut all = subsets(n, r);
    let mut checked = 0;
    let mut notes = Vec::new();
    loop {
        let chunk: Vec<Vec<usize>> = all.by_ref().take(budget.chunk.max(1)).collect();
        if chunk.is_empty() {
            break;
        }
        if checked + chunk.len() > budget.max_subsets {
            notes.push(format!("stopped after {} index sets of size {}", checked, r));
            return (JVerdict::Unknown("subset budget exhausted".into()), checked, notes);
        }
        let res: Vec<JVerdict<T>> = pool.install(|| chunk.par_iter().map(|j| f(j)).collect());
        checked += chunk.len();
        for (j, v) in chunk.iter().zip(res) {
            match v {
                JVerdict::Feasible(d) => return (JVerdict::Feasible(d), checked, notes),
                JVerdict::Infeasible => {}
                JVerdict::Unknown(m) => notes.push(format!("J = {:?}: {}", j.iter().map(|x| x + 1).collect::<Vec<_>>(), m)),
            }
        }
    }
    if notes.is_empty() {
        (JVerdict::Infeasible, checked, notes)
    } else {
        (JVerdict::Unknown(format!("{} index sets incomplete", notes.len())), checked, notes)
    }
}

/// Gershgorin-style bound: `A + c·I` is strictly diagonally dominant for `c` above it.
pub(crate) fn gershgorin<T: Scalar>(a: &SymMatrix<T>) -> T {
    let n = a.n();
    let mut best = T::zero();
    for i in 0..n {
        let mut s = -a.get(i, i).clone();
        for j in 0..n {
            if j != i {
                s += a.get(i, j).abs();
            }
        }
        if s > best {
            best = s;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::scalar::Q;

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Q::int(x)).collect()
    }

    #[test]
    fn subsets_are_lexicographic() {
        let all: Vec<Vec<usize>> = subsets(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(3, 3).count(), 1);
        assert_eq!(subsets(3, 0).count(), 1);
        assert_eq!(subsets(2, 3).count(), 0);
    }

    #[test]
    fn verify_example_witness() {
        let inst = Instance::new(Kind::P2, example1(), 3);
        let dec = Decomposition::from_d(qs(&[2, 2, 3, 2, 2]));
        let r = verify(&inst, &dec, 0.0);
        assert!(r.pass, "{:?}", r);
        assert_eq!(r.rank, 3);
        let r2 = verify(&inst.with_rank(2), &dec, 0.0);
        assert!(!r2.pass);
        assert!(r2.checks.iter().any(|c| c.name == "rank" && !c.pass));
    }

    #[test]
    fn verify_p1_all_ones() {
        let a = SymMatrix::from_i64_rows(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        let inst = Instance::new(Kind::P1, a, 1);
        assert!(verify(&inst, &Decomposition::from_d(qs(&[0, 0, 0])), 0.0).pass);
        assert!(!verify(&inst, &Decomposition::from_d(qs(&[-1, 0, 0])), 0.0).pass);
    }

    #[test]
    fn verify_p3_pattern_and_budget() {
        let a = SymMatrix::from_i64_rows(&[vec![0, 0, 1], vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        let inst = Instance::p3(a, vec![(0, 2), (1, 2)], 1);
        inst.validate().unwrap();
        let l = SymMatrix::from_i64_rows(&[vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, 1]]).unwrap();
        assert!(verify(&inst, &Decomposition::from_fill(l.clone()), 0.0).pass);
        let mut bad = l.clone();
        bad.set(0, 2, Q::int(1));
        assert!(!verify(&inst, &Decomposition::from_fill(bad), 0.0).pass);
        let mut pert = Instance::new(Kind::P2, example1(), 3);
        pert.eps = 0.5;
        pert.sparsity_constrained = true;
        let mut dec = Decomposition::from_d(qs(&[2, 2, 3, 2, 2]));
        let mut h = SymMatrix::zeros(5);
        h.set(1, 0, Q::new(1, 10));
        dec.h = Some(h.clone());
        let r = verify(&pert, &dec, 0.0);
        assert!(r.checks.iter().all(|c| c.name != "perturbation budget" || c.pass));
        h.set(4, 0, Q::new(1, 10));
        dec.h = Some(h);
        assert!(!verify(&pert, &dec, 0.0).checks.iter().find(|c| c.name == "perturbation sparsity").unwrap().pass);
    }

    #[test]
    fn gershgorin_dominates() {
        let a = example1();
        let g = gershgorin(&a) + Q::int(1);
        let m = a.add_diag(&vec![g; 5]);
        assert!(crate::symcore::is_positive_definite(&m, 0.0).unwrap());
    }
}
