//! Symmetric pivoted elimination shared by PSD checks, exact rank and Schur
//! complements. Storage is either a dense lower triangle or sparse rows; the
//! sparse store uses a minimum-degree pivot order so that gadget matrices with
//! thousands of degree-2 rows reduce to a small dense core.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

use super::matrix::SymMatrix;

pub(crate) trait Store<T: Scalar> {
    fn n(&self) -> usize;
    fn diag(&self, i: usize) -> T;
    fn get(&self, i: usize, j: usize) -> T;
    /// Nonzero off-diagonal entries of row `i` among active columns, sorted by column.
    fn row(&self, i: usize, active: &[bool]) -> Vec<(usize, T)>;
    fn degree(&self, i: usize) -> usize;
    fn add(&mut self, i: usize, j: usize, v: T);
    fn clear_row(&mut self, i: usize);
}

pub(crate) struct DenseStore<T> {
    n: usize,
    a: Vec<T>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl<T: Scalar> DenseStore<T> {
    pub fn new(m: &SymMatrix<T>) -> Self {
        DenseStore { n: m.n(), a: m.lower().to_vec() }
    }
}

impl<T: Scalar> Store<T> for DenseStore<T> {
    fn n(&self) -> usize {
        self.n
    }
    fn diag(&self, i: usize) -> T {
        self.a[tri(i, i)].clone()
    }
    fn get(&self, i: usize, j: usize) -> T {
        self.a[tri(i, j)].clone()
    }
    fn row(&self, i: usize, active: &[bool]) -> Vec<(usize, T)> {
        (0..self.n)
            .filter(|&j| j != i && active[j])
            .filter_map(|j| {
                let v = &self.a[tri(i, j)];
                (!v.is_zero()).then(|| (j, v.clone()))
            })
            .collect()
    }
    fn degree(&self, _i: usize) -> usize {
        self.n
    }
    fn add(&mut self, i: usize, j: usize, v: T) {
        self.a[tri(i, j)] += v;
    }
    fn clear_row(&mut self, _i: usize) {}
}

pub(crate) struct SparseStore<T> {
    d: Vec<T>,
    off: Vec<BTreeMap<usize, T>>,
}

impl<T: Scalar> SparseStore<T> {
    pub fn new(m: &SymMatrix<T>) -> Self {
        let n = m.n();
        let mut off = vec![BTreeMap::new(); n];
        for i in 0..n {
            for j in 0..i {
                let v = m.get(i, j);
                if !v.is_zero() {
                    off[i].insert(j, v.clone());
                    off[j].insert(i, v.clone());
                }
            }
        }
        SparseStore { d: m.diag(), off }
    }
}

impl<T: Scalar> Store<T> for SparseStore<T> {
    fn n(&self) -> usize {
        self.d.len()
    }
    fn diag(&self, i: usize) -> T {
        self.d[i].clone()
    }
    fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.d[i].clone();
        }
        self.off[i].get(&j).cloned().unwrap_or_else(T::zero)
    }
    fn row(&self, i: usize, active: &[bool]) -> Vec<(usize, T)> {
        self.off[i].iter().filter(|(j, v)| active[**j] && !v.is_zero()).map(|(j, v)| (*j, v.clone())).collect()
    }
    fn degree(&self, i: usize) -> usize {
        self.off[i].len()
    }
    fn add(&mut self, i: usize, j: usize, v: T) {
        if i == j {
            self.d[i] += v;
            return;
        }
        let e = self.off[i].entry(j).or_insert_with(T::zero);
        *e += v.clone();
        let zero = e.is_zero();
        if zero {
            self.off[i].remove(&j);
            self.off[j].remove(&i);
        } else {
            let f = self.off[j].entry(i).or_insert_with(T::zero);
            *f += v;
        }
    }
    fn clear_row(&mut self, i: usize) {
        let cols: Vec<usize> = self.off[i].keys().copied().collect();
        for j in cols {
            self.off[j].remove(&i);
        }
        self.off[i].clear();
    }
}

/// One elimination step, kept so that null directions can be lifted back.
#[derive(Clone, Debug)]
pub(crate) enum Pivot<T> {
    One { p: usize, d: T, mult: Vec<(usize, T)> },
    Two { i: usize, j: usize, mult: Vec<(usize, T, T)> },
}

#[derive(Clone, Debug)]
pub(crate) enum Failure {
    NegativeDiag(usize),
    IndefinitePair(usize, usize),
}

pub(crate) struct Elimination<T> {
    pub pivots: Vec<Pivot<T>>,
    pub active: Vec<bool>,
    pub failure: Option<Failure>,
    pub rank: usize,
    pub min_accepted: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Mode {
    /// Positive 1x1 pivots only; stop at the first certificate of indefiniteness.
    Psd,
    /// Any nonzero pivot, with 2x2 blocks when the remaining diagonal vanishes.
    General,
}

fn nonzero<T: Scalar>(v: &T, tol: f64) -> bool {
    if T::EXACT {
        !v.is_zero()
    } else {
        v.to_f64().abs() > tol
    }
}

fn eliminate_one<T: Scalar, S: Store<T>>(s: &mut S, p: usize, active: &mut [bool]) -> Pivot<T> {
    active[p] = false;
    let d = s.diag(p);
    let col = s.row(p, active);
    let mult: Vec<(usize, T)> = col.iter().map(|(q, v)| (*q, v.clone() / d.clone())).collect();
    for a in 0..col.len() {
        for k in 0..=a {
            // M_qk -= M_qp M_kp / d
            let upd = mult[a].1.clone() * col[k].1.clone();
            s.add(col[a].0, col[k].0, -upd);
        }
    }
    s.clear_row(p);
    Pivot::One { p, d, mult }
}

fn eliminate_two<T: Scalar, S: Store<T>>(s: &mut S, i: usize, j: usize, active: &mut [bool]) -> Pivot<T> {
    active[i] = false;
    active[j] = false;
    let (a, b, c) = (s.diag(i), s.get(i, j), s.diag(j));
    let det = a.clone() * c.clone() - b.clone() * b.clone();
    let mut rows: BTreeMap<usize, (T, T)> = BTreeMap::new();
    for (q, v) in s.row(i, active) {
        rows.entry(q).or_insert((T::zero(), T::zero())).0 = v;
    }
    for (q, v) in s.row(j, active) {
        rows.entry(q).or_insert((T::zero(), T::zero())).1 = v;
    }
    let entries: Vec<(usize, T, T)> = rows.into_iter().map(|(q, (x, y))| (q, x, y)).collect();
    // w = [x y] P^{-1}, P^{-1} = [[c, -b], [-b, a]] / det
    let mult: Vec<(usize, T, T)> = entries
        .iter()
        .map(|(q, x, y)| {
            let wi = (x.clone() * c.clone() - y.clone() * b.clone()) / det.clone();
            let wj = (y.clone() * a.clone() - x.clone() * b.clone()) / det.clone();
            (*q, wi, wj)
        })
        .collect();
    for (u, (q, _, _)) in entries.iter().enumerate() {
        for k in 0..=u {
            let (kk, xk, yk) = &entries[k];
            let upd = mult[u].1.clone() * xk.clone() + mult[u].2.clone() * yk.clone();
            s.add(*q, *kk, -upd);
        }
    }
    s.clear_row(i);
    s.clear_row(j);
    Pivot::Two { i, j, mult }
}

/// Run the elimination. `allowed` restricts which indices may become pivots.
pub(crate) fn eliminate<T: Scalar, S: Store<T>>(
    s: &mut S,
    mode: Mode,
    tol: f64,
    allowed: Option<&[bool]>,
    sparse_order: bool,
) -> Elimination<T> {
    let n = s.n();
    let mut active = vec![true; n];
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    let mut min_acc: Option<f64> = None;
    let may = |i: usize| allowed.map_or(true, |a| a[i]);
    loop {
        let cand: Vec<usize> = (0..n).filter(|&i| active[i] && may(i)).collect();
        if cand.is_empty() {
            break;
        }
        if let Mode::Psd = mode {
            let neg = cand.iter().copied().filter(|&i| s.diag(i).sign_tol(tol) < 0).min_by(|&a, &b| {
                s.diag(a).partial_cmp(&s.diag(b)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
            });
            if let Some(i) = neg {
                return Elimination {
                    pivots,
                    active,
                    failure: Some(Failure::NegativeDiag(i)),
                    rank,
                    min_accepted: min_acc,
                };
            }
        }
        let ok: Vec<usize> = cand
            .iter()
            .copied()
            .filter(|&i| match mode {
                Mode::Psd => s.diag(i).sign_tol(tol) > 0,
                Mode::General => nonzero(&s.diag(i), tol),
            })
            .collect();
        if ok.is_empty() {
            if let Mode::General = mode {
                // all remaining diagonals vanish: look for a 2x2 pivot
                let mut pair = None;
                'outer: for &i in &cand {
                    for (j, v) in s.row(i, &active) {
                        if may(j) && nonzero(&v, tol) {
                            pair = Some((i.min(j), i.max(j)));
                            break 'outer;
                        }
                    }
                }
                if let Some((i, j)) = pair {
                    let b = s.get(i, j).to_f64().abs();
                    min_acc = Some(min_acc.map_or(b, |m: f64| m.min(b)));
                    pivots.push(eliminate_two(s, i, j, &mut active));
                    rank += 2;
                    continue;
                }
            }
            break;
        }
        let p = if sparse_order {
            let maxd = ok.iter().map(|&i| s.diag(i).to_f64().abs()).fold(0.0, f64::max);
            ok.iter()
                .copied()
                .filter(|&i| T::EXACT || s.diag(i).to_f64().abs() >= 1e-3 * maxd)
                .min_by(|&a, &b| {
                    s.degree(a).cmp(&s.degree(b)).then_with(|| {
                        if T::EXACT {
                            a.cmp(&b)
                        } else {
                            s.diag(b).to_f64().abs().partial_cmp(&s.diag(a).to_f64().abs()).unwrap().then(a.cmp(&b))
                        }
                    })
                })
                .unwrap()
        } else if T::EXACT {
            ok[0]
        } else {
            *ok.iter()
                .max_by(|&&a, &&b| {
                    s.diag(a).to_f64().abs().partial_cmp(&s.diag(b).to_f64().abs()).unwrap().then(b.cmp(&a))
                })
                .unwrap()
        };
        let dv = s.diag(p).to_f64().abs();
        min_acc = Some(min_acc.map_or(dv, |m: f64| m.min(dv)));
        pivots.push(eliminate_one(s, p, &mut active));
        rank += 1;
    }
    // residual inspection
    let rest: Vec<usize> = (0..n).filter(|&i| active[i] && may(i)).collect();
    let mut failure = None;
    for &i in &rest {
        let di = s.diag(i);
        for (j, v) in s.row(i, &active) {
            if !may(j) || j < i {
                continue;
            }
            let vf = v.to_f64().abs();
            if let Mode::Psd = mode {
                let indefinite = if T::EXACT {
                    !v.is_zero()
                } else {
                    let dj = s.diag(j).to_f64().max(0.0);
                    vf * vf > (di.to_f64().max(0.0) + tol) * (dj + tol)
                };
                if indefinite && failure.is_none() {
                    failure = Some(Failure::IndefinitePair(i, j));
                }
            }
        }
    }
    Elimination { pivots, active, failure, rank, min_accepted: min_acc }
}

/// Lift a vector given on the remaining active indices back through the
/// recorded 1x1 pivots, so that `xᵀ M x` equals the reduced quadratic form.
pub(crate) fn lift<T: Scalar>(pivots: &[Pivot<T>], n: usize, seed: &[(usize, T)]) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    for (i, v) in seed {
        x[*i] = v.clone();
    }
    for piv in pivots.iter().rev() {
        match piv {
            Pivot::One { p, mult, .. } => {
                let mut s = T::zero();
                for (q, l) in mult {
                    if !x[*q].is_zero() {
                        s += l.clone() * x[*q].clone();
                    }
                }
                x[*p] = -s;
            }
            Pivot::Two { i, j, mult } => {
                let mut si = T::zero();
                let mut sj = T::zero();
                for (q, wi, wj) in mult {
                    if !x[*q].is_zero() {
                        si += wi.clone() * x[*q].clone();
                        sj += wj.clone() * x[*q].clone();
                    }
                }
                x[*i] = -si;
                x[*j] = -sj;
            }
        }
    }
    x
}

/// Choose storage by density and run.
pub(crate) fn run<T: Scalar>(
    m: &SymMatrix<T>,
    mode: Mode,
    tol: f64,
    allowed: Option<&[bool]>,
) -> (Elimination<T>, Box<dyn Store<T>>) {
    let n = m.n();
    let dense = n <= 64 || m.nnz() as f64 > 0.1 * (n * n) as f64;
    if dense {
        let mut s = DenseStore::new(m);
        let e = eliminate(&mut s, mode, tol, allowed, false);
        (e, Box::new(s))
    } else {
        let mut s = SparseStore::new(m);
        let e = eliminate(&mut s, mode, tol, allowed, true);
        (e, Box::new(s))
    }
}
