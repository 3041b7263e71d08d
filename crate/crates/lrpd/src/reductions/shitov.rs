use std::collections::HashMap;

use crate::decompose::{Decomposition, Instance};
use crate::polysolve::{Poly, PolySystem};
use crate::scalar::{Scalar, Q};
use crate::symcore::{Mat, SymMatrix};

use super::ReductionError;

/// Symmetric matrix with some entries unspecified (`None`). Lower triangle,
/// row-major, like [`SymMatrix`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartialMatrix {
    n: usize,
    lower: Vec<Option<Q>>,
}

fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl PartialMatrix {
    pub fn unspecified(n: usize) -> Self {
        PartialMatrix { n, lower: vec![None; n * (n + 1) / 2] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Option<Q>) -> Self {
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        PartialMatrix { n, lower }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Q> {
        self.lower[tri(i, j)].as_ref()
    }

    pub fn set(&mut self, i: usize, j: usize, v: Option<Q>) {
        self.lower[tri(i, j)] = v;
    }

    /// Unspecified positions `(i, j)`, `i ≤ j`, row-major.
    pub fn unknowns(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                if self.get(i, j).is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn diagonal_unspecified(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i).is_none())
    }

    /// Does `m` agree with every specified entry?
    pub fn agrees<T: Scalar>(&self, m: &SymMatrix<T>, tol: f64) -> bool {
        m.n() == self.n
            && (0..self.n).all(|i| (0..=i).all(|j| self.get(i, j).map_or(true, |v| (m.get(i, j).clone() - T::from_q(v)).sign_tol(tol) == 0)))
    }

    pub fn principal(&self, idx: &[usize]) -> PartialMatrix {
        PartialMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]).cloned())
    }

    /// The P3 view: specified off-diagonal entries become `A` and the fixed
    /// pattern, everything else (the diagonal included) is free.
    pub fn to_p3(&self, r: usize) -> Result<Instance<Q>, ReductionError> {
        if !self.diagonal_unspecified() {
            return Err(ReductionError::Dimension("a P3 instance needs an unspecified diagonal".into()));
        }
        let a = SymMatrix::from_fn(self.n, |i, j| if i == j { Q::int(0) } else { self.get(i, j).cloned().unwrap_or_default() });
        let mut x = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j).is_some() {
                    x.push((i, j));
                }
            }
        }
        Ok(Instance::p3(a, x, r))
    }
}

/// `[[*, 1, 1], [1, *, 1], [1, 1, *]]`: its only rank-one PSD completion
/// puts 1 in every unspecified slot.
pub fn lemma_block() -> PartialMatrix {
    PartialMatrix::from_fn(3, |i, j| if i == j { None } else { Some(Q::int(1)) })
}

/// `x₁ = 2, x_t = x_{t−1}²`: unique real solution `x_t = 2^(2^(t−1))`.
pub fn chain_system(n: usize) -> PolySystem<Q> {
    assert!(n >= 1, "the chain needs at least one equation");
    let names: Vec<String> = (1..=n).map(|k| format!("x{}", k)).collect();
    let mut eqs = vec![Poly::var(n, 0).sub(&Poly::constant(n, Q::int(2)))];
    for t in 1..n {
        eqs.push(Poly::var(n, t).sub(&Poly::var(n, t - 1).pow(2)));
    }
    PolySystem::new(names, eqs).unwrap()
}

fn monomial(nv: usize, e: &[u32], c: Q) -> Poly<Q> {
    Poly::from_terms(nv, [(e.to_vec(), c)])
}

fn push_unique(out: &mut Vec<Poly<Q>>, p: Poly<Q>) {
    if !out.contains(&p) {
        out.push(p);
    }
}

/// The monomial sequence of a system, duplicates dropped in order of first
/// appearance. Per monomial `ξ x_{i1}⋯x_{ik}`: `±1, ±ξ`, the signed prefix
/// products and the monomial itself; per polynomial: 0, the signed partial
/// sums, the sum, and `±x_1 … ±x_n`.
pub fn shitov_sigma(f: &PolySystem<Q>) -> Vec<Poly<Q>> {
    let nv = f.var_count();
    let one = Q::int(1);
    let mut out = Vec::new();
    for p in &f.equations {
        let terms: Vec<(Vec<u32>, Q)> = p.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
        for (e, c) in &terms {
            push_unique(&mut out, Poly::constant(nv, one.clone()));
            push_unique(&mut out, Poly::constant(nv, -one.clone()));
            push_unique(&mut out, Poly::constant(nv, c.clone()));
            push_unique(&mut out, Poly::constant(nv, -c.clone()));
            let mut prefix = vec![0u32; nv];
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    prefix[i] += 1;
                    push_unique(&mut out, monomial(nv, &prefix, one.clone()));
                    push_unique(&mut out, monomial(nv, &prefix, -one.clone()));
                }
            }
            push_unique(&mut out, monomial(nv, e, c.clone()));
        }
        push_unique(&mut out, Poly::zero(nv));
        let mut partial = Poly::zero(nv);
        for (e, c) in &terms {
            partial = partial.add(&monomial(nv, e, c.clone()));
            push_unique(&mut out, partial.clone());
            push_unique(&mut out, partial.neg());
        }
        for i in 0..nv {
            push_unique(&mut out, Poly::var(nv, i));
            push_unique(&mut out, Poly::var(nv, i).neg());
        }
    }
    out
}

fn is_unit(p: &Poly<Q>) -> bool {
    p.is_constant() && p.constant_term().abs() == Q::int(1)
}

/// Triples over `sigma` (as index triples, lexicographic) with at least one
/// entry equal to ±1.
pub fn build_h(sigma: &[Poly<Q>]) -> Vec<[usize; 3]> {
    let unit: Vec<bool> = sigma.iter().map(is_unit).collect();
    let s = sigma.len();
    let mut out = Vec::new();
    for a in 0..s {
        for b in 0..s {
            for c in 0..s {
                if unit[a] || unit[b] || unit[c] {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Class {
    Equation,
    Constant(usize),
    Free,
}

/// Compiled rank-3 completion instance for a polynomial system.
#[derive(Clone, Debug)]
pub struct ShitovInstance {
    pub system: PolySystem<Q>,
    pub sigma: Vec<Poly<Q>>,
    /// Columns of `Ū` as index triples into `sigma`; the last six are the
    /// two extra copies of each unit vector.
    pub columns: Vec<[usize; 3]>,
    /// Number of columns coming from `H` (the rest are the extra copies).
    pub h_len: usize,
    pub bbar: PartialMatrix,
}

/// Build `σ`, `H̄ = H ∪ {e₁, e₁, e₂, e₂, e₃, e₃}` and the partial matrix
/// `B̄*`: entry `(u, v)` of `W̄ = ŪᵀŪ` is pinned to 0 when it equals one of
/// the equations, to its value when constant, and left free otherwise. The
/// diagonal is always free.
pub fn build_bbar(f: &PolySystem<Q>) -> Result<ShitovInstance, ReductionError> {
    if f.equations.is_empty() {
        return Err(ReductionError::Polynomial("empty system".into()));
    }
    let nv = f.var_count();
    let sigma = shitov_sigma(f);
    let mut columns = build_h(&sigma);
    let h_len = columns.len();
    let find = |p: &Poly<Q>| sigma.iter().position(|q| q == p).unwrap();
    let (i1, i0) = (find(&Poly::constant(nv, Q::int(1))), find(&Poly::zero(nv)));
    for k in 0..3 {
        let mut e = [i0; 3];
        e[k] = i1;
        columns.push(e);
        columns.push(e);
    }
    let s = sigma.len();
    // products sigma[a]·sigma[b]
    let prod: Vec<Poly<Q>> = (0..s * s).map(|k| sigma[k / s].mul(&sigma[k % s])).collect();
    let mut constants: Vec<Q> = Vec::new();
    let mut memo: HashMap<[u32; 3], Class> = HashMap::new();
    let mut classify = |key: [u32; 3]| -> Class {
        if let Some(c) = memo.get(&key) {
            return *c;
        }
        let w = prod[key[0] as usize].add(&prod[key[1] as usize]).add(&prod[key[2] as usize]);
        let c = if f.equations.contains(&w) {
            Class::Equation
        } else if w.is_constant() {
            let v = w.constant_term();
            let id = constants.iter().position(|x| *x == v).unwrap_or_else(|| {
                constants.push(v);
                constants.len() - 1
            });
            Class::Constant(id)
        } else {
            Class::Free
        };
        memo.insert(key, c);
        c
    };
    let nn = columns.len();
    let mut classes = Vec::with_capacity(nn * (nn + 1) / 2);
    for i in 0..nn {
        for j in 0..=i {
            if i == j {
                classes.push(Class::Free);
                continue;
            }
            let (x, y) = (columns[i], columns[j]);
            let mut key = [0u32; 3];
            for k in 0..3 {
                let (a, b) = (x[k].min(y[k]), x[k].max(y[k]));
                key[k] = (a * s + b) as u32;
            }
            key.sort_unstable();
            classes.push(classify(key));
        }
    }
    let lower = classes
        .into_iter()
        .map(|c| match c {
            Class::Equation => Some(Q::int(0)),
            Class::Constant(id) => Some(constants[id].clone()),
            Class::Free => None,
        })
        .collect();
    Ok(ShitovInstance { system: f.clone(), sigma, columns, h_len, bbar: PartialMatrix { n: nn, lower } })
}

impl ShitovInstance {
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// `Ū[ξ]`, 3 × |H̄|.
    pub fn ubar(&self, xi: &[Q]) -> Mat<Q> {
        let vals: Vec<Q> = self.sigma.iter().map(|p| p.eval(xi)).collect();
        Mat::from_fn(3, self.n(), |k, c| vals[self.columns[c][k]].clone())
    }

    /// `Ū[ξ]ᵀ Ū[ξ]`.
    pub fn completion(&self, xi: &[Q]) -> SymMatrix<Q> {
        let vals: Vec<Q> = self.sigma.iter().map(|p| p.eval(xi)).collect();
        let s = vals.len();
        let table: Vec<Q> = (0..s * s).map(|k| vals[k / s].clone() * vals[k % s].clone()).collect();
        SymMatrix::from_fn(self.n(), |i, j| {
            let (x, y) = (self.columns[i], self.columns[j]);
            let mut t = Q::int(0);
            for k in 0..3 {
                t += table[x[k] * s + y[k]].clone();
            }
            t
        })
    }

    /// The P3 instance (rank 3) with `A` the specified part of `B̄*`.
    pub fn instance(&self) -> Instance<Q> {
        self.bbar.to_p3(3).unwrap()
    }

    /// Fill `L = Ū[ξ]ᵀŪ[ξ] − A` for a solution `ξ` of the system.
    pub fn witness(&self, xi: &[Q]) -> Result<Decomposition<Q>, ReductionError> {
        if xi.len() != self.system.var_count() {
            return Err(ReductionError::Certificate(format!("{} values for {} variables", xi.len(), self.system.var_count())));
        }
        if let Some(k) = self.system.equations.iter().position(|p| !p.eval(xi).is_zero()) {
            return Err(ReductionError::Certificate(format!("equation {} does not vanish", k + 1)));
        }
        let w = self.completion(xi);
        let a = self.instance().a;
        Ok(Decomposition::from_fill(w.sub(&a)))
    }

    /// Indices of the three copies of each unit vector, grouped per vector.
    pub fn unit_copies(&self) -> [[usize; 3]; 3] {
        let mut out = [[0; 3]; 3];
        let base = self.h_len;
        for (k, row) in out.iter_mut().enumerate() {
            let ek = self.columns[base + 2 * k];
            let orig = self.columns[..base].iter().position(|c| *c == ek).unwrap();
            *row = [orig, base + 2 * k, base + 2 * k + 1];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(s: &str) -> PolySystem<Q> {
        PolySystem::parse_text(s).unwrap()
    }

    #[test]
    fn sigma_of_linear() {
        let f = sys("x1 - 2 = 0");
        let s = shitov_sigma(&f);
        assert_eq!(s.len(), 9);
        assert_eq!(build_h(&s).len(), 729 - 343);
    }

    #[test]
    fn chain_solution() {
        let c = chain_system(3);
        let xi = [2, 4, 16].map(Q::int);
        assert!(c.equations.iter().all(|p| p.eval(&xi).is_zero()));
        assert_eq!(chain_system(1).equations.len(), 1);
    }

    #[test]
    fn bbar_linear_witness() {
        let inst = build_bbar(&sys("x1 - 2 = 0")).unwrap();
        assert_eq!(inst.n(), 386 + 6);
        assert!(inst.bbar.diagonal_unspecified());
        let w = inst.completion(&[Q::int(2)]);
        assert!(inst.bbar.agrees(&w, 0.0));
        assert!(!inst.bbar.agrees(&inst.completion(&[Q::int(3)]), 0.0));
        for grp in inst.unit_copies() {
            assert_eq!(inst.bbar.principal(&grp), lemma_block());
        }
        assert!(inst.witness(&[Q::int(1)]).is_err());
    }
}
