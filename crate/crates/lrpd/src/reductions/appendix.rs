use serde::{Deserialize, Serialize};

use crate::decompose::{Decomposition, Instance, Kind};
use crate::scalar::{Scalar, Q};
use crate::symcore::{inverse, Mat, SymMatrix};

use super::graph::Graph;
use super::ReductionError;

/// Parameters of the perturbed P2 construction. `delta` is derived from
/// `eps`; `pi0` and `pi1` are the thresholds of the converse argument,
/// reported for reference only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixParams {
    pub eps: f64,
    pub phat: f64,
    pub s: f64,
    pub eps0: f64,
    pub mbar: usize,
    pub n: usize,
    pub delta: f64,
    pub eps_bound: f64,
    pub pi0: f64,
    pub pi1: f64,
}

impl AppendixParams {
    /// `δ = ε / (10·3⁴·√6·m̄²·√n)` and the admissible range
    /// `ε ≤ ε₀ / (600·m̄²·n·p̂)`.
    pub fn new(mbar: usize, n: usize, eps: f64, phat: f64, s: f64, eps0: f64) -> Self {
        let (m, nf) = (mbar as f64, n as f64);
        let delta = eps / (10.0 * 81.0 * 6f64.sqrt() * m * m * nf.sqrt());
        AppendixParams {
            eps,
            phat,
            s,
            eps0,
            mbar,
            n,
            delta,
            eps_bound: eps0 / (600.0 * m * m * nf * phat),
            pi0: eps0 / (27.0 * m * nf * s * s * delta),
            pi1: 2.0 * phat * eps / (s * s * delta * delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn ineq(name: &str, lhs: f64, rhs: f64) -> Inequality {
    Inequality { name: name.into(), lhs, rhs, holds: lhs <= rhs }
}

/// Post-hoc check of the "s large enough" conditions. `forward` lists the
/// ones the witness relies on and decides `pass`; `converse` lists the
/// ones used only by the non-colorable direction, which this crate does
/// not certify.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SValidatorReport {
    pub pass: bool,
    pub forward: Vec<Inequality>,
    pub converse: Vec<Inequality>,
}

impl SValidatorReport {
    pub fn violations(&self) -> Vec<&Inequality> {
        self.forward.iter().filter(|i| !i.holds).collect()
    }
}

/// `B = [[D, Kᵀ], [K, A]]` with `A` the 0/1/2 block matrix of the graph,
/// `K` carrying `s` at the two rows of its nonedge entry and `sδ` elsewhere,
/// and `D` zero on the diagonal and `−2p̂ε` off it. Rank target `9m̄ + 3`.
#[derive(Clone, Debug)]
pub struct AppendixInstance {
    pub graph: Graph,
    pub params: AppendixParams,
    /// Nonedge entry `(p, q)` behind each column of `K`.
    pub pairs: Vec<(usize, usize)>,
    pub instance: Instance<Q>,
    s: Q,
    delta: Q,
}

fn exact(v: f64, what: &str) -> Result<Q, ReductionError> {
    Q::from_f64_exact(v).ok_or_else(|| ReductionError::Dimension(format!("{} = {} is not finite", what, v)))
}

/// Build the perturbed P2 instance from `g` as given (no supergraph or
/// amplifier is applied here). Values are exact rationals equal to the
/// binary64 parameters.
pub fn appendix_p2tilde_instance(g: &Graph, eps: f64, phat: f64, s: f64, eps0: f64) -> Result<AppendixInstance, ReductionError> {
    let nonedges = g.nonedges();
    if nonedges.is_empty() {
        return Err(ReductionError::Graph("the construction needs at least one nonedge".into()));
    }
    if !(s > 0.0) || !(phat > 1.0) || !(eps0 > 0.0) {
        return Err(ReductionError::Dimension("need s > 0, p̂ > 1 and ε₀ > 0".into()));
    }
    let params = AppendixParams::new(nonedges.len(), g.n(), eps, phat, s, eps0);
    if !(eps > 0.0) || eps > params.eps_bound {
        return Err(ReductionError::EpsOutOfRange { eps, bound: params.eps_bound });
    }
    let mut pairs = Vec::new();
    for (v, w) in nonedges {
        for t in 0..3 {
            for t2 in 0..3 {
                pairs.push((3 * v + t, 3 * w + t2));
            }
        }
    }
    let (sq, dq) = (exact(s, "s")?, exact(params.delta, "delta")?);
    let off = -(Q::int(2) * exact(phat, "phat")? * exact(eps, "eps")?);
    let m = pairs.len();
    let n3 = 3 * g.n();
    let sd = sq.clone() * dq.clone();
    let b = SymMatrix::from_fn(m + n3, |i, j| {
        if i < m {
            if i == j {
                Q::int(0)
            } else {
                off.clone()
            }
        } else if j < m {
            let (p, q) = pairs[j];
            if i - m == p || i - m == q {
                sq.clone()
            } else {
                sd.clone()
            }
        } else {
            let (p, q) = (i - m, j - m);
            let (v, w) = (p / 3, q / 3);
            if p == q || (v != w && g.has_edge(v, w)) {
                Q::int(0)
            } else if v == w {
                Q::int(1)
            } else {
                Q::int(2)
            }
        }
    });
    let mut instance = Instance::new(Kind::P2, b, m + 3);
    instance.eps = eps;
    Ok(AppendixInstance { graph: g.clone(), params, pairs, instance, s: sq, delta: dq })
}

/// Forward witness with the measured Schur-complement gap and the validator.
#[derive(Clone, Debug)]
pub struct AppendixWitness {
    pub decomposition: Decomposition<Q>,
    /// `‖S′ − S″‖_F`.
    pub schur_gap: f64,
    pub report: SValidatorReport,
}

impl AppendixInstance {
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    fn k_block(&self, large_only: bool) -> Mat<Q> {
        let n3 = 3 * self.graph.n();
        let sd = self.s.clone() * self.delta.clone();
        Mat::from_fn(n3, self.m(), |t, u| {
            let (p, q) = self.pairs[u];
            if t == p || t == q {
                self.s.clone()
            } else if large_only {
                Q::int(0)
            } else {
                sd.clone()
            }
        })
    }

    /// Coloring-independent inequalities plus, when given, the measured gap.
    pub fn validate(&self, schur_gap: Option<f64>) -> SValidatorReport {
        let p = &self.params;
        let (m, n) = (p.mbar as f64, p.n as f64);
        let (s, d, e, ph) = (p.s, p.delta, p.eps, p.phat);
        let cols = 9.0 * m;
        let k_lg = (2.0 * cols).sqrt() * s;
        let k_sm = (cols * (3.0 * n - 2.0)).sqrt() * s * d;
        let d_norm = (cols * (cols - 1.0)).sqrt() * 2.0 * ph * e;
        // worst case over colorings: every entry of Diag(dᴱ) equal to s²/2
        let dinv = cols.sqrt() * 2.0 / (s * s);
        let mut forward = vec![
            ineq("eps within its admissible range", e, p.eps_bound),
            ineq("small part of K at most half the large part", k_sm, k_lg / 2.0),
            ineq("|D| |Diag(dE)^-1| at most 1/2", d_norm * dinv, 0.5),
            ineq("D-dependent term of the Schur gap at most eps/2", 8.0 * 19683.0 * m.powi(4) * ph * e / (s * s), e / 2.0),
        ];
        if let Some(g) = schur_gap {
            forward.push(ineq("measured Schur gap at most eps", g, e));
        }
        let h = ph * e;
        let sd = s * d;
        let bound = 6.0 * ph * ph * e * e / (s * s * d * d);
        let converse = vec![
            ineq("perturbed small entries keep 90% of s*delta", h, 0.1 * sd),
            ineq("squared small entries grow at most 2.2x", (sd + h).powi(2), 2.2 * sd * sd),
            ineq("large-small products grow at most 1.1x", (s + h) * (sd + h), 1.1 * s * sd),
            ineq("column sums of K + H2 stay above 1.9 s", 1.9 * s, (2.0 + (3.0 * n - 2.0) * d) * s - (3.0 * n).sqrt() * h),
            ineq("Pi-weighted D terms at most 1/(90 mbar)", bound, 1.0 / (90.0 * m)),
            ineq("Pi-weighted D terms at most delta^2/(90 mbar)", bound, d * d / (90.0 * m)),
        ];
        let pass = forward.iter().all(|i| i.holds);
        SValidatorReport { pass, forward, converse }
    }

    /// `dᴱ ∈ {s²/2, s²}` by color disagreement/agreement, `H₃ = S″ − S′` off
    /// the diagonal, `dⱽ = 1 − diag(S′)`; `H` is zero outside the `A` block.
    pub fn witness(&self, c: &[u8]) -> Result<AppendixWitness, ReductionError> {
        let g = &self.graph;
        if !g.is_proper(c) {
            return Err(ReductionError::Certificate("not a proper 3-coloring of the graph".into()));
        }
        let m = self.m();
        let n3 = 3 * g.n();
        let s2 = self.s.clone() * self.s.clone();
        let de: Vec<Q> = self.pairs.iter().map(|&(p, q)| if c[p / 3] == c[q / 3] { s2.clone() } else { s2.clone() / Q::int(2) }).collect();
        let b = &self.instance.a;
        let idx_e: Vec<usize> = (0..m).collect();
        let idx_a: Vec<usize> = (m..m + n3).collect();
        let lead = b.principal(&idx_e).add_diag(&de);
        let a = b.principal(&idx_a);
        let inv = inverse(&lead, 0.0)?;
        let k = self.k_block(false);
        let klg = self.k_block(true);
        // K M⁻¹ Kᵀ with M the leading block, and the same with only the large entries and Diag(dᴱ)
        let kmk = k.mul(&inv.to_mat())?.mul(&k.transpose())?;
        let s1 = SymMatrix::from_fn(n3, |i, j| a.get(i, j).clone() - kmk.get(i, j).clone());
        let s2m = SymMatrix::from_fn(n3, |i, j| {
            let mut t = a.get(i, j).clone();
            for u in 0..m {
                let (x, y) = (klg.get(i, u), klg.get(j, u));
                if !x.is_zero() && !y.is_zero() {
                    t -= x.clone() * y.clone() / de[u].clone();
                }
            }
            t
        });
        let gap = s2m.sub(&s1).frobenius();
        let h = SymMatrix::from_fn(m + n3, |i, j| {
            if i < m || j < m || i == j {
                Q::int(0)
            } else {
                s2m.get(i - m, j - m).clone() - s1.get(i - m, j - m).clone()
            }
        });
        let mut d = de;
        d.extend((0..n3).map(|p| Q::int(1) - s1.get(p, p).clone()));
        let mut dec = Decomposition::from_d(d);
        dec.h = Some(h);
        let report = self.validate(Some(gap));
        Ok(AppendixWitness { decomposition: dec, schur_gap: gap, report })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_formula() {
        let p = AppendixParams::new(1, 3, 1e-6, 2.0, 1e4, 1e-12);
        let want = 1e-6 / (10.0 * 81.0 * 6f64.sqrt() * 3f64.sqrt());
        assert!((p.delta - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn eps_range_enforced() {
        let g = Graph::path(3);
        assert!(matches!(appendix_p2tilde_instance(&g, 1e-6, 2.0, 1e4, 1e-12), Err(ReductionError::EpsOutOfRange { .. })));
        assert!(appendix_p2tilde_instance(&Graph::complete(3), 1e-17, 2.0, 1e4, 1e-12).is_err());
        let ok = appendix_p2tilde_instance(&g, 1e-16, 2.0, 1e4, 1e-12).unwrap();
        assert_eq!(ok.instance.n(), 18);
        assert_eq!(ok.instance.r, 12);
        ok.instance.validate().unwrap();
    }

    #[test]
    fn path_witness_exact() {
        let g = Graph::path(3);
        let ai = appendix_p2tilde_instance(&g, 2e-16, 2.0, 1e4, 1e-12).unwrap();
        for c in [[0u8, 1, 0], [0, 1, 2]] {
            let w = ai.witness(&c).unwrap();
            assert!(w.schur_gap <= ai.params.eps, "{}", w.schur_gap);
            assert!(w.report.pass, "{:?}", w.report.violations());
            let (dec, rep) = w.decomposition.certify(&ai.instance, 0.0);
            assert!(rep.pass, "{:?}", rep);
            // 9 from the leading block plus one per color used
            let colors = c.iter().collect::<std::collections::BTreeSet<_>>().len();
            assert_eq!(dec.achieved_rank, 9 + colors);
        }
        assert!(ai.witness(&[0, 0, 1]).is_err());
    }
}
