use crate::decompose::{Decomposition, Instance, Kind};
use crate::scalar::Q;
use crate::symcore::SymMatrix;

use super::graph::{peeters_supergraph, Graph};
use super::ReductionError;

/// Block structure shared by the graph constructions: row `3v + t` is copy
/// `t` of vertex `v`; entries inside a block are 1, entries between blocks
/// of adjacent vertices 0, entries between blocks of non-adjacent vertices
/// `nonedge`, and the diagonal 0.
fn block_matrix(g: &Graph, nonedge: i64) -> SymMatrix<Q> {
    SymMatrix::from_fn(3 * g.n(), |p, q| {
        let (v, w) = (p / 3, q / 3);
        if p == q || (v != w && g.has_edge(v, w)) {
            Q::int(0)
        } else if v == w {
            Q::int(1)
        } else {
            Q::int(nonedge)
        }
    })
}

fn check_coloring(g: &Graph, c: &[u8]) -> Result<(), ReductionError> {
    if g.is_proper(c) {
        Ok(())
    } else {
        Err(ReductionError::Certificate(format!("not a proper 3-coloring of the {}-vertex graph", g.n())))
    }
}

/// The P3 construction on a given graph: `A = I ⊗ 𝟙𝟙ᵀ − I`, the fill must
/// vanish between blocks of adjacent vertices and inside blocks, target
/// rank 3.
#[derive(Clone, Debug)]
pub struct P3Gadget {
    pub graph: Graph,
    pub instance: Instance<Q>,
}

impl P3Gadget {
    /// Fill for a proper coloring of `self.graph`: ones on the diagonal and
    /// on every entry between same-colored non-adjacent blocks. The
    /// completion is then `C ⊗ 𝟙𝟙ᵀ` with `C` the same-color indicator.
    pub fn witness(&self, c: &[u8]) -> Result<Decomposition<Q>, ReductionError> {
        let g = &self.graph;
        check_coloring(g, c)?;
        let l = SymMatrix::from_fn(3 * g.n(), |p, q| {
            let (v, w) = (p / 3, q / 3);
            if p == q || (v != w && c[v] == c[w]) {
                Q::int(1)
            } else {
                Q::int(0)
            }
        });
        Ok(Decomposition::from_fill(l))
    }
}

pub fn p3_from_graph(g: &Graph) -> P3Gadget {
    let a = SymMatrix::from_fn(3 * g.n(), |p, q| if p != q && p / 3 == q / 3 { Q::int(1) } else { Q::int(0) });
    let mut x = Vec::with_capacity(9 * g.edges().len() + 3 * g.n());
    for v in 0..g.n() {
        x.extend([(3 * v, 3 * v + 1), (3 * v, 3 * v + 2), (3 * v + 1, 3 * v + 2)]);
    }
    for &(v, w) in g.edges() {
        for t in 0..3 {
            for t2 in 0..3 {
                x.push((3 * v + t, 3 * w + t2));
            }
        }
    }
    P3Gadget { graph: g.clone(), instance: Instance::p3(a, x, 3) }
}

/// [`p3_from_graph`] on the prism supergraph.
pub fn build_p3_instance(g: &Graph) -> P3Gadget {
    p3_from_graph(&peeters_supergraph(g))
}

/// The P1/P2 construction on a given graph. The nonedge entries of the
/// block matrix (value 2) are the edges of an auxiliary graph whose
/// node-edge incidence matrix `K` borders the block matrix:
/// `B = [[0, Kᵀ], [K, A]] (+ kI for P1)`, rank target `m + 3`.
#[derive(Clone, Debug)]
pub struct SchurGadget {
    pub graph: Graph,
    /// Positions `(p, q)`, `p < q`, of the 2s in the block matrix; column
    /// `e` of `K` has its ones at rows `pairs[e]`.
    pub pairs: Vec<(usize, usize)>,
    pub k: i64,
    pub instance: Instance<Q>,
}

impl SchurGadget {
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    /// Diagonal for a proper coloring of `self.graph`. The leading block of
    /// the completed matrix becomes diagonal with entries 1 (same color) or
    /// 1/2, and its Schur complement `C ⊗ 𝟙𝟙ᵀ`.
    pub fn witness(&self, c: &[u8]) -> Result<Decomposition<Q>, ReductionError> {
        let g = &self.graph;
        check_coloring(g, c)?;
        let n = 3 * g.n();
        let m = self.m();
        let same = |e: usize| c[self.pairs[e].0 / 3] == c[self.pairs[e].1 / 3];
        // n1 counts incident same-color pairs, n2 the others
        let mut n1 = vec![0i64; n];
        let mut n2 = vec![0i64; n];
        for (e, &(p, q)) in self.pairs.iter().enumerate() {
            let t = if same(e) { &mut n1 } else { &mut n2 };
            t[p] += 1;
            t[q] += 1;
        }
        let half = Q::new(1, 2);
        let mut d = Vec::with_capacity(m + n);
        match self.instance.kind {
            Kind::P1 => {
                let k = Q::int(self.k);
                for e in 0..m {
                    d.push(if same(e) { k.clone() - Q::int(1) } else { k.clone() - half.clone() });
                }
                for p in 0..n {
                    d.push(Q::int(self.k - 1 - n1[p] - 2 * n2[p]));
                }
            }
            _ => {
                for e in 0..m {
                    d.push(if same(e) { Q::int(1) } else { half.clone() });
                }
                for p in 0..n {
                    d.push(Q::int(1 + n1[p] + 2 * n2[p]));
                }
            }
        }
        Ok(Decomposition::from_d(d))
    }
}

pub fn schur_from_graph(g: &Graph, kind: Kind) -> Result<SchurGadget, ReductionError> {
    if kind == Kind::P3 {
        return Err(ReductionError::Graph("the bordered construction targets P1 or P2".into()));
    }
    let n = 3 * g.n();
    let mut pairs = Vec::new();
    for (v, w) in g.nonedges() {
        for t in 0..3 {
            for t2 in 0..3 {
                pairs.push((3 * v + t, 3 * w + t2));
            }
        }
    }
    let m = pairs.len();
    let mut deg = vec![0i64; n];
    for &(p, q) in &pairs {
        deg[p] += 1;
        deg[q] += 1;
    }
    let k = 2 * deg.iter().copied().max().unwrap_or(0) + 1;
    let a = block_matrix(g, 2);
    let shift = if kind == Kind::P1 { Q::int(k) } else { Q::int(0) };
    let b = SymMatrix::from_fn(m + n, |i, j| {
        let mut v = if i >= m && j >= m {
            a.get(i - m, j - m).clone()
        } else if i >= m && j < m {
            let (p, q) = pairs[j];
            if i - m == p || i - m == q {
                Q::int(1)
            } else {
                Q::int(0)
            }
        } else {
            Q::int(0)
        };
        if i == j {
            v += shift.clone();
        }
        v
    });
    Ok(SchurGadget { graph: g.clone(), pairs, k, instance: Instance::new(kind, b, m + 3) })
}

/// P1 construction on the prism supergraph of `g`.
pub fn build_p1_instance(g: &Graph) -> SchurGadget {
    schur_from_graph(&peeters_supergraph(g), Kind::P1).unwrap()
}

/// P2 construction on the prism supergraph of `g`.
pub fn build_p2_instance(g: &Graph) -> SchurGadget {
    schur_from_graph(&peeters_supergraph(g), Kind::P2).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::verify;
    use crate::reductions::graph::extend_peeters_coloring;

    #[test]
    fn p3_sizes_k3() {
        let gad = build_p3_instance(&Graph::complete(3));
        assert_eq!(gad.instance.n(), 45);
        assert_eq!(gad.instance.x.len(), 315);
        gad.instance.validate().unwrap();
        let c = extend_peeters_coloring(&Graph::complete(3), &[0, 1, 2]).unwrap();
        let w = gad.witness(&c).unwrap();
        let rep = verify(&gad.instance, &w, 0.0);
        assert!(rep.pass, "{:?}", rep);
        assert_eq!(rep.rank, 3);
    }

    #[test]
    fn single_vertex() {
        let gad = build_p3_instance(&Graph::empty(1));
        assert_eq!(gad.instance.a, block_matrix(&Graph::empty(1), 0));
        let rep = verify(&gad.instance, &gad.witness(&[0]).unwrap(), 0.0);
        assert!(rep.pass);
        assert_eq!(rep.rank, 1);
    }

    #[test]
    fn bordered_on_small_graph() {
        // raw path: one nonedge, m = 9
        let g = Graph::path(3);
        for kind in [Kind::P1, Kind::P2] {
            let gad = schur_from_graph(&g, kind).unwrap();
            assert_eq!(gad.m(), 9);
            gad.instance.validate().unwrap();
            for c in [[0u8, 1, 0], [0, 1, 2]] {
                let rep = verify(&gad.instance, &gad.witness(&c).unwrap(), 0.0);
                assert!(rep.pass, "{:?}", rep);
                assert!(rep.rank <= 12);
            }
        }
    }

    #[test]
    fn bad_coloring_rejected() {
        let gad = p3_from_graph(&Graph::path(2));
        assert!(gad.witness(&[1, 1]).is_err());
    }
}
