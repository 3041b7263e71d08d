use serde::{Deserialize, Serialize};

use crate::reductions::Graph;

use super::OracleError;

/// Default vertex cap for [`brute_force_3color`].
pub const MAX_VERTICES: usize = 25;

/// `coloring[v] ∈ {0, 1, 2}` when the graph is colorable; it is proper by
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringResult {
    pub colorable: bool,
    pub coloring: Option<Vec<u8>>,
}

/// Exhaustive backtracking over at most 25 vertices. Vertices are visited
/// in decreasing degree order and the first one is pinned to color 0.
pub fn brute_force_3color(g: &Graph) -> Result<ColoringResult, OracleError> {
    brute_force_3color_capped(g, MAX_VERTICES)
}

/// [`brute_force_3color`] with an explicit vertex cap.
pub fn brute_force_3color_capped(g: &Graph, cap: usize) -> Result<ColoringResult, OracleError> {
    let n = g.n();
    if n > cap {
        return Err(OracleError::SizeCap(n, cap));
    }
    let adj = g.adjacency();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
    let mut color = vec![u8::MAX; n];
    let found = assign(&order, 0, &adj, &mut color);
    let coloring = found.then(|| color.clone());
    debug_assert!(coloring.as_ref().map_or(true, |c| g.is_proper(c)));
    Ok(ColoringResult { colorable: found, coloring })
}

fn assign(order: &[usize], k: usize, adj: &[Vec<usize>], color: &mut [u8]) -> bool {
    let Some(&v) = order.get(k) else { return true };
    let top = if k == 0 { 1 } else { 3 };
    for c in 0..top {
        if adj[v].iter().all(|&w| color[w] != c) {
            color[v] = c;
            if assign(order, k + 1, adj, color) {
                return true;
            }
        }
    }
    color[v] = u8::MAX;
    false
}

/// One representative per isomorphism class of graphs on `1..=max_n`
/// vertices (18 classes for `max_n = 4`), ordered by vertex count and then
/// by canonical edge mask.
pub fn small_graphs(max_n: usize) -> Vec<Graph> {
    assert!(max_n <= 6, "isomorphism classes are found by brute force");
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let perms = permutations(n);
        let mut seen = std::collections::BTreeSet::new();
        for mask in 0u32..1 << pairs.len() {
            let canon = perms
                .iter()
                .map(|p| {
                    let mut m = 0u32;
                    for (b, &(i, j)) in pairs.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            let (x, y) = (p[i].min(p[j]), p[i].max(p[j]));
                            m |= 1 << pairs.iter().position(|&q| q == (x, y)).unwrap();
                        }
                    }
                    m
                })
                .min()
                .unwrap();
            seen.insert(canon);
        }
        for mask in seen {
            let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
            out.push(Graph::new(n, edges).unwrap());
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::peeters_supergraph;

    #[test]
    fn cliques() {
        assert!(brute_force_3color(&Graph::complete(3)).unwrap().colorable);
        let k4 = brute_force_3color(&Graph::complete(4)).unwrap();
        assert!(!k4.colorable && k4.coloring.is_none());
        assert!(brute_force_3color(&Graph::cycle(5)).unwrap().colorable);
        assert!(matches!(brute_force_3color(&Graph::empty(26)), Err(OracleError::SizeCap(26, 25))));
    }

    #[test]
    fn supergraphs() {
        let c = brute_force_3color(&peeters_supergraph(&Graph::complete(3))).unwrap();
        assert!(c.colorable);
        assert!(peeters_supergraph(&Graph::complete(3)).is_proper(&c.coloring.unwrap()));
        let k4 = peeters_supergraph(&Graph::complete(4));
        assert!(brute_force_3color(&k4).is_err());
        assert!(!brute_force_3color_capped(&k4, 28).unwrap().colorable);
    }

    #[test]
    fn eighteen_small_graphs() {
        let gs = small_graphs(4);
        assert_eq!(gs.len(), 18);
        let counts: Vec<usize> = (1..=4).map(|n| gs.iter().filter(|g| g.n() == n).count()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11]);
        let non: Vec<_> = gs.iter().filter(|g| !brute_force_3color(g).unwrap().colorable).collect();
        assert_eq!(non.len(), 1);
        assert_eq!(non[0].edges().len(), 6);
    }
}
