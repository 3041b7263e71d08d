use std::collections::HashSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ReductionError;

/// Colors `0, 1, 2`, one per vertex.
pub type Coloring = Vec<u8>;

/// Simple undirected loopless graph on vertices `0..n`. Edges are stored as
/// `(i, j)` with `i < j`, sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    set: HashSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ReductionError> {
        if n == 0 {
            return Err(ReductionError::Graph("a graph needs at least one vertex".into()));
        }
        let mut es = Vec::new();
        for (i, j) in edges {
            if i == j {
                return Err(ReductionError::Graph(format!("loop at vertex {}", i + 1)));
            }
            if i >= n || j >= n {
                return Err(ReductionError::Graph(format!("edge ({}, {}) outside {} vertices", i + 1, j + 1, n)));
            }
            es.push((i.min(j), i.max(j)));
        }
        es.sort_unstable();
        es.dedup();
        let set = es.iter().copied().collect();
        Ok(Graph { n, edges: es, set })
    }

    pub fn empty(n: usize) -> Self {
        Graph::new(n, []).unwrap()
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Self {
        let mut g: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            g.push((0, n - 1));
        }
        Graph::new(n, g).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.set.contains(&(i.min(j), i.max(j)))
    }

    /// Unordered non-adjacent pairs, lexicographic.
    pub fn nonedges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Subgraph induced by `keep` (renumbered in the given order).
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let pos: std::collections::HashMap<usize, usize> = keep.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let es = self.edges.iter().filter_map(|&(i, j)| Some((*pos.get(&i)?, *pos.get(&j)?)));
        Graph::new(keep.len(), es).unwrap()
    }

    pub fn is_proper(&self, c: &[u8]) -> bool {
        c.len() == self.n && c.iter().all(|&x| x < 3) && self.edges.iter().all(|&(i, j)| c[i] != c[j])
    }

    /// Edge-list text, one `u v` pair per line, 1-indexed, with a
    /// `# vertices` header so isolated vertices survive.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# vertices {}\n", self.n);
        for &(i, j) in &self.edges {
            s.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        s
    }
}

/// Parse an edge list (1-indexed `u v` lines, `#` comments, optional
/// `# vertices N` header) or DIMACS `.col` (`p edge N M`, `e u v`).
pub fn parse_graph(src: &str) -> Result<Graph, ReductionError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let num = |t: &str, line: usize| t.parse::<usize>().map_err(|_| ReductionError::Graph(format!("line {}: bad number `{}`", line, t)));
    for (ln, raw) in src.lines().enumerate() {
        let line = raw.trim();
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "#" if toks.get(1) == Some(&"vertices") && toks.len() == 3 => n = Some(num(toks[2], ln + 1)?),
            t if t.starts_with('#') || t == "c" => {}
            "p" => {
                if toks.len() < 3 {
                    return Err(ReductionError::Graph(format!("line {}: malformed problem line", ln + 1)));
                }
                n = Some(num(toks[2], ln + 1)?);
            }
            "e" if toks.len() == 3 => edges.push((num(toks[1], ln + 1)?, num(toks[2], ln + 1)?)),
            _ if toks.len() == 2 => edges.push((num(toks[0], ln + 1)?, num(toks[1], ln + 1)?)),
            _ => return Err(ReductionError::Graph(format!("line {}: expected `u v`", ln + 1))),
        }
    }
    if edges.iter().any(|&(u, v)| u == 0 || v == 0) {
        return Err(ReductionError::Graph("vertices are 1-indexed".into()));
    }
    let max = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
    let n = n.unwrap_or(max);
    Graph::new(n, edges.into_iter().map(|(u, v)| (u - 1, v - 1)))
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphDoc { vertices: self.n, edges: self.edges.iter().map(|&(i, j)| [i + 1, j + 1]).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Graph, D::Error> {
        let doc = GraphDoc::deserialize(d)?;
        if doc.edges.iter().any(|e| e[0] == 0 || e[1] == 0) {
            return Err(serde::de::Error::custom("vertices are 1-indexed"));
        }
        Graph::new(doc.vertices, doc.edges.iter().map(|e| (e[0] - 1, e[1] - 1))).map_err(serde::de::Error::custom)
    }
}

/// Vertex ids of the prism gadget for the pair `(i, j)`, `i < j`, in the
/// supergraph of a graph on `n` vertices: `[a, b, c, d]`.
fn prism_ids(n: usize, i: usize, j: usize) -> [usize; 4] {
    // pairs before (i, j) in lexicographic order
    let before = i * n - i * (i + 1) / 2 + (j - i - 1);
    let base = n + 4 * before;
    [base, base + 1, base + 2, base + 3]
}

fn prism_edges(i: usize, j: usize, [a, b, c, d]: [usize; 4]) -> [(usize, usize); 9] {
    [(i, a), (i, b), (a, b), (j, c), (j, d), (c, d), (a, j), (i, d), (b, c)]
}

/// Add a triangular prism on four fresh vertices between every pair of
/// original vertices. Original vertices keep their ids; the gadget for the
/// `p`-th pair in lexicographic order occupies `n + 4p .. n + 4p + 4`.
pub fn peeters_supergraph(g: &Graph) -> Graph {
    let n = g.n();
    let mut edges = g.edges().to_vec();
    for i in 0..n {
        for j in i + 1..n {
            edges.extend(prism_edges(i, j, prism_ids(n, i, j)));
        }
    }
    Graph::new(n + 2 * n * n.saturating_sub(1), edges).unwrap()
}

/// Extend a proper coloring of `g` to its prism supergraph.
pub fn extend_peeters_coloring(g: &Graph, c: &[u8]) -> Result<Coloring, ReductionError> {
    if !g.is_proper(c) {
        return Err(ReductionError::Certificate("not a proper 3-coloring of the graph".into()));
    }
    let n = g.n();
    let mut out = c.to_vec();
    out.resize(n + 2 * n * n.saturating_sub(1), 0);
    for i in 0..n {
        for j in i + 1..n {
            let ids = prism_ids(n, i, j);
            let es = prism_edges(i, j, ids);
            let found = (0..81u32).find_map(|code| {
                let mut col = out.clone();
                for (k, &v) in ids.iter().enumerate() {
                    col[v] = ((code / 3u32.pow(k as u32)) % 3) as u8;
                }
                es.iter().all(|&(x, y)| col[x] != col[y]).then_some(col)
            });
            out = found.ok_or_else(|| ReductionError::Certificate(format!("prism ({}, {}) cannot be colored", i + 1, j + 1)))?;
        }
    }
    Ok(out)
}

/// Replace each vertex by a complete 3-partite gadget with parts of size
/// `c + 1`; part 0 is exposed and each original edge joins the exposed parts
/// completely. Vertex `v`, part `p`, copy `q` gets id `3(c+1)v + (c+1)p + q`.
pub fn robustify(g: &Graph, c: usize) -> Graph {
    let s = c + 1;
    let id = |v: usize, p: usize, q: usize| 3 * s * v + s * p + q;
    let mut edges = Vec::new();
    for v in 0..g.n() {
        for p in 0..3 {
            for p2 in p + 1..3 {
                for q in 0..s {
                    for q2 in 0..s {
                        edges.push((id(v, p, q), id(v, p2, q2)));
                    }
                }
            }
        }
    }
    for &(v, w) in g.edges() {
        for q in 0..s {
            for q2 in 0..s {
                edges.push((id(v, 0, q), id(w, 0, q2)));
            }
        }
    }
    Graph::new(3 * s * g.n(), edges).unwrap()
}

/// Part `p` of vertex `v` takes color `c(v) + p mod 3`.
pub fn extend_robust_coloring(g: &Graph, c: usize, col: &[u8]) -> Result<Coloring, ReductionError> {
    if !g.is_proper(col) {
        return Err(ReductionError::Certificate("not a proper 3-coloring of the graph".into()));
    }
    let s = c + 1;
    Ok((0..3 * s * g.n()).map(|id| (col[id / (3 * s)] + ((id % (3 * s)) / s) as u8) % 3).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supergraph_counts() {
        let k3 = Graph::complete(3);
        let p = peeters_supergraph(&k3);
        assert_eq!((p.n(), p.edges().len()), (15, 30));
        let one = peeters_supergraph(&Graph::empty(1));
        assert_eq!((one.n(), one.edges().len()), (1, 0));
        let c = extend_peeters_coloring(&k3, &[0, 1, 2]).unwrap();
        assert!(p.is_proper(&c));
    }

    #[test]
    fn robustify_counts() {
        let e = Graph::path(2);
        let r = robustify(&e, 0);
        assert_eq!((r.n(), r.edges().len()), (6, 7));
        let r = robustify(&Graph::complete(3), 1);
        assert_eq!(r.n(), 18);
        assert_eq!(r.edges().len(), 3 * 12 + 3 * 4);
        let c = extend_robust_coloring(&Graph::complete(3), 1, &[0, 1, 2]).unwrap();
        assert!(r.is_proper(&c));
    }

    #[test]
    fn parse_both_formats() {
        let g = parse_graph("1 2\n2 3\n# comment\n").unwrap();
        assert_eq!(g, Graph::path(3));
        let d = parse_graph("c tiny\np edge 4 2\ne 1 2\ne 3 4\n").unwrap();
        assert_eq!(d.n(), 4);
        assert_eq!(d.edges(), &[(0, 1), (2, 3)]);
        assert_eq!(parse_graph(&Graph::empty(2).to_edge_list()).unwrap(), Graph::empty(2));
        assert!(parse_graph("1 1\n").is_err());
        assert!(parse_graph("0 1\n").is_err());
    }
}
