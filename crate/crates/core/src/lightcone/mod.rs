//! Depth-p causal light cones of single nodes.
//!
//! The cone of node `i` holds every alive vertex within distance `p` of `i`
//! and every alive edge whose nearer endpoint sits at distance `p-1` or less.
//! Edges between two distance-`p` vertices cannot influence `<Z_i>` after `p`
//! QAOA layers and are left out, which is what makes the p=1 census consist
//! of stars only.

mod canon;
mod census;

pub use canon::{canonical_key, canonical_order, CanonicalKey};
pub use census::{enumerate_cones, CensusReport};

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};

/// Number of vertices in the depth-`p` `d`-regular tree rooted at a vertex.
pub fn tree_node_count(p: usize, d: usize) -> usize {
    if d == 2 {
        return 1 + 2 * p;
    }
    let b = d.saturating_sub(1);
    let mut count = 1;
    let mut shell = d;
    for _ in 0..p {
        count += shell;
        shell *= b;
    }
    count
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LightCone {
    depth: usize,
    dist: Vec<usize>,
    edges: Vec<(usize, usize)>,
    origin: Vec<NodeId>,
}

impl LightCone {
    /// Builds a cone from local data, checking every structural invariant.
    /// Vertex 0 is the root.
    pub fn from_parts(depth: usize, dist: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let cone = Self::from_parts_unchecked(depth, dist, edges);
        cone.validate()?;
        Ok(cone)
    }

    pub(crate) fn from_parts_unchecked(
        depth: usize,
        dist: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Self {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        LightCone {
            depth,
            dist,
            edges,
            origin: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("light cone: {msg}")));
        let n = self.dist.len();
        if n == 0 || self.dist[0] != 0 {
            return bad("root must be vertex 0 at distance 0".into());
        }
        if self.dist[1..].iter().any(|&d| d == 0 || d > self.depth) {
            return bad("non-root distances must lie in 1..=depth".into());
        }
        if self.edges.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate edge".into());
        }
        let mut has_parent = vec![false; n];
        has_parent[0] = true;
        for &(u, v) in &self.edges {
            if u == v || v >= n {
                return bad(format!("bad edge {u}-{v}"));
            }
            let (du, dv) = (self.dist[u], self.dist[v]);
            if du.abs_diff(dv) > 1 {
                return bad(format!("edge {u}-{v} skips a shell"));
            }
            if du.min(dv) + 1 > self.depth {
                return bad(format!("edge {u}-{v} joins two outermost vertices"));
            }
            if dv == du + 1 {
                has_parent[v] = true;
            } else if du == dv + 1 {
                has_parent[u] = true;
            }
        }
        if let Some(v) = has_parent.iter().position(|&h| !h) {
            return bad(format!("vertex {v} has no edge towards the root"));
        }
        Ok(())
    }

    /// Full depth-`p` `d`-regular tree cone, vertices in BFS order.
    pub fn regular_tree(p: usize, d: usize) -> Self {
        let mut dist = vec![0];
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        for k in 1..=p {
            let mut next = Vec::new();
            for &u in &frontier {
                let children = if k == 1 { d } else { d - 1 };
                for _ in 0..children {
                    let v = dist.len();
                    dist.push(k);
                    edges.push((u, v));
                    next.push(v);
                }
            }
            frontier = next;
        }
        Self::from_parts_unchecked(p, dist, edges)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of vertices (qubits needed to simulate the cone).
    pub fn size(&self) -> usize {
        self.dist.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn distances(&self) -> &[usize] {
        &self.dist
    }

    /// Causal edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Graph node ids of the cone vertices, when extracted from a graph.
    pub fn origin(&self) -> &[NodeId] {
        &self.origin
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.dist.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.size()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.size()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Same cone with vertex `v` renamed to `perm[v]`. `perm` must fix 0.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.size() || perm.first() != Some(&0) {
            return Err(Error::InvalidParameter(
                "relabeling must be a permutation fixing the root".into(),
            ));
        }
        let mut seen = vec![false; perm.len()];
        for &t in perm {
            if t >= perm.len() || std::mem::replace(&mut seen[t], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let mut dist = vec![0; self.size()];
        for (v, &t) in perm.iter().enumerate() {
            dist[t] = self.dist[v];
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Ok(Self::from_parts_unchecked(self.depth, dist, edges))
    }

    /// Debug dump: `p n m`, the distance labels, then one causal edge per line.
    pub fn dump(&self) -> String {
        let mut s = format!("{} {} {}\n", self.depth, self.size(), self.edge_count());
        let labels: Vec<String> = self.dist.iter().map(|d| d.to_string()).collect();
        s.push_str(&labels.join(" "));
        s.push('\n');
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let nums = |line: usize, s: &str| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| perr(line, &e.to_string())))
                .collect()
        };
        let (l0, header) = lines.next().ok_or_else(|| perr(0, "empty dump"))?;
        let h = nums(l0, header)?;
        if h.len() != 3 {
            return Err(perr(l0, "header must be `p n m`"));
        }
        let (depth, n, m) = (h[0], h[1], h[2]);
        let dist = match lines.next() {
            Some((l1, s)) => nums(l1, s)?,
            None if n == 0 => Vec::new(),
            None => return Err(perr(1, "missing distance labels")),
        };
        if dist.len() != n {
            return Err(perr(1, "distance label count differs from n"));
        }
        let mut edges = Vec::with_capacity(m);
        for (l, s) in lines {
            let e = nums(l, s)?;
            if e.len() != 2 {
                return Err(perr(l, "edge lines need two ids"));
            }
            edges.push((e[0], e[1]));
        }
        if edges.len() != m {
            return Err(perr(0, "edge count differs from header"));
        }
        Self::from_parts(depth, dist, edges)
    }
}

/// Causal light cone of depth `p` around alive node `i`.
///
/// Local ids follow BFS order with ascending graph ids among siblings, so the
/// root is always 0.
pub fn extract_lightcone(g: &Graph, i: NodeId, p: usize) -> Result<LightCone> {
    if p == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let ball = g.ball(i, p)?;
    let local: HashMap<NodeId, usize> = ball.iter().enumerate().map(|(k, &(v, _))| (v, k)).collect();
    let mut edges = Vec::new();
    for (lu, &(u, du)) in ball.iter().enumerate() {
        if du + 1 > p {
            continue;
        }
        for w in g.neighbors(u) {
            let lw = local[&w];
            // Skip the mirror of an edge already taken from the other side.
            if ball[lw].1 + 1 <= p && lw < lu {
                continue;
            }
            edges.push((lu, lw));
        }
    }
    let mut cone = LightCone::from_parts_unchecked(
        p,
        ball.iter().map(|&(_, d)| d).collect(),
        edges,
    );
    cone.origin = ball.into_iter().map(|(v, _)| v).collect();
    Ok(cone)
}

/// Nodes whose depth-`p` cones can change when `i`'s closed neighborhood is
/// deleted: the radius-`p+1` ball, taken before the deletion.
pub fn affected_nodes(g: &Graph, i: NodeId, p: usize) -> Result<NodeSet> {
    let ball = g.ball(i, p + 1)?;
    NodeSet::from_vec(ball.into_iter().map(|(v, _)| v).collect())
}
