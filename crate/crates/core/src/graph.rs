//! Residual problem graphs and the MIS Ising encoding.
//!
//! A [`Graph`] keeps its original adjacency forever and tracks deletions with
//! an alive mask, so node ids stay stable for the whole lifetime of a solve.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Maximum number of configuration-model restarts before giving up.
pub const DEFAULT_RESTART_BUDGET: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    alive: Vec<bool>,
    degree: Vec<usize>,
    alive_count: usize,
    edge_count: usize,
}

impl Graph {
    /// Edgeless graph on `n` nodes, all alive.
    pub fn new(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            alive: vec![true; n],
            degree: vec![0; n],
            alive_count: n,
            edge_count: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds an undirected edge between two alive nodes.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_alive(u)?;
        self.check_alive(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if self.adjacency[u].contains(&v) {
            return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        self.degree[u] += 1;
        self.degree[v] += 1;
        self.edge_count += 1;
        Ok(())
    }

    /// Total number of node ids, dead or alive.
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    /// Number of edges with both endpoints alive.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.alive_count == 0
    }

    pub fn is_alive(&self, i: NodeId) -> bool {
        self.alive.get(i).copied().unwrap_or(false)
    }

    /// Alive degree of `i`. Dead nodes report zero.
    pub fn degree(&self, i: NodeId) -> usize {
        if self.is_alive(i) {
            self.degree[i]
        } else {
            0
        }
    }

    pub fn max_degree(&self) -> usize {
        self.alive_nodes().map(|i| self.degree[i]).max().unwrap_or(0)
    }

    /// Alive neighbors of `i`, in insertion order.
    pub fn neighbors(&self, i: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let alive = self.is_alive(i);
        self.adjacency[i]
            .iter()
            .copied()
            .filter(move |&j| alive && self.alive[j])
    }

    pub fn alive_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&i| self.alive[i])
    }

    /// Alive edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in self.alive_nodes() {
            for v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.is_alive(u) && self.is_alive(v) && self.adjacency[u].contains(&v)
    }

    fn check_range(&self, i: NodeId) -> Result<()> {
        if i >= self.node_count() {
            Err(Error::NodeOutOfRange {
                node: i,
                len: self.node_count(),
            })
        } else {
            Ok(())
        }
    }

    fn check_alive(&self, i: NodeId) -> Result<()> {
        self.check_range(i)?;
        if self.alive[i] {
            Ok(())
        } else {
            Err(Error::DeadNode(i))
        }
    }

    /// Deletes `i` together with its alive neighbors and returns them,
    /// `i` first.
    pub fn remove_closed_neighborhood(&mut self, i: NodeId) -> Result<NodeSet> {
        self.check_alive(i)?;
        let mut removed = vec![i];
        removed.extend(self.neighbors(i));
        for &v in &removed {
            self.kill(v);
        }
        Ok(NodeSet(removed))
    }

    fn kill(&mut self, v: NodeId) {
        debug_assert!(self.alive[v]);
        self.alive[v] = false;
        self.alive_count -= 1;
        for k in 0..self.adjacency[v].len() {
            let w = self.adjacency[v][k];
            if self.alive[w] {
                self.degree[w] -= 1;
                self.edge_count -= 1;
            }
        }
        self.degree[v] = 0;
    }

    /// Breadth-first ball of `radius` around `i` over alive nodes.
    ///
    /// Returns `(node, distance)` pairs in BFS order; neighbors are visited
    /// in ascending id order so the result is deterministic.
    pub fn ball(&self, i: NodeId, radius: usize) -> Result<Vec<(NodeId, usize)>> {
        self.check_alive(i)?;
        let mut dist = std::collections::HashMap::new();
        let mut order = vec![(i, 0)];
        dist.insert(i, 0usize);
        let mut queue = VecDeque::from([i]);
        let mut buf = Vec::new();
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if du == radius {
                continue;
            }
            buf.clear();
            buf.extend(self.neighbors(u));
            buf.sort_unstable();
            for &v in &buf {
                if !dist.contains_key(&v) {
                    dist.insert(v, du + 1);
                    order.push((v, du + 1));
                    queue.push_back(v);
                }
            }
        }
        Ok(order)
    }

    /// True iff no edge of this graph (ignoring deletions) joins two members
    /// of `set`. Call it on the original, pre-deletion graph.
    pub fn is_independent(&self, set: &NodeSet) -> bool {
        let n = self.node_count();
        let mut member = vec![false; n];
        for &v in set.iter() {
            if v >= n {
                return false;
            }
            member[v] = true;
        }
        set.iter()
            .all(|&v| self.adjacency[v].iter().all(|&w| !member[w]))
    }

    /// Uniform random simple `d`-regular graph on `n` nodes.
    ///
    /// Configuration model: pair up `n*d` half-edges uniformly and restart
    /// from scratch whenever a self-loop or multi-edge appears.
    pub fn generate_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
        Self::generate_regular_with_budget(n, d, seed, DEFAULT_RESTART_BUDGET)
    }

    pub fn generate_regular_with_budget(
        n: usize,
        d: usize,
        seed: u64,
        restarts: usize,
    ) -> Result<Graph> {
        if n <= d || (n * d) % 2 != 0 {
            return Err(Error::InfeasibleRegular { n, d });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stubs: Vec<NodeId> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        'attempt: for _ in 0..restarts {
            stubs.shuffle(&mut rng);
            let mut g = Graph::new(n);
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == v || g.adjacency[u].contains(&v) {
                    continue 'attempt;
                }
                g.adjacency[u].push(v);
                g.adjacency[v].push(u);
                g.degree[u] += 1;
                g.degree[v] += 1;
                g.edge_count += 1;
            }
            return Ok(g);
        }
        Err(Error::RestartBudgetExceeded(restarts))
    }

    /// Reads the edge-list text format: `N M` followed by `M` lines `u v`.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let nums = parse_numbers(&header, line_no, 2)?;
        let (n, m) = (nums[0], nums[1]);
        let mut g = Graph::new(n);
        let mut seen = 0;
        for (line_no, line) in lines {
            let line = line?;
            let uv = parse_numbers(&line, line_no, 2)?;
            g.add_edge(uv[0], uv[1]).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header promises {m} edges, found {seen}"),
            });
        }
        Ok(g)
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let edges = self.edges();
        writeln!(w, "{} {}", self.node_count(), edges.len())?;
        for (u, v) in edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

fn parse_numbers(line: &str, line_no: usize, expected: usize) -> Result<Vec<usize>> {
    let nums = line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
    if nums.len() != expected {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected {expected} integers, got {}", nums.len()),
        });
    }
    Ok(nums)
}

/// Ordered list of distinct node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn from_vec(nodes: Vec<NodeId>) -> Result<Self> {
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("duplicate node {}", w[0])));
        }
        Ok(NodeSet(nodes))
    }

    pub(crate) fn push_unchecked(&mut self, v: NodeId) {
        self.0.push(v);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, NodeId> {
        self.0.iter()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.contains(&v)
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Penalty weight of the MIS Ising encoding and the coefficients it induces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingParams {
    lambda: f64,
}

impl Default for IsingParams {
    fn default() -> Self {
        IsingParams { lambda: 1.0 }
    }
}

impl IsingParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "penalty weight must be finite and >= 1, got {lambda}"
            )));
        }
        Ok(IsingParams { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Coefficient of `Z_i Z_j` for each edge.
    pub fn coupling(&self) -> f64 {
        self.lambda / 4.0
    }

    /// Local field `(lambda*d - 2)/4` of a node with (current) degree `d`.
    pub fn field(&self, degree: usize) -> f64 {
        (self.lambda * degree as f64 - 2.0) / 4.0
    }

    /// Per-node constant `(lambda*d - 4)/8`.
    pub fn offset(&self, degree: usize) -> f64 {
        (self.lambda * degree as f64 - 4.0) / 8.0
    }
}

/// `lambda * #(edges inside the set) - |set|` for occupation bits over all
/// node ids; dead nodes are ignored.
pub fn energy(g: &Graph, params: &IsingParams, assignment: &[bool]) -> Result<f64> {
    check_len(g, assignment.len())?;
    let set = g.alive_nodes().filter(|&i| assignment[i]).count();
    let inner = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| assignment[u] && assignment[v])
        .count();
    Ok(params.lambda() * inner as f64 - set as f64)
}

/// The same energy written in Pauli-Z form, evaluated on spins `s_i = ±1`
/// (`+1` means the node is in the set).
pub fn energy_pauli(g: &Graph, params: &IsingParams, spins: &[i8]) -> Result<f64> {
    check_len(g, spins.len())?;
    if let Some(&s) = spins.iter().find(|&&s| s != 1 && s != -1) {
        return Err(Error::InvalidParameter(format!("spin value {s}")));
    }
    let j = params.coupling();
    let mut e = 0.0;
    for (u, v) in g.edges() {
        e += j * f64::from(spins[u]) * f64::from(spins[v]);
    }
    for i in g.alive_nodes() {
        let d = g.degree(i);
        e += params.field(d) * f64::from(spins[i]) + params.offset(d);
    }
    Ok(e)
}

fn check_len(g: &Graph, got: usize) -> Result<()> {
    if got != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            got,
        });
    }
    Ok(())
}
