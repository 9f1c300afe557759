//! Root-preserving canonical forms for light cones.
//!
//! Pendant trees are folded into string labels first (AHU encoding), so a
//! tree cone never reaches the search below. The remaining core is labeled
//! by individualization-refinement: colors start from (root flag, distance,
//! core degree, pendant label), are refined by neighbor color multisets, and
//! every vertex of the first non-singleton cell is tried in turn. The
//! smallest adjacency certificate over all leaves wins. Automorphisms found
//! along the way prune sibling branches in the same orbit.

use std::collections::HashMap;
use std::fmt;

use super::LightCone;

/// Labeling-invariant fingerprint of a rooted cone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    bytes: Vec<u8>,
    vertices: usize,
    edges: usize,
    is_tree: bool,
}

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn is_tree(&self) -> bool {
        self.is_tree
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() % 2 != 0 {
            return None;
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|k| u8::from_str_radix(s.get(k..k + 2)?, 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        let (vertices, edges, is_tree) = decode_header(&bytes)?;
        Some(CanonicalKey {
            bytes,
            vertices,
            edges,
            is_tree,
        })
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({}v/{}e, {})", self.vertices, self.edges, self.to_hex())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn push_u16(out: &mut Vec<u8>, x: usize) {
    out.extend_from_slice(&(x as u16).to_be_bytes());
}

fn decode_header(bytes: &[u8]) -> Option<(usize, usize, bool)> {
    if bytes.len() < 5 {
        return None;
    }
    let n = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
    let m = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
    Some((n, m, bytes[4] == 1))
}

pub fn canonical_key(cone: &LightCone) -> CanonicalKey {
    key_from_parts(cone.distances(), &cone.adjacency())
}

pub(crate) fn key_from_parts(dist: &[usize], adj: &[Vec<usize>]) -> CanonicalKey {
    let order = canonical_order_parts(dist, adj);
    let n = dist.len();
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, nbrs) in adj.iter().enumerate() {
        for &v in nbrs {
            if u < v {
                let (a, b) = (pos[u], pos[v]);
                edges.push((a.min(b), a.max(b)));
            }
        }
    }
    edges.sort_unstable();
    let is_tree = edges.len() + 1 == n;
    let mut bytes = Vec::with_capacity(5 + n + 4 * edges.len());
    push_u16(&mut bytes, n);
    push_u16(&mut bytes, edges.len());
    bytes.push(is_tree as u8);
    bytes.extend(order.iter().map(|&v| dist[v] as u8));
    for (a, b) in &edges {
        push_u16(&mut bytes, *a);
        push_u16(&mut bytes, *b);
    }
    CanonicalKey {
        bytes,
        vertices: n,
        edges: edges.len(),
        is_tree,
    }
}

/// Canonical vertex order: `order[k]` is the vertex placed at position `k`.
/// The root always comes first.
pub fn canonical_order(cone: &LightCone) -> Vec<usize> {
    canonical_order_parts(cone.distances(), &cone.adjacency())
}

fn canonical_order_parts(dist: &[usize], adj: &[Vec<usize>]) -> Vec<usize> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let root = 0;

    // Fold pendant trees into their attachment vertex.
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut stripped = vec![false; n];
    let mut pendants: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack: Vec<usize> = (1..n).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if stripped[v] || deg[v] != 1 {
            continue;
        }
        stripped[v] = true;
        let u = adj[v]
            .iter()
            .copied()
            .find(|&u| !stripped[u])
            .expect("pendant vertex keeps one neighbor");
        pendants[u].push(v);
        deg[u] -= 1;
        if u != root && deg[u] == 1 {
            stack.push(u);
        }
    }

    let mut labels: Vec<Option<Vec<u8>>> = vec![None; n];
    for v in 0..n {
        tree_label(v, dist, &pendants, &mut labels);
    }
    // Pendant children sorted by label; ties are isomorphic subtrees.
    for kids in pendants.iter_mut() {
        kids.sort_by(|a, b| labels[*a].cmp(&labels[*b]));
    }

    let core: Vec<usize> = (0..n).filter(|&v| !stripped[v]).collect();
    let core_order = if core.len() == 1 {
        core.clone()
    } else {
        let local: HashMap<usize, usize> = core.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let core_adj: Vec<Vec<usize>> = core
            .iter()
            .map(|&v| {
                adj[v]
                    .iter()
                    .filter(|w| !stripped[**w])
                    .map(|w| local[w])
                    .collect()
            })
            .collect();
        let invariants: Vec<(u8, usize, usize, Vec<u8>)> = core
            .iter()
            .map(|&v| {
                let mut sig = Vec::new();
                for &c in &pendants[v] {
                    sig.extend_from_slice(labels[c].as_ref().unwrap());
                }
                (u8::from(v != root), dist[v], core_adj[local[&v]].len(), sig)
            })
            .collect();
        let colors = rank(&invariants);
        let mut search = Search::new(core_adj);
        let start = search.refine(colors);
        search.run(start, &mut Vec::new());
        let (_, lab) = search.best.expect("search visits at least one leaf");
        let mut order = vec![0; core.len()];
        for (k, &p) in lab.iter().enumerate() {
            order[p] = core[k];
        }
        order
    };

    let mut order = Vec::with_capacity(n);
    for &v in &core_order {
        order.push(v);
        let mut stack: Vec<usize> = pendants[v].iter().rev().copied().collect();
        while let Some(w) = stack.pop() {
            order.push(w);
            stack.extend(pendants[w].iter().rev().copied());
        }
    }
    debug_assert_eq!(order.len(), n);
    debug_assert_eq!(order[0], root);
    order
}

fn tree_label(v: usize, dist: &[usize], pendants: &[Vec<usize>], labels: &mut [Option<Vec<u8>>]) {
    if labels[v].is_some() {
        return;
    }
    let mut kids = Vec::with_capacity(pendants[v].len());
    for &c in &pendants[v] {
        tree_label(c, dist, pendants, labels);
        kids.push(labels[c].clone().unwrap());
    }
    kids.sort();
    let mut s = vec![b'(', dist[v] as u8];
    for k in kids {
        s.extend(k);
    }
    s.push(b')');
    labels[v] = Some(s);
}

/// Dense ranks of `items` under their natural order.
fn rank<T: Ord>(items: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&a, &b| items[a].cmp(&items[b]));
    let mut out = vec![0; items.len()];
    let mut r = 0;
    for k in 0..idx.len() {
        if k > 0 && items[idx[k]] != items[idx[k - 1]] {
            r += 1;
        }
        out[idx[k]] = r;
    }
    out
}

type Certificate = Vec<(usize, usize)>;

const MAX_STORED_AUTOMORPHISMS: usize = 128;

struct Search {
    adj: Vec<Vec<usize>>,
    best: Option<(Certificate, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search {
    fn new(adj: Vec<Vec<usize>>) -> Self {
        Search {
            adj,
            best: None,
            automorphisms: Vec::new(),
        }
    }

    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = colors.iter().max().map_or(0, |m| m + 1);
        loop {
            let sigs: Vec<(usize, Vec<usize>)> = (0..colors.len())
                .map(|v| {
                    let mut nb: Vec<usize> = self.adj[v].iter().map(|&w| colors[w]).collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let next = rank(&sigs);
            let next_classes = next.iter().max().map_or(0, |m| m + 1);
            colors = next;
            if next_classes == classes {
                return colors;
            }
            classes = next_classes;
        }
    }

    fn run(&mut self, colors: Vec<usize>, prefix: &mut Vec<usize>) {
        let n = colors.len();
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c] += 1;
        }
        let target = match (0..n).find(|&c| counts[c] > 1) {
            None => return self.leaf(colors),
            Some(c) => c,
        };
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            if !tried.is_empty() && self.same_orbit(v, &tried, prefix) {
                continue;
            }
            let split: Vec<usize> = colors
                .iter()
                .enumerate()
                .map(|(u, &c)| 2 * c + usize::from(c == target && u != v))
                .collect();
            let refined = self.refine(rank(&split));
            prefix.push(v);
            self.run(refined, prefix);
            prefix.pop();
            tried.push(v);
        }
    }

    fn leaf(&mut self, lab: Vec<usize>) {
        let mut cert: Certificate = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    let (a, b) = (lab[u], lab[v]);
                    cert.push((a.min(b), a.max(b)));
                }
            }
        }
        cert.sort_unstable();
        match &self.best {
            None => self.best = Some((cert, lab)),
            Some((best, best_lab)) => {
                if cert < *best {
                    self.best = Some((cert, lab));
                } else if cert == *best && self.automorphisms.len() < MAX_STORED_AUTOMORPHISMS {
                    let mut inv = vec![0; lab.len()];
                    for (v, &p) in best_lab.iter().enumerate() {
                        inv[p] = v;
                    }
                    let gamma: Vec<usize> = lab.iter().map(|&p| inv[p]).collect();
                    if gamma.iter().enumerate().any(|(a, &b)| a != b) {
                        self.automorphisms.push(gamma);
                    }
                }
            }
        }
    }

    /// Whether `v` shares an orbit with one of `tried` under the stored
    /// automorphisms that fix `prefix` pointwise.
    fn same_orbit(&self, v: usize, tried: &[usize], prefix: &[usize]) -> bool {
        let n = self.adj.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut any = false;
        for gamma in &self.automorphisms {
            if prefix.iter().any(|&x| gamma[x] != x) {
                continue;
            }
            any = true;
            for (a, &b) in gamma.iter().enumerate() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        if !any {
            return false;
        }
        let rv = find(&mut parent, v);
        tried.iter().any(|&t| find(&mut parent, t) == rv)
    }
}
