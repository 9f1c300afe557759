//! Enumeration of every light-cone topology a greedy run can meet.
//!
//! Cones are grown shell by shell. For each shell `k < p` we first choose the
//! edges inside shell `k`, then attach the next shell: every new vertex picks
//! a nonempty set of parents in shell `k`. Partial cones are deduplicated by
//! canonical key after every step, which is sound because an isomorphism of
//! finished cones restricts to an isomorphism of their partial shells.

use std::collections::HashSet;
use std::fmt;

use super::canon::{canonical_key, CanonicalKey};
use super::LightCone;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusReport {
    pub depth: usize,
    pub total: usize,
    pub trees: usize,
    pub non_trees: usize,
}

impl fmt::Display for CensusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total {} trees {} nontrees {}",
            self.total, self.trees, self.non_trees
        )
    }
}

#[derive(Clone)]
struct Partial {
    dist: Vec<usize>,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
}

impl Partial {
    fn cone(&self, depth: usize) -> LightCone {
        LightCone::from_parts_unchecked(depth, self.dist.clone(), self.edges.clone())
    }

    fn shell(&self, k: usize) -> Vec<usize> {
        (0..self.dist.len()).filter(|&v| self.dist[v] == k).collect()
    }
}

/// All rooted cones of depth `p` with maximum degree `d`, up to
/// root-preserving isomorphism, sorted by canonical key.
pub fn enumerate_cones(p: usize, d: usize) -> Result<(CensusReport, Vec<LightCone>)> {
    if !(1..=3).contains(&p) {
        return Err(Error::UnsupportedCensusDepth(p));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("degree bound must be positive".into()));
    }
    let mut level = vec![Partial {
        dist: vec![0],
        edges: Vec::new(),
        degree: vec![0],
    }];
    for k in 0..p {
        if k >= 1 {
            level = dedup(p, level.iter().flat_map(|c| with_inner_edges(c, k, d)));
        }
        level = dedup(p, level.iter().flat_map(|c| with_next_shell(c, k, d)));
    }

    let mut cones: Vec<(CanonicalKey, LightCone)> = level
        .into_iter()
        .map(|c| {
            let cone = c.cone(p);
            (canonical_key(&cone), cone)
        })
        .collect();
    cones.sort_by(|a, b| a.0.cmp(&b.0));
    let trees = cones.iter().filter(|(_, c)| c.is_tree()).count();
    let report = CensusReport {
        depth: p,
        total: cones.len(),
        trees,
        non_trees: cones.len() - trees,
    };
    Ok((report, cones.into_iter().map(|(_, c)| c).collect()))
}

fn dedup(depth: usize, items: impl Iterator<Item = Partial>) -> Vec<Partial> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in items {
        if seen.insert(canonical_key(&c.cone(depth))) {
            out.push(c);
        }
    }
    out
}

/// Every way of adding edges inside shell `k` within the degree bound.
fn with_inner_edges(c: &Partial, k: usize, d: usize) -> Vec<Partial> {
    let shell = c.shell(k);
    let pairs: Vec<(usize, usize)> = shell
        .iter()
        .enumerate()
        .flat_map(|(a, &u)| shell[a + 1..].iter().map(move |&v| (u, v)))
        .collect();
    let mut out = Vec::new();
    let mut cur = c.clone();
    fn rec(pairs: &[(usize, usize)], d: usize, cur: &mut Partial, out: &mut Vec<Partial>) {
        let Some((&(u, v), rest)) = pairs.split_first() else {
            out.push(cur.clone());
            return;
        };
        rec(rest, d, cur, out);
        if cur.degree[u] < d && cur.degree[v] < d {
            cur.degree[u] += 1;
            cur.degree[v] += 1;
            cur.edges.push((u, v));
            rec(rest, d, cur, out);
            cur.edges.pop();
            cur.degree[u] -= 1;
            cur.degree[v] -= 1;
        }
    }
    rec(&pairs, d, &mut cur, &mut out);
    out
}

/// Every multiset of parent sets for the vertices of shell `k + 1`.
fn with_next_shell(c: &Partial, k: usize, d: usize) -> Vec<Partial> {
    let open: Vec<usize> = c.shell(k).into_iter().filter(|&v| c.degree[v] < d).collect();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1 << open.len()) {
        if mask.count_ones() as usize <= d {
            subsets.push((0..open.len()).filter(|b| mask >> b & 1 == 1).map(|b| open[b]).collect());
        }
    }
    let mut out = Vec::new();
    let mut cur = c.clone();
    fn rec(subsets: &[Vec<usize>], d: usize, k: usize, cur: &mut Partial, out: &mut Vec<Partial>) {
        let Some((s, rest)) = subsets.split_first() else {
            out.push(cur.clone());
            return;
        };
        rec(rest, d, k, cur, out);
        // Take `s` once more and stay on it to allow repeats.
        if s.iter().all(|&u| cur.degree[u] < d) {
            let v = cur.dist.len();
            cur.dist.push(k + 1);
            cur.degree.push(s.len());
            for &u in s {
                cur.degree[u] += 1;
                cur.edges.push((u, v));
            }
            rec(subsets, d, k, cur, out);
            for &u in s {
                cur.degree[u] -= 1;
                cur.edges.pop();
            }
            cur.degree.pop();
            cur.dist.pop();
        }
    }
    rec(&subsets, d, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one() {
        let (r, cones) = enumerate_cones(1, 3).unwrap();
        assert_eq!((r.total, r.trees, r.non_trees), (4, 4, 0));
        assert_eq!(cones.len(), 4);
        assert_eq!(r.to_string(), "total 4 trees 4 nontrees 0");
    }

    #[test]
    fn unsupported_depths() {
        assert!(matches!(enumerate_cones(0, 3), Err(Error::UnsupportedCensusDepth(0))));
        assert!(matches!(enumerate_cones(4, 3), Err(Error::UnsupportedCensusDepth(4))));
    }

    #[test]
    fn enumerated_cones_are_valid() {
        let (_, cones) = enumerate_cones(2, 3).unwrap();
        for c in &cones {
            c.validate().unwrap();
            assert!(c.degrees().iter().all(|&x| x <= 3));
        }
    }
}
