//! Greedy independent-set solvers and an exact oracle.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::lightcone::{affected_nodes, canonical_key, extract_lightcone, CanonicalKey, LightCone};
use crate::noise::{NoiseParams, NoiseRealization};
use crate::qaoa::{build_circuit, expectation_contract, fnv1a, sample_shots, AngleSchedule, Evaluator, DEFAULT_MEMORY_BUDGET};

/// Rule for choosing among candidates whose advice is within the cutoff of
/// the best.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    SeededRandom,
    LowestId,
}

/// Where the compared values come from.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Advice {
    /// Exact `<Z>`.
    #[default]
    Ideal,
    /// Mean of this many simulated measurements, drawn once per cone
    /// topology and run seed.
    Shots(u64),
    /// Exact `<Z>` passed through the noise model.
    Noise(NoiseParams),
}

impl fmt::Display for Advice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Advice::Ideal => write!(f, "ideal"),
            Advice::Shots(m) => write!(f, "shots{m}"),
            Advice::Noise(p) => write!(f, "noise-eta{}-alpha{}-sigma{}", p.eta(), p.alpha(), p.sigma()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub depth: usize,
    pub angles: AngleSchedule,
    pub tie_break: TieBreak,
    /// Advice values within `cutoff` of the maximum count as tied.
    pub cutoff: f64,
    pub advice: Advice,
    pub seed: u64,
    /// Recompute every alive node after each step instead of only the
    /// nodes near the last selection.
    pub full_recompute: bool,
    /// Take isolated nodes immediately without consulting the advice.
    pub include_isolated: bool,
}

impl SolverConfig {
    /// Ideal advice, zero cutoff, seeded random ties.
    pub fn new(angles: AngleSchedule) -> Self {
        SolverConfig {
            depth: angles.depth(),
            angles,
            tie_break: TieBreak::SeededRandom,
            cutoff: 0.0,
            advice: Advice::Ideal,
            seed: 0,
            full_recompute: false,
            include_isolated: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tie_break(mut self, t: TieBreak) -> Self {
        self.tie_break = t;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_advice(mut self, advice: Advice) -> Self {
        self.advice = advice;
        self
    }

    pub fn with_full_recompute(mut self, on: bool) -> Self {
        self.full_recompute = on;
        self
    }

    pub fn with_include_isolated(mut self, on: bool) -> Self {
        self.include_isolated = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        if self.depth != self.angles.depth() {
            return Err(Error::DepthMismatch {
                circuit: self.depth,
                angles: self.angles.depth(),
            });
        }
        if !(self.cutoff >= 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff {} must be >= 0", self.cutoff)));
        }
        if self.advice == Advice::Shots(0) {
            return Err(Error::InvalidParameter("need at least one shot".into()));
        }
        Ok(())
    }
}

/// One greedy selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub node: NodeId,
    /// Advice value of the chosen node; the classical solver records its
    /// residual degree.
    pub value: f64,
    pub key: Option<CanonicalKey>,
    /// Every node that was tied for selection, ascending.
    pub candidates: Vec<NodeId>,
    /// Size of the deleted closed neighborhood.
    pub removed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveTrace {
    nodes: usize,
    steps: Vec<Step>,
    set: NodeSet,
}

impl SolveTrace {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn set(&self) -> &NodeSet {
        &self.set
    }

    pub fn selections(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn ratio(&self) -> f64 {
        self.set.len() as f64 / self.nodes as f64
    }
}

impl fmt::Display for SolveTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let key = s.key.as_ref().map_or_else(|| "-".to_string(), CanonicalKey::to_hex);
            writeln!(f, "step {} {:.12} {}", s.node, s.value, key)?;
        }
        writeln!(f, "set_size {} {} {:.6}", self.set.len(), self.nodes, self.ratio())
    }
}

fn pick(candidates: &[NodeId], rule: TieBreak, rng: &mut ChaCha8Rng) -> NodeId {
    match rule {
        TieBreak::LowestId => candidates[0],
        TieBreak::SeededRandom => candidates[rng.gen_range(0..candidates.len())],
    }
}

fn check_nonempty(g: &Graph) -> Result<()> {
    if g.alive_count() == 0 {
        return Err(Error::InvalidParameter("graph has no alive nodes".into()));
    }
    Ok(())
}

/// Classical baseline: repeatedly take a uniformly random alive node of
/// minimum residual degree and delete its closed neighborhood.
pub fn solve_classical_greedy(g: &Graph, seed: u64) -> Result<SolveTrace> {
    check_nonempty(g)?;
    let mut g = g.clone();
    let nodes = g.alive_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    let mut set = NodeSet::new();
    while g.alive_count() > 0 {
        let min = g.alive_nodes().map(|v| g.degree(v)).min().expect("alive node");
        let candidates: Vec<NodeId> = g.alive_nodes().filter(|&v| g.degree(v) == min).collect();
        let node = pick(&candidates, TieBreak::SeededRandom, &mut rng);
        let removed = g.remove_closed_neighborhood(node)?.len();
        set.push_unchecked(node);
        steps.push(Step {
            node,
            value: min as f64,
            key: None,
            candidates,
            removed,
        });
    }
    Ok(SolveTrace { nodes, steps, set })
}

struct Advisor<'a> {
    evaluator: &'a Evaluator,
    advice: Advice,
    seed: u64,
    noise: Option<NoiseRealization>,
}

impl Advisor<'_> {
    fn value(&self, cone: &LightCone) -> Result<(f64, CanonicalKey)> {
        let r = self.evaluator.evaluate(cone)?;
        let v = match self.advice {
            Advice::Ideal => r.value,
            Advice::Shots(m) => sample_shots(r.value, m, self.seed ^ fnv1a(r.key.as_bytes()))?,
            Advice::Noise(_) => {
                let noise = self.noise.as_ref().expect("noise realization");
                noise.apply(r.value, r.cone_size, &r.key)?
            }
        };
        Ok((v, r.key))
    }
}

/// Quantum-enhanced greedy search.
///
/// Every alive node gets the advice value of its depth-`p` light cone; the
/// node with the largest value joins the set and its closed neighborhood is
/// deleted. After a selection only surviving nodes within distance `p + 1`
/// of it are re-evaluated.
pub fn solve_quantum_greedy(g: &Graph, cfg: &SolverConfig, evaluator: &Evaluator) -> Result<SolveTrace> {
    cfg.validate()?;
    check_nonempty(g)?;
    if evaluator.angles() != &cfg.angles {
        return Err(Error::InvalidParameter("evaluator uses different angles".into()));
    }
    let p = cfg.depth;
    let advisor = Advisor {
        evaluator,
        advice: cfg.advice,
        // Shot draws use their own stream so that tie-breaking matches the
        // classical solver for equal seeds.
        seed: cfg.seed.rotate_left(17) ^ 0x5bd1_e995,
        noise: match cfg.advice {
            Advice::Noise(params) => Some(NoiseRealization::new(params)),
            _ => None,
        },
    };
    let mut g = g.clone();
    let nodes = g.alive_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut values: Vec<Option<(f64, CanonicalKey)>> = vec![None; g.node_count()];
    let alive: Vec<NodeId> = g.alive_nodes().collect();
    for v in alive {
        values[v] = Some(advisor.value(&extract_lightcone(&g, v, p)?)?);
    }

    let mut steps = Vec::new();
    let mut set = NodeSet::new();
    while g.alive_count() > 0 {
        let isolated = cfg
            .include_isolated
            .then(|| g.alive_nodes().find(|&v| g.degree(v) == 0))
            .flatten();
        let (node, candidates) = match isolated {
            Some(v) => (v, vec![v]),
            None => {
                let max = g
                    .alive_nodes()
                    .map(|v| values[v].as_ref().expect("value of alive node").0)
                    .fold(f64::NEG_INFINITY, f64::max);
                let candidates: Vec<NodeId> = g
                    .alive_nodes()
                    .filter(|&v| values[v].as_ref().expect("value of alive node").0 >= max - cfg.cutoff)
                    .collect();
                (pick(&candidates, cfg.tie_break, &mut rng), candidates)
            }
        };
        let (value, key) = values[node].clone().expect("value of chosen node");
        let stale = if cfg.full_recompute {
            None
        } else {
            Some(affected_nodes(&g, node, p)?)
        };
        let removed = g.remove_closed_neighborhood(node)?;
        for &v in removed.iter() {
            values[v] = None;
        }
        let refresh: Vec<NodeId> = match stale {
            Some(s) => s.iter().copied().filter(|&v| g.is_alive(v)).collect(),
            None => g.alive_nodes().collect(),
        };
        for v in refresh {
            values[v] = Some(advisor.value(&extract_lightcone(&g, v, p)?)?);
        }
        set.push_unchecked(node);
        steps.push(Step {
            node,
            value,
            key: Some(key),
            candidates,
            removed: removed.len(),
        });
    }
    Ok(SolveTrace { nodes, steps, set })
}

pub const DEFAULT_EXACT_LIMIT: usize = 40;

/// Maximum independent set of the alive subgraph by branch and bound.
pub fn solve_exact(g: &Graph, node_limit: usize) -> Result<NodeSet> {
    let ids: Vec<NodeId> = g.alive_nodes().collect();
    let limit = node_limit.min(64);
    if ids.len() > limit {
        return Err(Error::SizeLimitExceeded {
            nodes: ids.len(),
            limit,
        });
    }
    let mut local = vec![usize::MAX; g.node_count()];
    for (k, &v) in ids.iter().enumerate() {
        local[v] = k;
    }
    let adj: Vec<u64> = ids
        .iter()
        .map(|&v| g.neighbors(v).fold(0u64, |m, w| m | 1 << local[w]))
        .collect();
    let full = if ids.is_empty() { 0 } else { u64::MAX >> (64 - ids.len()) };
    let best = mis(&adj, full);
    let mut out: Vec<NodeId> = (0..ids.len()).filter(|&k| best >> k & 1 == 1).map(|k| ids[k]).collect();
    out.sort_unstable();
    NodeSet::from_vec(out)
}

fn bit(v: usize) -> u64 {
    1 << v
}

fn component(adj: &[u64], mask: u64) -> u64 {
    let mut comp = mask & mask.wrapping_neg();
    loop {
        let mut grown = comp;
        let mut rest = comp;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            grown |= adj[v] & mask;
        }
        if grown == comp {
            return comp;
        }
        comp = grown;
    }
}

fn mis(adj: &[u64], mask: u64) -> u64 {
    if mask == 0 {
        return 0;
    }
    let comp = component(adj, mask);
    if comp != mask {
        return mis(adj, comp) | mis(adj, mask & !comp);
    }
    let mut rest = mask;
    let mut branch = (0, 0);
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let deg = (adj[v] & mask).count_ones();
        // A node of degree at most one always belongs to some maximum set.
        if deg <= 1 {
            return bit(v) | mis(adj, mask & !(bit(v) | adj[v]));
        }
        if deg > branch.1 {
            branch = (v, deg);
        }
    }
    let v = branch.0;
    let with = bit(v) | mis(adj, mask & !(bit(v) | adj[v]));
    // Excluding v leaves at most |mask| - 1 nodes.
    if with.count_ones() + 1 >= mask.count_ones() {
        return with;
    }
    let without = mis(adj, mask & !bit(v));
    if without.count_ones() > with.count_ones() {
        without
    } else {
        with
    }
}

/// Worst-case approximation ratio of minimum-degree greedy on graphs of
/// maximum degree `d`.
pub fn worst_case_bound(d: usize) -> f64 {
    3.0 / (d as f64 + 2.0)
}

/// Smallest nonzero change of the root value of the depth-`p` tree cone
/// under a single-edge perturbation: dropping one leaf edge, or merging two
/// leaves with different parents into one node.
pub fn default_cutoff(angles: &AngleSchedule) -> Result<f64> {
    let (p, d) = (angles.depth(), angles.degree());
    let tree = LightCone::regular_tree(p, d);
    let value = |c: &LightCone| -> Result<f64> {
        expectation_contract(&build_circuit(c, angles, true)?, DEFAULT_MEMORY_BUDGET)
    };
    let base = value(&tree)?;
    let dist = tree.distances().to_vec();
    let edges = tree.edges().to_vec();
    let parent = |leaf: usize| {
        edges
            .iter()
            .find_map(|&(a, b)| (b == leaf).then_some(a).or((a == leaf).then_some(b)))
            .expect("leaf has a parent")
    };
    let leaves: Vec<usize> = (0..dist.len()).filter(|&v| dist[v] == p).collect();
    let mut variants: Vec<LightCone> = Vec::new();
    // Drop node `gone`, rewiring its edge to `keep` when given.
    let rebuild = |gone: usize, keep: Option<usize>| -> Result<LightCone> {
        let shift = |v: usize| if v > gone { v - 1 } else { v };
        let mut dd = dist.clone();
        dd.remove(gone);
        let mut ee = Vec::new();
        for &(a, b) in &edges {
            let (a, b) = match (a == gone, b == gone, keep) {
                (false, false, _) => (a, b),
                (_, _, None) => continue,
                (true, _, Some(k)) => (k, b),
                (_, true, Some(k)) => (a, k),
            };
            ee.push((shift(a), shift(b)));
        }
        LightCone::from_parts(p, dd, ee)
    };
    if let Some(&leaf) = leaves.first() {
        variants.push(rebuild(leaf, None)?);
    }
    for (i, &a) in leaves.iter().enumerate() {
        for &b in &leaves[i + 1..] {
            if parent(a) != parent(b) {
                variants.push(rebuild(b, Some(a))?);
            }
        }
    }
    let mut keyed: Vec<(CanonicalKey, LightCone)> = variants.into_iter().map(|c| (canonical_key(&c), c)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let mut best = f64::INFINITY;
    for (_, c) in &keyed {
        let delta = (value(c)? - base).abs();
        if delta > 1e-12 {
            best = best.min(delta);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Degenerate("no single-edge change moves the root value".into()))
    }
}
