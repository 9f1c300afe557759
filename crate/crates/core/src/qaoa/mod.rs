//! Depth-p QAOA on light cones: circuit construction, three expectation
//! engines, tree-angle optimization and shot emulation.

mod analytic;
mod angles;
mod circuit;
mod contract;
mod shots;
mod statevector;

pub use analytic::{edge_correlation_p1_analytic, expectation_p1_analytic};
pub use angles::{
    default_angles, edge_tree_cone, optimize_tree_angles, tree_energy, OptimizerSettings,
};
pub use circuit::{build_circuit, ConeCircuit, Gate};
pub use contract::{expectation_contract, DEFAULT_MEMORY_BUDGET};
pub use shots::{sample_shots, sample_shots_with};
pub use statevector::{expectation_statevector, DEFAULT_QUBIT_CAP};

pub(crate) use circuit::circuit_from_structure;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::graph::IsingParams;
use crate::lightcone::{canonical_key, CanonicalKey, LightCone};

/// QAOA angles `gamma_1..gamma_p`, `beta_1..beta_p` for a degree-`d` tree.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSchedule {
    depth: usize,
    degree: usize,
    lambda: f64,
    gammas: Vec<f64>,
    betas: Vec<f64>,
    energy: Option<f64>,
    notes: Vec<String>,
}

impl AngleSchedule {
    pub fn new(depth: usize, degree: usize, lambda: f64, gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        for (name, v) in [("gamma", &gammas), ("beta", &betas)] {
            if v.len() != depth {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {} entries, depth is {depth}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite {name}")));
            }
        }
        IsingParams::new(lambda)?;
        Ok(AngleSchedule {
            depth,
            degree,
            lambda,
            gammas,
            betas,
            energy: None,
            notes: Vec::new(),
        })
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }

    /// Free-form lines written as `#` comments in the angle file.
    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Tree energy density recorded by the optimizer, if known.
    pub fn energy(&self) -> Option<f64> {
        self.energy
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Identifies the schedule for cache files: depth, lambda and the exact
    /// bit patterns of every angle.
    pub fn fingerprint(&self) -> String {
        let mut s = format!("p{}-l{:016x}", self.depth, self.lambda.to_bits());
        for x in self.gammas.iter().chain(&self.betas) {
            s.push_str(&format!("-{:016x}", x.to_bits()));
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        fs::read_to_string(path)?.parse()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string())?;
        Ok(())
    }
}

impl fmt::Display for AngleSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.notes {
            writeln!(f, "# {n}")?;
        }
        writeln!(f, "p={}", self.depth)?;
        writeln!(f, "d={}", self.degree)?;
        writeln!(f, "lambda={}", self.lambda)?;
        match self.energy {
            Some(e) => writeln!(f, "energy={e:.16e}")?,
            None => writeln!(f, "energy=nan")?,
        }
        for (name, v) in [("gamma", &self.gammas), ("beta", &self.betas)] {
            write!(f, "{name}")?;
            for x in v.iter() {
                write!(f, " {x:.16e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for AngleSchedule {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut depth = None;
        let mut degree = None;
        let mut lambda = None;
        let mut energy = None;
        let mut gammas = None;
        let mut betas = None;
        let mut notes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                notes.push(c.trim().to_string());
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                let v = v.trim();
                match k.trim() {
                    "p" => depth = Some(v.parse::<usize>().map_err(|e| err(e.to_string()))?),
                    "d" => degree = Some(v.parse::<usize>().map_err(|e| err(e.to_string()))?),
                    "lambda" => lambda = Some(v.parse::<f64>().map_err(|e| err(e.to_string()))?),
                    "energy" => {
                        let e = v.parse::<f64>().map_err(|e| err(e.to_string()))?;
                        energy = e.is_finite().then_some(e);
                    }
                    other => return Err(err(format!("unknown header {other:?}"))),
                }
                continue;
            }
            let mut words = line.split_whitespace();
            let name = words.next().unwrap_or_default();
            let values = words
                .map(|w| w.parse::<f64>().map_err(|e| err(e.to_string())))
                .collect::<Result<Vec<f64>>>()?;
            match name {
                "gamma" => gammas = Some(values),
                "beta" => betas = Some(values),
                other => return Err(err(format!("unexpected line {other:?}"))),
            }
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            msg: format!("missing {what}"),
        };
        let mut s = AngleSchedule::new(
            depth.ok_or_else(|| missing("p="))?,
            degree.ok_or_else(|| missing("d="))?,
            lambda.ok_or_else(|| missing("lambda="))?,
            gammas.ok_or_else(|| missing("gamma line"))?,
            betas.ok_or_else(|| missing("beta line"))?,
        )?;
        s.energy = energy;
        s.notes = notes;
        Ok(s)
    }
}

/// Simulation backend that produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Analytic,
    Statevector,
    Contraction,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Analytic => "analytic",
            Engine::Statevector => "statevector",
            Engine::Contraction => "contraction",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "statevector" => Ok(Engine::Statevector),
            "contraction" => Ok(Engine::Contraction),
            _ => Err(Error::InvalidParameter(format!("unknown engine {s:?}"))),
        }
    }
}

/// How an [`Evaluator`] picks its engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnginePolicy {
    /// Closed form at depth 1, statevector within the qubit cap, contraction
    /// beyond it.
    #[default]
    Auto,
    Statevector,
    Contraction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationRecord {
    pub key: CanonicalKey,
    pub value: f64,
    pub engine: Engine,
    pub cone_size: usize,
}

/// Thread-safe map from canonical cone key to `<Z_root>` for one angle
/// schedule.
#[derive(Debug)]
pub struct ExpectationCache {
    tag: String,
    map: RwLock<HashMap<CanonicalKey, ExpectationRecord>>,
}

impl ExpectationCache {
    pub fn new(angles: &AngleSchedule) -> Self {
        ExpectationCache {
            tag: angles.fingerprint(),
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<ExpectationRecord> {
        self.map.read().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, record: ExpectationRecord) {
        self.map.write().expect("cache lock").insert(record.key.clone(), record);
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records sorted by key.
    pub fn records(&self) -> Vec<ExpectationRecord> {
        let mut v: Vec<_> = self.map.read().expect("cache lock").values().cloned().collect();
        v.sort_by(|a, b| a.key.cmp(&b.key));
        v
    }

    /// Writes `schedule <tag>` followed by `key value engine size` lines.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = format!("schedule {}\n", self.tag);
        for r in self.records() {
            out.push_str(&format!("{} {:.17e} {} {}\n", r.key.to_hex(), r.value, r.engine, r.cone_size));
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Merges a saved cache. Fails if it was written for another schedule.
    pub fn load(&self, path: &Path) -> Result<usize> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or_default();
        if header.strip_prefix("schedule ") != Some(self.tag.as_str()) {
            return Err(Error::Parse {
                line: 1,
                msg: "cache belongs to a different angle schedule".into(),
            });
        }
        let mut count = 0;
        for (i, line) in lines {
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let w: Vec<&str> = line.split_whitespace().collect();
            if w.is_empty() {
                continue;
            }
            if w.len() != 4 {
                return Err(err("expected 4 fields".into()));
            }
            let record = ExpectationRecord {
                key: CanonicalKey::from_hex(w[0]).ok_or_else(|| err("bad cone key".into()))?,
                value: w[1].parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?,
                engine: w[2].parse()?,
                cone_size: w[3].parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
            };
            self.insert(record);
            count += 1;
        }
        Ok(count)
    }

    /// Cache file for `angles` under `$QGREEDY_CACHE_DIR`, if that is set.
    pub fn env_path(angles: &AngleSchedule) -> Option<PathBuf> {
        let dir = std::env::var_os("QGREEDY_CACHE_DIR")?;
        Some(PathBuf::from(dir).join(format!("zcache-{:016x}.txt", fnv1a(angles.fingerprint().as_bytes()))))
    }
}

/// 64-bit FNV-1a, stable across platforms and releases.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Computes and caches `<Z_root>` of light cones under one angle schedule.
#[derive(Clone, Debug)]
pub struct Evaluator {
    angles: AngleSchedule,
    policy: EnginePolicy,
    prune: bool,
    statevector_cap: usize,
    memory_budget: u128,
    cache: Arc<ExpectationCache>,
}

impl Evaluator {
    pub fn new(angles: AngleSchedule) -> Self {
        let cache = Arc::new(ExpectationCache::new(&angles));
        Evaluator {
            angles,
            policy: EnginePolicy::Auto,
            prune: true,
            statevector_cap: DEFAULT_QUBIT_CAP,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            cache,
        }
    }

    pub fn with_policy(mut self, policy: EnginePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_pruning(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    pub fn with_statevector_cap(mut self, cap: usize) -> Self {
        self.statevector_cap = cap;
        self
    }

    pub fn with_memory_budget(mut self, budget: u128) -> Self {
        self.memory_budget = budget;
        self
    }

    /// Shares `cache` with other evaluators of the same schedule.
    pub fn with_cache(mut self, cache: Arc<ExpectationCache>) -> Result<Self> {
        if cache.tag() != self.angles.fingerprint() {
            return Err(Error::InvalidParameter(
                "cache belongs to a different angle schedule".into(),
            ));
        }
        self.cache = cache;
        Ok(self)
    }

    pub fn angles(&self) -> &AngleSchedule {
        &self.angles
    }

    pub fn cache(&self) -> &Arc<ExpectationCache> {
        &self.cache
    }

    /// Cached `<Z_root>` of `cone`, computing it on a miss.
    pub fn evaluate(&self, cone: &LightCone) -> Result<ExpectationRecord> {
        let key = canonical_key(cone);
        if let Some(r) = self.cache.get(&key) {
            return Ok(r);
        }
        let (value, engine) = self.compute(cone)?;
        let record = ExpectationRecord {
            key,
            value,
            engine,
            cone_size: cone.size(),
        };
        self.cache.insert(record.clone());
        Ok(record)
    }

    /// `<Z_root>` of `cone` without touching the cache.
    pub fn compute(&self, cone: &LightCone) -> Result<(f64, Engine)> {
        let engine = match self.policy {
            EnginePolicy::Statevector => Engine::Statevector,
            EnginePolicy::Contraction => Engine::Contraction,
            EnginePolicy::Auto if self.angles.depth() == 1 => Engine::Analytic,
            EnginePolicy::Auto if cone.size() <= self.statevector_cap => Engine::Statevector,
            EnginePolicy::Auto => Engine::Contraction,
        };
        let value = match engine {
            Engine::Analytic => {
                if cone.depth() != 1 {
                    return Err(Error::DepthMismatch {
                        circuit: cone.depth(),
                        angles: self.angles.depth(),
                    });
                }
                let ising = IsingParams::new(self.angles.lambda())?;
                let d = cone.degrees()[0];
                expectation_p1_analytic(
                    d,
                    ising.field(d),
                    ising.coupling(),
                    self.angles.gammas()[0],
                    self.angles.betas()[0],
                )
            }
            Engine::Statevector => {
                let c = build_circuit(cone, &self.angles, self.prune)?;
                expectation_statevector(&c, self.statevector_cap)?
            }
            Engine::Contraction => {
                let c = build_circuit(cone, &self.angles, self.prune)?;
                expectation_contract(&c, self.memory_budget)?
            }
        };
        Ok((value.clamp(-1.0, 1.0), engine))
    }
}
