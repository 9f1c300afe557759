//! Ensemble experiments over instance sizes, solvers and depths.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};
use qgreedy_core::graph::Graph;
use qgreedy_core::noise::NoiseParams;
use qgreedy_core::qaoa::{default_angles, AngleSchedule, Evaluator, ExpectationCache};
use qgreedy_core::solver::{default_cutoff, solve_classical_greedy, solve_quantum_greedy, Advice, SolverConfig};
use rayon::prelude::*;

/// Best known asymptotic independence ratio of random cubic graphs.
pub const R_INF: f64 = 0.445330;

/// Asymptotic ratio of minimum-degree greedy on random cubic graphs.
pub fn greedy_asymptote() -> f64 {
    6.0 * 1.5f64.ln() - 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Greedy,
    QGreedy,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::QGreedy => "qgreedy",
        }
    }
}

impl FromStr for SolverKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(SolverKind::Greedy),
            "qgreedy" => Ok(SolverKind::QGreedy),
            _ => bail!("unknown solver {s:?} (expected greedy or qgreedy)"),
        }
    }
}

/// Parses `ideal`, `shots:<M>` or `noise:<eta>,<alpha>,<sigma>[,<seed>]`.
pub fn parse_advice(s: &str) -> Result<Advice> {
    if s == "ideal" {
        return Ok(Advice::Ideal);
    }
    if let Some(m) = s.strip_prefix("shots:") {
        return Ok(Advice::Shots(m.trim().parse().context("shot count")?));
    }
    if let Some(rest) = s.strip_prefix("noise:") {
        let v: Vec<&str> = rest.split(',').map(str::trim).collect();
        if !(3..=4).contains(&v.len()) {
            bail!("noise advice needs eta,alpha,sigma[,seed]");
        }
        let seed = v.get(3).map_or(Ok(0), |x| x.parse()).context("noise seed")?;
        let params = NoiseParams::new(v[0].parse()?, v[1].parse()?, v[2].parse()?, seed)?;
        return Ok(Advice::Noise(params));
    }
    bail!("unknown advice {s:?}")
}

/// Angle schedule for `(p, d, lambda)`: from `dir` when given, otherwise the
/// shipped cubic defaults at `lambda = 1`.
pub fn load_angles(dir: Option<&Path>, p: usize, d: usize, lambda: f64) -> Result<AngleSchedule> {
    match dir {
        Some(dir) => {
            let path = dir.join(angle_file_name(p, d, lambda));
            AngleSchedule::read(&path).with_context(|| format!("missing angle file {}", path.display()))
        }
        None if d == 3 && lambda == 1.0 => Ok(default_angles(p)?),
        None => bail!("no shipped angles for d={d} lambda={lambda}; pass an angle directory"),
    }
}

pub fn angle_file_name(p: usize, d: usize, lambda: f64) -> String {
    format!("d{d}_lambda{lambda}_p{p}.txt")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub sizes: Vec<usize>,
    pub instances: usize,
    pub depths: Vec<usize>,
    pub solvers: Vec<SolverKind>,
    pub degree: usize,
    pub lambda: f64,
    pub advice: Advice,
    /// `None` picks zero for ideal advice and the tree cutoff otherwise.
    pub cutoff: Option<f64>,
    pub seed: u64,
    pub output: PathBuf,
    pub angles_dir: Option<PathBuf>,
    pub timestamp: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            sizes: vec![50, 100, 200, 500],
            instances: 100,
            depths: vec![1, 2, 3],
            solvers: vec![SolverKind::Greedy, SolverKind::QGreedy],
            degree: 3,
            lambda: 1.0,
            advice: Advice::Ideal,
            cutoff: None,
            seed: 0,
            output: PathBuf::from("results.csv"),
            angles_dir: None,
            timestamp: true,
        }
    }
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("{s:?}: {e}")))
        .collect()
}

impl FromStr for ExperimentPlan {
    type Err = anyhow::Error;

    /// Line-oriented `key = value`; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut plan = ExperimentPlan::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key = value", i + 1))?;
            let v = v.trim();
            let ctx = || format!("line {}: bad value for {}", i + 1, k.trim());
            match k.trim() {
                "sizes" => plan.sizes = list(v).with_context(ctx)?,
                "instances" => plan.instances = v.parse().with_context(ctx)?,
                "depths" => plan.depths = list(v).with_context(ctx)?,
                "solvers" => plan.solvers = list(v).with_context(ctx)?,
                "degree" => plan.degree = v.parse().with_context(ctx)?,
                "lambda" => plan.lambda = v.parse().with_context(ctx)?,
                "advice" => plan.advice = parse_advice(v).with_context(ctx)?,
                "cutoff" => plan.cutoff = if v == "auto" { None } else { Some(v.parse().with_context(ctx)?) },
                "seed" => plan.seed = v.parse().with_context(ctx)?,
                "output" => plan.output = PathBuf::from(v),
                "angles_dir" => plan.angles_dir = Some(PathBuf::from(v)),
                "timestamp" => plan.timestamp = v.parse().with_context(ctx)?,
                other => bail!("line {}: unknown key {other:?}", i + 1),
            }
        }
        plan.validate()?;
        Ok(plan)
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            bail!("sizes must be a nonempty list of positive integers");
        }
        if self.instances == 0 {
            bail!("instances must be at least 1");
        }
        if self.solvers.is_empty() {
            bail!("no solvers");
        }
        if self.solvers.contains(&SolverKind::QGreedy) && (self.depths.is_empty() || self.depths.contains(&0)) {
            bail!("qgreedy needs a nonempty list of positive depths");
        }
        Ok(())
    }

    /// Every `(solver, depth)` column; the classical solver has depth 0.
    pub fn cells(&self) -> Vec<(SolverKind, usize)> {
        let mut cells = Vec::new();
        for &s in &self.solvers {
            match s {
                SolverKind::Greedy => cells.push((s, 0)),
                SolverKind::QGreedy => cells.extend(self.depths.iter().map(|&p| (s, p))),
            }
        }
        cells
    }
}

/// Seed of instance `index` at `size`, shared by every solver and depth.
pub fn instance_seed(master: u64, size: usize, index: usize) -> u64 {
    let mut x = master;
    for word in [size as u64, index as u64] {
        x = splitmix(x ^ splitmix(word));
    }
    x
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn instance(plan: &ExperimentPlan, size: usize, index: usize) -> Result<Graph> {
    Ok(Graph::generate_regular(size, plan.degree, instance_seed(plan.seed, size, index))?)
}

/// Aggregated ratios of one `(size, solver, depth)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub size: usize,
    pub solver: SolverKind,
    pub depth: usize,
    /// Independence ratio per instance index.
    pub ratios: Vec<f64>,
}

impl CellResult {
    pub fn mean(&self) -> f64 {
        self.ratios.iter().sum::<f64>() / self.ratios.len() as f64
    }

    /// Sample standard deviation over the square root of the count.
    pub fn sem(&self) -> f64 {
        sem(&self.ratios)
    }
}

pub fn sem(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub cells: Vec<CellResult>,
    pub lambda: f64,
    pub advice: Advice,
    pub seed: u64,
}

impl BenchmarkReport {
    pub fn cell(&self, size: usize, solver: SolverKind, depth: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.size == size && c.solver == solver && c.depth == depth)
    }

    pub fn to_csv(&self, timestamp: bool) -> String {
        let mut out = String::new();
        if timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            writeln!(out, "# generated_unix {secs}").unwrap();
        }
        writeln!(out, "# r_inf {R_INF:.6}").unwrap();
        writeln!(out, "# greedy_asymptote {:.6}", greedy_asymptote()).unwrap();
        out.push_str("size,solver,depth,instances,mean_r,sem,3sem,lambda,advice,seed\n");
        for c in &self.cells {
            let advice = match c.solver {
                SolverKind::Greedy => "none".to_string(),
                SolverKind::QGreedy => self.advice.to_string(),
            };
            let s = c.sem();
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6},{},{},{}",
                c.size,
                c.solver.name(),
                c.depth,
                c.ratios.len(),
                c.mean(),
                s,
                3.0 * s,
                self.lambda,
                advice,
                self.seed
            )
            .unwrap();
        }
        out
    }
}

type CellKey = (usize, SolverKind, usize, usize);

fn partial_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Reads per-instance results of an interrupted run.
fn read_partial(path: &Path) -> Result<BTreeMap<CellKey, f64>> {
    let mut done = BTreeMap::new();
    let Ok(text) = fs::read_to_string(path) else {
        return Ok(done);
    };
    for line in text.lines() {
        let w: Vec<&str> = line.split_whitespace().collect();
        // A torn final line from an interrupted write is ignored.
        if w.len() != 5 {
            continue;
        }
        let (Ok(size), Ok(solver), Ok(depth), Ok(index), Ok(r)) =
            (w[0].parse(), w[1].parse(), w[2].parse(), w[3].parse(), w[4].parse())
        else {
            continue;
        };
        done.insert((size, solver, depth, index), r);
    }
    Ok(done)
}

/// Runs every solver on every instance and writes the CSV to
/// `plan.output`.
///
/// Per-instance results are appended to `<output>.partial` as they finish;
/// a rerun with the same plan skips instances already recorded there. The
/// partial file is removed once the CSV is written.
pub fn run_plan(plan: &ExperimentPlan) -> Result<BenchmarkReport> {
    plan.validate()?;
    let cells = plan.cells();
    let mut evaluators: BTreeMap<usize, (Evaluator, f64)> = BTreeMap::new();
    if plan.solvers.contains(&SolverKind::QGreedy) {
        for &p in &plan.depths {
            let angles = load_angles(plan.angles_dir.as_deref(), p, plan.degree, plan.lambda)?;
            let cutoff = match (plan.cutoff, plan.advice) {
                (Some(c), _) => c,
                (None, Advice::Ideal) => 0.0,
                (None, _) => default_cutoff(&angles)?,
            };
            let cache = Arc::new(ExpectationCache::new(&angles));
            if let Some(path) = ExpectationCache::env_path(&angles) {
                if path.exists() {
                    cache.load(&path)?;
                }
            }
            evaluators.insert(p, (Evaluator::new(angles).with_cache(cache)?, cutoff));
        }
    }

    let partial = partial_path(&plan.output);
    let mut done = read_partial(&partial)?;
    let sink = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&partial)
            .with_context(|| format!("opening {}", partial.display()))?,
    );

    let jobs: Vec<(usize, usize)> = plan
        .sizes
        .iter()
        .flat_map(|&n| (0..plan.instances).map(move |i| (n, i)))
        .filter(|&(n, i)| !cells.iter().all(|&(s, p)| done.contains_key(&(n, s, p, i))))
        .collect();
    let fresh: Vec<Vec<(CellKey, f64)>> = jobs
        .par_iter()
        .map(|&(n, i)| -> Result<Vec<(CellKey, f64)>> {
            let g = instance(plan, n, i)?;
            let seed = instance_seed(plan.seed, n, i);
            let mut rows = Vec::new();
            for &(solver, p) in &cells {
                let trace = match solver {
                    SolverKind::Greedy => solve_classical_greedy(&g, seed)?,
                    SolverKind::QGreedy => {
                        let (ev, cutoff) = &evaluators[&p];
                        let cfg = SolverConfig::new(ev.angles().clone())
                            .with_seed(seed)
                            .with_cutoff(*cutoff)
                            .with_advice(plan.advice);
                        solve_quantum_greedy(&g, &cfg, ev)?
                    }
                };
                if !g.is_independent(trace.set()) {
                    bail!("{} returned a dependent set on instance {n}/{i}", solver.name());
                }
                rows.push(((n, solver, p, i), trace.ratio()));
            }
            let mut text = String::new();
            for ((n, s, p, i), r) in &rows {
                writeln!(text, "{n} {} {p} {i} {r:.17e}", s.name()).unwrap();
            }
            let mut f = sink.lock().expect("partial file lock");
            f.write_all(text.as_bytes())?;
            f.flush()?;
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    done.extend(fresh.into_iter().flatten());

    let mut report = BenchmarkReport {
        cells: Vec::new(),
        lambda: plan.lambda,
        advice: plan.advice,
        seed: plan.seed,
    };
    for &n in &plan.sizes {
        for &(s, p) in &cells {
            let ratios = (0..plan.instances)
                .map(|i| done.get(&(n, s, p, i)).copied().context("missing instance result"))
                .collect::<Result<Vec<f64>>>()?;
            report.cells.push(CellResult {
                size: n,
                solver: s,
                depth: p,
                ratios,
            });
        }
    }

    if let Some(parent) = plan.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&plan.output, report.to_csv(plan.timestamp))?;
    drop(sink);
    fs::remove_file(&partial).ok();
    for (ev, _) in evaluators.values() {
        if let Some(path) = ExpectationCache::env_path(ev.angles()) {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            ev.cache().save(&path)?;
        }
    }
    Ok(report)
}
