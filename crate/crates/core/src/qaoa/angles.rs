//! Tree-angle optimization.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_circuit, circuit_from_structure, expectation_contract, AngleSchedule, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};
use crate::graph::IsingParams;
use crate::lightcone::LightCone;

const DEFAULT_FILES: [&str; 4] = [
    include_str!("../../angles/d3_lambda1_p1.txt"),
    include_str!("../../angles/d3_lambda1_p2.txt"),
    include_str!("../../angles/d3_lambda1_p3.txt"),
    include_str!("../../angles/d3_lambda1_p4.txt"),
];

/// Shipped tree angles for `d = 3`, `lambda = 1`, depths 1 to 4.
pub fn default_angles(p: usize) -> Result<AngleSchedule> {
    let text = p
        .checked_sub(1)
        .and_then(|i| DEFAULT_FILES.get(i))
        .ok_or_else(|| Error::InvalidParameter(format!("no shipped angles for depth {p}")))?;
    text.parse()
}

/// Depth-`p` cone around one edge of the `d`-regular tree: roots 0 and 1,
/// each with `d - 1` further branches.
pub fn edge_tree_cone(p: usize, d: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut dist = vec![0, 0];
    let mut edges = vec![(0, 1)];
    let mut frontier = vec![0, 1];
    for k in 1..=p {
        let mut next = Vec::new();
        for &u in &frontier {
            for _ in 0..d.saturating_sub(1) {
                let v = dist.len();
                dist.push(k);
                edges.push((u, v));
                next.push(v);
            }
        }
        frontier = next;
    }
    (dist, edges)
}

/// Energy per node of the MIS cost Hamiltonian on the infinite `d`-regular
/// tree: `(d/2) J <Z_u Z_v> + h <Z> + c`.
pub fn tree_energy(angles: &AngleSchedule) -> Result<f64> {
    let (p, d) = (angles.depth(), angles.degree());
    let ising = IsingParams::new(angles.lambda())?;
    let vertex = build_circuit(&LightCone::regular_tree(p, d), angles, true)?;
    let z = expectation_contract(&vertex, DEFAULT_MEMORY_BUDGET)?;
    let (dist, edges) = edge_tree_cone(p, d);
    let edge = circuit_from_structure(&dist, &edges, &[0, 1], angles, true);
    let zz = expectation_contract(&edge, DEFAULT_MEMORY_BUDGET)?;
    Ok(d as f64 / 2.0 * ising.coupling() * zz + ising.field(d) * z + ising.offset(d))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerSettings {
    /// Random starts per depth, on top of the zero-padded previous optimum.
    pub restarts: usize,
    pub seed: u64,
    /// Function evaluations per simplex run.
    pub max_evals: usize,
    /// Stop a simplex run once its values spread less than this.
    pub tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 8,
            seed: 1,
            max_evals: 3000,
            tolerance: 1e-13,
        }
    }
}

/// Minimizes [`tree_energy`] over `2p` angles by Nelder-Mead from seeded
/// random starts in `[-pi/2, pi/2]` plus the depth-`p-1` optimum padded
/// with zeros. The result has `gamma_1 >= 0` and records its energy and
/// the settings used.
pub fn optimize_tree_angles(p: usize, d: usize, lambda: f64, settings: &OptimizerSettings) -> Result<AngleSchedule> {
    if p == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    IsingParams::new(lambda)?;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if p > 1 {
        let prev = optimize_tree_angles(p - 1, d, lambda, settings)?;
        let mut x = prev.gammas().to_vec();
        x.push(0.0);
        x.extend_from_slice(prev.betas());
        x.push(0.0);
        starts.push(x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ (p as u64) << 32);
    for _ in 0..settings.restarts {
        starts.push((0..2 * p).map(|_| rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)).collect());
    }

    let objective = |x: &[f64]| -> f64 {
        AngleSchedule::new(p, d, lambda, x[..p].to_vec(), x[p..].to_vec())
            .and_then(|a| tree_energy(&a))
            .unwrap_or(f64::INFINITY)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in starts {
        let (mut x, mut fx) = nelder_mead(&objective, &x0, 0.1, settings.max_evals, settings.tolerance);
        // Restart the simplex around its own optimum until it stops moving.
        for _ in 0..4 {
            let (y, fy) = nelder_mead(&objective, &x, 0.02, settings.max_evals, settings.tolerance);
            let done = fx - fy < settings.tolerance;
            if fy < fx {
                (x, fx) = (y, fy);
            }
            if done {
                break;
            }
        }
        if best.as_ref().map_or(true, |(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (mut x, energy) = best.expect("at least one start");
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(AngleSchedule::new(p, d, lambda, x[..p].to_vec(), x[p..].to_vec())?
        .with_energy(energy)
        .with_notes(vec![format!(
            "nelder-mead restarts={} seed={} max_evals={} tolerance={:e}",
            settings.restarts, settings.seed, settings.max_evals, settings.tolerance
        )]))
}

/// Plain Nelder-Mead with standard coefficients.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize, tol: f64) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let along = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 < tol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let xr = along(&centroid, &worst, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(&centroid, &worst, -2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = along(&centroid, &xr, 0.5);
                let fx = f(&x);
                (x, fx)
            } else {
                let x = along(&centroid, &worst, 0.5);
                let fx = f(&x);
                (x, fx)
            };
            evals += 1;
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    *x = along(&best, x, 0.5);
                    *fx = f(x);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
