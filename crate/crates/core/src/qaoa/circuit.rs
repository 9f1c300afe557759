use crate::error::{Error, Result};
use crate::graph::IsingParams;
use crate::lightcone::LightCone;

use super::AngleSchedule;

/// One rotation. Every variant applies `exp(-i * theta * P)` for its Pauli
/// string `P`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Zz { a: usize, b: usize, theta: f64 },
    Z { q: usize, theta: f64 },
    X { q: usize, theta: f64 },
}

/// A depth-p QAOA circuit on the qubits of a light cone.
///
/// Layer `j` (0-based) holds the cost rotations for `gamma_{j+1}` followed
/// by the mixer rotations for `beta_{j+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeCircuit {
    qubits: usize,
    layers: Vec<Vec<Gate>>,
    observable: Vec<usize>,
    distances: Vec<usize>,
}

impl ConeCircuit {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    /// Qubits whose Pauli-Z product is measured (the root for a vertex cone).
    pub fn observable(&self) -> &[usize] {
        &self.observable
    }

    /// Distance of each qubit from the observed qubits.
    pub fn distances(&self) -> &[usize] {
        &self.distances
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    #[cfg(test)]
    pub(crate) fn clear_observable_for_test(&mut self) {
        self.observable.clear();
    }
}

/// QAOA circuit measuring `Z` on the root of `cone`.
///
/// Fields come from in-cone degrees. With `prune_layers`, layer `j` (0-based)
/// keeps only the rotations that can still reach the root: single-qubit gates
/// on vertices within distance `p - j - 1` and couplings with an endpoint
/// that close. The result is identical either way.
pub fn build_circuit(cone: &LightCone, angles: &AngleSchedule, prune_layers: bool) -> Result<ConeCircuit> {
    if cone.depth() != angles.depth() {
        return Err(Error::DepthMismatch {
            circuit: cone.depth(),
            angles: angles.depth(),
        });
    }
    Ok(circuit_from_structure(
        cone.distances(),
        cone.edges(),
        &[0],
        angles,
        prune_layers,
    ))
}

pub(crate) fn circuit_from_structure(
    dist: &[usize],
    edges: &[(usize, usize)],
    observable: &[usize],
    angles: &AngleSchedule,
    prune: bool,
) -> ConeCircuit {
    let n = dist.len();
    let p = angles.depth();
    let ising = IsingParams::new(angles.lambda()).expect("schedule lambda validated");
    let mut degree = vec![0usize; n];
    for &(u, v) in edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut sorted_edges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    sorted_edges.sort_unstable();

    let mut layers = Vec::with_capacity(p);
    for j in 0..p {
        let (gamma, beta) = (angles.gammas()[j], angles.betas()[j]);
        // Gates in layer j act only within this radius of the observable.
        let reach = p - j - 1;
        let keep = |d: usize| !prune || d <= reach;
        let mut gates = Vec::new();
        for &(a, b) in &sorted_edges {
            if keep(dist[a].min(dist[b])) {
                gates.push(Gate::Zz {
                    a,
                    b,
                    theta: ising.coupling() * gamma,
                });
            }
        }
        for q in 0..n {
            if keep(dist[q]) {
                gates.push(Gate::Z {
                    q,
                    theta: ising.field(degree[q]) * gamma,
                });
            }
        }
        for q in 0..n {
            if keep(dist[q]) {
                gates.push(Gate::X { q, theta: beta });
            }
        }
        layers.push(gates);
    }
    ConeCircuit {
        qubits: n,
        layers,
        observable: observable.to_vec(),
        distances: dist.to_vec(),
    }
}
