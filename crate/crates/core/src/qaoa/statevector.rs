//! Dense statevector simulation of cone circuits.

use num_complex::Complex64;

use super::circuit::{ConeCircuit, Gate};
use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Exact `<Z...Z>` on the observable qubits, starting from `|+>^n`.
pub fn expectation_statevector(circ: &ConeCircuit, cap: usize) -> Result<f64> {
    let n = circ.qubits();
    if n > cap {
        return Err(Error::QubitCapExceeded { qubits: n, cap });
    }
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    let mut state = vec![Complex64::new(amp, 0.0); dim];
    let mut phase = vec![0.0f64; dim];
    let mut partial = vec![0.0f64; dim];

    for layer in circ.layers() {
        diagonal_phase(n, layer, &mut phase, &mut partial);
        for (a, &th) in state.iter_mut().zip(phase.iter()) {
            *a *= Complex64::from_polar(1.0, -th);
        }
        for g in layer {
            if let Gate::X { q, theta } = *g {
                apply_rx(&mut state, q, theta);
            }
        }
    }

    let mask: usize = circ.observable().iter().map(|&q| 1usize << q).sum();
    let mut acc = 0.0;
    for (x, a) in state.iter().enumerate() {
        let sign = if (x & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * a.norm_sqr();
    }
    Ok(acc)
}

/// Fills `phase[x]` with the total diagonal angle of `layer` on basis
/// state `x` (bit `q` set means `Z_q = -1`), adding one qubit at a time.
fn diagonal_phase(n: usize, layer: &[Gate], phase: &mut [f64], partial: &mut [f64]) {
    let mut field = vec![0.0; n];
    let mut lower: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for g in layer {
        match *g {
            Gate::Z { q, theta } => field[q] += theta,
            Gate::Zz { a, b, theta } => {
                let (lo, hi) = (a.min(b), a.max(b));
                lower[hi].push((lo, theta));
            }
            Gate::X { .. } => {}
        }
    }
    phase[0] = 0.0;
    for t in 0..n {
        let half = 1usize << t;
        // partial[x] = coefficient multiplying s_t, for x over bits < t.
        for x in 0..half {
            let mut c = field[t];
            for &(a, th) in &lower[t] {
                c += if x >> a & 1 == 0 { th } else { -th };
            }
            partial[x] = c;
        }
        for x in 0..half {
            let base = phase[x];
            phase[x] = base + partial[x];
            phase[x | half] = base - partial[x];
        }
    }
}

fn apply_rx(state: &mut [Complex64], q: usize, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let mis = Complex64::new(0.0, -s);
    let stride = 1usize << q;
    for block in state.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x * c + y * mis;
            *b = x * mis + y * c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lightcone::LightCone;
    use crate::qaoa::{build_circuit, AngleSchedule};

    #[test]
    fn zero_angles_give_zero() {
        let cone = LightCone::regular_tree(2, 3);
        let a = AngleSchedule::new(2, 3, 1.0, vec![0.0; 2], vec![0.0; 2]).unwrap();
        let c = build_circuit(&cone, &a, false).unwrap();
        assert!(expectation_statevector(&c, 24).unwrap().abs() < 1e-14);
    }

    #[test]
    fn diagonal_only_gives_zero() {
        let cone = LightCone::regular_tree(2, 3);
        let a = AngleSchedule::new(2, 3, 1.0, vec![0.7, -1.1], vec![0.0; 2]).unwrap();
        let c = build_circuit(&cone, &a, false).unwrap();
        assert!(expectation_statevector(&c, 24).unwrap().abs() < 1e-14);
    }

    #[test]
    fn single_qubit_closed_form() {
        // Field -1/2, no neighbors: <Z> = sin(2b) sin(-g).
        let cone = LightCone::from_parts(1, vec![0], vec![]).unwrap();
        let (g, b) = (0.37, -0.81);
        let a = AngleSchedule::new(1, 3, 1.0, vec![g], vec![b]).unwrap();
        let c = build_circuit(&cone, &a, false).unwrap();
        let want = (2.0 * b).sin() * (-g).sin();
        assert!((expectation_statevector(&c, 24).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn cap_enforced() {
        let cone = LightCone::regular_tree(2, 3);
        let a = AngleSchedule::new(2, 3, 1.0, vec![0.1; 2], vec![0.1; 2]).unwrap();
        let c = build_circuit(&cone, &a, false).unwrap();
        assert!(matches!(
            expectation_statevector(&c, 8),
            Err(Error::QubitCapExceeded { qubits: 10, cap: 8 })
        ));
    }
}
