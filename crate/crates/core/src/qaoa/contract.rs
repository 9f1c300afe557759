//! Tensor-network evaluation of cone circuits.
//!
//! Cost and mixer layers are unrolled into a sum over computational-basis
//! paths. A qubit with `m` mixer rotations changes basis state `m` times on
//! the ket side and `m` times on the bra side, and both sides meet at the
//! measurement, so its whole history is one index of dimension `2^(2m+1)`.
//! Each qubit then owns a vertex tensor (initial overlap, mixer elements,
//! field phases, observable sign) and each coupled pair an edge matrix. The
//! network has the cone's own topology, so tree cones contract leaf to root
//! with intermediates no wider than one edge matrix.
//!
//! With pruned circuits, a qubit at distance `k` carries `p - k` mixers and
//! the index dimension shrinks towards the boundary of the cone.

use std::collections::BTreeSet;

use num_complex::Complex64;

use super::circuit::{ConeCircuit, Gate};
use crate::error::{Error, Result};

/// Default cap on the number of complex entries of any intermediate tensor.
pub const DEFAULT_MEMORY_BUDGET: u128 = 1 << 25;

#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<usize>,
    data: Vec<Complex64>,
}

/// Basis-path layout of one qubit: mixer layers and the gates that read
/// each segment.
struct QubitPath {
    mixers: Vec<(usize, f64)>,
}

impl QubitPath {
    fn segments(&self) -> usize {
        self.mixers.len()
    }

    fn dim(&self) -> usize {
        1 << (2 * self.segments() + 1)
    }

    /// Segment index seen by cost gates of `layer`.
    fn segment_at(&self, layer: usize) -> usize {
        self.mixers.iter().filter(|&&(l, _)| l < layer).count()
    }

    /// Spin (+1/-1) of the ket and bra copies of segment `t` in path `x`.
    fn spins(&self, x: usize, t: usize) -> (f64, f64) {
        let m = self.segments();
        let spin = |bit: usize| if x >> bit & 1 == 0 { 1.0 } else { -1.0 };
        let ket = spin(t);
        let bra = if t == m { ket } else { spin(m + 1 + t) };
        (ket, bra)
    }
}

/// Exact `<Z...Z>` of the observable by variable elimination.
///
/// Elimination order is greedy: always remove the qubit whose elimination
/// creates the smallest intermediate, ties broken by lowest qubit index.
/// Fails before any numerics if some intermediate would exceed `budget`
/// entries.
pub fn expectation_contract(circ: &ConeCircuit, budget: u128) -> Result<f64> {
    let n = circ.qubits();
    let mut paths: Vec<QubitPath> = (0..n).map(|_| QubitPath { mixers: Vec::new() }).collect();
    for (l, layer) in circ.layers().iter().enumerate() {
        for g in layer {
            if let Gate::X { q, theta } = *g {
                paths[q].mixers.push((l, theta));
            }
        }
    }
    let dims: Vec<usize> = paths.iter().map(QubitPath::dim).collect();

    let mut factors: Vec<Factor> = (0..n).map(|q| vertex_factor(circ, q, &paths[q])).collect();
    let mut pairs: Vec<((usize, usize), Vec<(usize, f64)>)> = Vec::new();
    for (l, layer) in circ.layers().iter().enumerate() {
        for g in layer {
            if let Gate::Zz { a, b, theta } = *g {
                let key = (a.min(b), a.max(b));
                match pairs.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.push((l, theta)),
                    None => pairs.push((key, vec![(l, theta)])),
                }
            }
        }
    }
    for ((a, b), gates) in &pairs {
        factors.push(edge_factor(*a, *b, gates, &paths));
    }

    let order = plan(n, &factors, &dims, budget)?;
    let mut scalar = Complex64::new(1.0, 0.0);
    for x in order {
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&x));
        factors = without;
        let merged = eliminate(x, &with, &dims);
        if merged.vars.is_empty() {
            scalar *= merged.data[0];
        } else {
            factors.push(merged);
        }
    }
    for f in &factors {
        debug_assert!(f.vars.is_empty());
        scalar *= f.data[0];
    }
    Ok(scalar.re)
}

fn vertex_factor(circ: &ConeCircuit, q: usize, path: &QubitPath) -> Factor {
    let m = path.segments();
    let observed = circ.observable().contains(&q);
    let mut fields: Vec<(usize, f64)> = Vec::new();
    for (l, layer) in circ.layers().iter().enumerate() {
        for g in layer {
            if let Gate::Z { q: t, theta } = *g {
                if t == q {
                    fields.push((path.segment_at(l), theta));
                }
            }
        }
    }
    let data = (0..path.dim())
        .map(|x| {
            // |<0|+>|^2 on ket and bra.
            let mut v = Complex64::new(0.5, 0.0);
            for (k, &(_, theta)) in path.mixers.iter().enumerate() {
                let t = k + 1;
                let (kin, bin) = path.spins(x, t - 1);
                let (kout, bout) = path.spins(x, t);
                v *= rx_element(kout == kin, theta);
                v *= rx_element(bout == bin, theta).conj();
            }
            let mut angle = 0.0;
            for &(seg, theta) in &fields {
                let (k, b) = path.spins(x, seg);
                angle += theta * (b - k);
            }
            v *= Complex64::from_polar(1.0, angle);
            if observed {
                v *= path.spins(x, m).0;
            }
            v
        })
        .collect();
    Factor { vars: vec![q], data }
}

fn edge_factor(a: usize, b: usize, gates: &[(usize, f64)], paths: &[QubitPath]) -> Factor {
    let (pa, pb) = (&paths[a], &paths[b]);
    let segs: Vec<(usize, usize, f64)> = gates
        .iter()
        .map(|&(l, th)| (pa.segment_at(l), pb.segment_at(l), th))
        .collect();
    let (da, db) = (pa.dim(), pb.dim());
    let mut data = Vec::with_capacity(da * db);
    for xa in 0..da {
        for xb in 0..db {
            let mut angle = 0.0;
            for &(sa, sb, th) in &segs {
                let (ka, ba) = pa.spins(xa, sa);
                let (kb, bb) = pb.spins(xb, sb);
                angle += th * (ba * bb - ka * kb);
            }
            data.push(Complex64::from_polar(1.0, angle));
        }
    }
    Factor { vars: vec![a, b], data }
}

/// `<out| exp(-i theta X) |in>`.
fn rx_element(same: bool, theta: f64) -> Complex64 {
    if same {
        Complex64::new(theta.cos(), 0.0)
    } else {
        Complex64::new(0.0, -theta.sin())
    }
}

/// Greedy elimination order with an up-front memory check.
fn plan(n: usize, factors: &[Factor], dims: &[usize], budget: u128) -> Result<Vec<usize>> {
    let mut scopes: Vec<BTreeSet<usize>> = factors.iter().map(|f| f.vars.iter().copied().collect()).collect();
    let mut remaining: BTreeSet<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let mut best: Option<(u128, usize, BTreeSet<usize>)> = None;
        for &x in &remaining {
            let mut union = BTreeSet::new();
            for s in scopes.iter().filter(|s| s.contains(&x)) {
                union.extend(s.iter().copied());
            }
            let size: u128 = union.iter().map(|&v| dims[v] as u128).product();
            if best.as_ref().map_or(true, |(b, _, _)| size < *b) {
                best = Some((size, x, union));
            }
        }
        let (size, x, mut union) = best.expect("remaining is nonempty");
        if size > budget {
            return Err(Error::MemoryBudgetExceeded {
                elements: size,
                budget,
                width: union.len(),
            });
        }
        scopes.retain(|s| !s.contains(&x));
        union.remove(&x);
        scopes.push(union);
        remaining.remove(&x);
        order.push(x);
    }
    Ok(order)
}

/// Multiplies every factor in `with` and sums out variable `x`.
fn eliminate(x: usize, with: &[Factor], dims: &[usize]) -> Factor {
    let mut union: Vec<usize> = with.iter().flat_map(|f| f.vars.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    let out_vars: Vec<usize> = union.iter().copied().filter(|&v| v != x).collect();
    let out_size: usize = out_vars.iter().map(|&v| dims[v]).product();

    // Strides of every factor, and of the output, over the union digits.
    let stride_in = |vars: &[usize]| -> Vec<usize> {
        let mut strides = vec![0; union.len()];
        let mut s = 1;
        for &v in vars.iter().rev() {
            let pos = union.iter().position(|&u| u == v).unwrap();
            strides[pos] = s;
            s *= dims[v];
        }
        strides
    };
    let factor_strides: Vec<Vec<usize>> = with.iter().map(|f| stride_in(&f.vars)).collect();
    let out_strides = stride_in(&out_vars);
    let radix: Vec<usize> = union.iter().map(|&v| dims[v]).collect();

    let mut out = vec![Complex64::new(0.0, 0.0); out_size];
    let mut digits = vec![0usize; union.len()];
    let mut idx = vec![0usize; with.len()];
    let mut oidx = 0usize;
    let total: usize = radix.iter().product();
    for _ in 0..total {
        let mut v = Complex64::new(1.0, 0.0);
        for (f, &i) in with.iter().zip(idx.iter()) {
            v *= f.data[i];
        }
        out[oidx] += v;
        // Odometer increment, last digit fastest.
        for pos in (0..union.len()).rev() {
            digits[pos] += 1;
            for (k, s) in factor_strides.iter().enumerate() {
                idx[k] += s[pos];
            }
            oidx += out_strides[pos];
            if digits[pos] < radix[pos] {
                break;
            }
            for (k, s) in factor_strides.iter().enumerate() {
                idx[k] -= s[pos] * radix[pos];
            }
            oidx -= out_strides[pos] * radix[pos];
            digits[pos] = 0;
        }
    }
    Factor { vars: out_vars, data: out }
}
