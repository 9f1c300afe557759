//! Checks against independent brute-force and closed-form oracles.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use qgreedy_core::graph::{Graph, IsingParams};
use qgreedy_core::lightcone::{canonical_key, enumerate_cones, extract_lightcone, LightCone};
use qgreedy_core::qaoa::{
    build_circuit, default_angles, edge_correlation_p1_analytic, expectation_contract, expectation_p1_analytic,
    expectation_statevector, tree_energy, AngleSchedule, DEFAULT_MEMORY_BUDGET,
};
use qgreedy_core::solver::solve_exact;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random graph with maximum degree 3 and some nodes deleted.
fn random_residual(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut g = Graph::new(n);
    for _ in 0..2 * n {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !g.has_edge(u, v) && g.degree(u) < 3 && g.degree(v) < 3 {
            g.add_edge(u, v).unwrap();
        }
    }
    if rng.gen_bool(0.5) {
        g.remove_closed_neighborhood(rng.gen_range(0..n)).unwrap();
    }
    g
}

fn random_small_cones(seed: u64, count: usize, max_size: usize) -> Vec<LightCone> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(4..14);
        let g = random_residual(&mut rng, n);
        let alive: Vec<usize> = g.alive_nodes().collect();
        if alive.is_empty() {
            continue;
        }
        let root = alive[rng.gen_range(0..alive.len())];
        let cone = extract_lightcone(&g, root, rng.gen_range(1..=2)).unwrap();
        if cone.size() <= max_size {
            out.push(cone);
        }
    }
    out
}

fn permutations_fixing_root(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut (1..n).collect(), &mut vec![0], &mut out);
    out
}

fn brute_isomorphic(a: &LightCone, b: &LightCone) -> bool {
    if a.depth() != b.depth() || a.size() != b.size() || a.edge_count() != b.edge_count() {
        return false;
    }
    let target: HashSet<(usize, usize)> = b.edges().iter().copied().collect();
    permutations_fixing_root(a.size()).into_iter().any(|perm| {
        a.edges().iter().all(|&(u, v)| {
            let (x, y) = (perm[u], perm[v]);
            target.contains(&(x.min(y), x.max(y)))
        })
    })
}

#[test]
fn canonical_keys_match_brute_force_isomorphism() {
    let cones = random_small_cones(7, 120, 7);
    let keys: Vec<_> = cones.iter().map(canonical_key).collect();
    for i in 0..cones.len() {
        for j in i..cones.len() {
            // Keys are per depth; every cache belongs to one schedule.
            if cones[i].depth() != cones[j].depth() {
                continue;
            }
            assert_eq!(
                keys[i] == keys[j],
                brute_isomorphic(&cones[i], &cones[j]),
                "cones {i} and {j}:\n{}\n{}",
                cones[i].dump(),
                cones[j].dump()
            );
        }
    }
}

fn brute_mis(g: &Graph) -> usize {
    let n = g.node_count();
    let edges = g.edges();
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|&(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

#[test]
fn exact_solver_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..150 {
        let n = rng.gen_range(1..=16);
        let mut g = Graph::new(n);
        let density = rng.gen_range(0.05..0.6);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(density) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        let s = solve_exact(&g, 40).unwrap();
        assert!(g.is_independent(&s));
        assert_eq!(s.len(), brute_mis(&g));
    }
}

fn p1_tree_energy_closed_form(gamma: f64, beta: f64) -> f64 {
    let ising = IsingParams::new(1.0).unwrap();
    let (j, h) = (ising.coupling(), ising.field(3));
    let z = expectation_p1_analytic(3, h, j, gamma, beta);
    let zz = edge_correlation_p1_analytic(3, 3, h, h, j, gamma, beta);
    1.5 * j * zz + h * z + ising.offset(3)
}

#[test]
fn p1_angles_match_grid_search() {
    // 100 x 100 grid over the square, then repeated zoom around the best cell.
    let (mut best_g, mut best_b, mut best) = (0.0, 0.0, f64::INFINITY);
    let (mut cg, mut cb, mut half) = (0.0, 0.0, FRAC_PI_2);
    for _ in 0..8 {
        for i in 0..100 {
            for k in 0..100 {
                let g = cg - half + 2.0 * half * i as f64 / 99.0;
                let b = cb - half + 2.0 * half * k as f64 / 99.0;
                let e = p1_tree_energy_closed_form(g, b);
                if e < best {
                    (best_g, best_b, best) = (g, b, e);
                }
            }
        }
        (cg, cb, half) = (best_g, best_b, 4.0 * half / 99.0);
    }
    let a = default_angles(1).unwrap();
    let e = a.energy().unwrap();
    assert!((e - best).abs() < 1e-6, "shipped {e} grid {best}");
    assert!((tree_energy(&a).unwrap() - e).abs() < 1e-12);
}

#[test]
fn p1_optimum_prefers_low_degree() {
    let a = default_angles(1).unwrap();
    let ising = IsingParams::new(1.0).unwrap();
    let f: Vec<f64> = (0..=3)
        .map(|d| expectation_p1_analytic(d, ising.field(d), ising.coupling(), a.gammas()[0], a.betas()[0]))
        .collect();
    assert!(f.windows(2).all(|w| w[0] > w[1]), "{f:?}");
}

fn random_schedule(rng: &mut ChaCha8Rng, p: usize, lambda: f64) -> AngleSchedule {
    let mut draw = || (0..p).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)).collect::<Vec<_>>();
    let (g, b) = (draw(), draw());
    AngleSchedule::new(p, 3, lambda, g, b).unwrap()
}

#[test]
fn engines_agree_on_census_cones() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in 1..=2 {
        let (_, cones) = enumerate_cones(p, 3).unwrap();
        for cone in &cones {
            for _ in 0..50 {
                let a = random_schedule(&mut rng, p, 1.0);
                let circ = build_circuit(cone, &a, true).unwrap();
                let sv = expectation_statevector(&circ, 24).unwrap();
                let tn = expectation_contract(&circ, DEFAULT_MEMORY_BUDGET).unwrap();
                assert!((sv - tn).abs() < 1e-8, "p={p} sv={sv} tn={tn}");
                assert!(sv.abs() <= 1.0 + 1e-9);
                if p == 1 {
                    let ising = IsingParams::new(1.0).unwrap();
                    let d = cone.degrees()[0];
                    let an = expectation_p1_analytic(d, ising.field(d), ising.coupling(), a.gammas()[0], a.betas()[0]);
                    assert!((sv - an).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn pruning_preserves_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (_, cones) = enumerate_cones(2, 3).unwrap();
    for cone in cones.iter().chain([&LightCone::regular_tree(3, 3)]) {
        let a = random_schedule(&mut rng, cone.depth(), 1.5);
        let pruned = expectation_statevector(&build_circuit(cone, &a, true).unwrap(), 24).unwrap();
        let full = expectation_statevector(&build_circuit(cone, &a, false).unwrap(), 24).unwrap();
        assert!((pruned - full).abs() < 1e-12);
    }
}

#[test]
fn extracted_cones_appear_in_census() {
    let (_, cones) = enumerate_cones(2, 3).unwrap();
    let census: HashSet<_> = cones.iter().map(canonical_key).collect();
    assert_eq!(census.len(), cones.len());
    for seed in 0..10 {
        let mut g = Graph::generate_regular(80, 3, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while g.alive_count() > 0 {
            for v in g.alive_nodes().collect::<Vec<_>>() {
                let key = canonical_key(&extract_lightcone(&g, v, 2).unwrap());
                assert!(census.contains(&key));
            }
            let alive: Vec<usize> = g.alive_nodes().collect();
            g.remove_closed_neighborhood(alive[rng.gen_range(0..alive.len())]).unwrap();
        }
    }
}

#[test]
fn depth_four_tree_contracts() {
    let cone = LightCone::regular_tree(4, 3);
    assert_eq!(cone.size(), 46);
    let a = default_angles(4).unwrap();
    let v = expectation_contract(&build_circuit(&cone, &a, true).unwrap(), DEFAULT_MEMORY_BUDGET).unwrap();
    assert!(v.abs() <= 1.0 + 1e-9);
}
