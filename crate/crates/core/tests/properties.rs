//! Property-based checks of the core invariants.

use std::sync::OnceLock;

use proptest::prelude::*;
use qgreedy_core::graph::{energy, energy_pauli, Graph, IsingParams};
use qgreedy_core::lightcone::{canonical_key, extract_lightcone, LightCone};
use qgreedy_core::noise::NoiseParams;
use qgreedy_core::qaoa::{default_angles, Evaluator};
use qgreedy_core::solver::{solve_classical_greedy, solve_quantum_greedy, Advice, SolverConfig, TieBreak};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(seed: u64, n: usize, density: f64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// Random graph of maximum degree 3.
fn random_subcubic(seed: u64, n: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for _ in 0..n {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !g.has_edge(u, v) && g.degree(u) < 3 && g.degree(v) < 3 {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

fn p2_evaluator() -> &'static Evaluator {
    static EV: OnceLock<Evaluator> = OnceLock::new();
    EV.get_or_init(|| Evaluator::new(default_angles(2).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_forms_agree(seed in any::<u64>(), n in 1usize..10, density in 0.0f64..1.0, lambda in 1.0f64..4.0, mask in any::<u32>()) {
        let g = random_graph(seed, n, density);
        let params = IsingParams::new(lambda).unwrap();
        let x: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let s: Vec<i8> = x.iter().map(|&b| if b { 1 } else { -1 }).collect();
        let a = energy(&g, &params, &x).unwrap();
        let b = energy_pauli(&g, &params, &s).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn relabeled_cones_share_key_and_value(seed in any::<u64>(), root in 0usize..40, p in 1usize..=2) {
        let mut g = Graph::generate_regular(40, 3, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        g.remove_closed_neighborhood(rng.gen_range(0..40)).unwrap();
        let alive: Vec<usize> = g.alive_nodes().collect();
        let cone = extract_lightcone(&g, alive[root % alive.len()], p).unwrap();
        let mut perm: Vec<usize> = (1..cone.size()).collect();
        perm.shuffle(&mut rng);
        perm.insert(0, 0);
        let other = cone.relabel(&perm).unwrap();
        prop_assert_eq!(canonical_key(&cone), canonical_key(&other));
        if p == 2 {
            let ev = p2_evaluator();
            let (a, _) = ev.compute(&cone).unwrap();
            let (b, _) = ev.compute(&other).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_outputs_are_maximal_independent_sets(seed in any::<u64>(), n in 1usize..40, density in 0.0f64..0.4) {
        let g = random_graph(seed, n, density);
        let t = solve_classical_greedy(&g, seed).unwrap();
        prop_assert!(g.is_independent(t.set()));
        prop_assert_eq!(t.steps().iter().map(|s| s.removed).sum::<usize>(), n);
        for v in 0..n {
            prop_assert!(t.set().contains(v) || g.neighbors(v).any(|w| t.set().contains(w)));
        }
    }

    #[test]
    fn quantum_outputs_are_valid_under_any_advice(seed in any::<u64>(), n in 1usize..40, mode in 0u8..3) {
        let g = random_subcubic(seed, n);
        let ev = p2_evaluator();
        let advice = match mode {
            0 => Advice::Ideal,
            1 => Advice::Shots(50),
            _ => Advice::Noise(NoiseParams::new(0.05, -0.1, 0.1, seed).unwrap()),
        };
        let cfg = SolverConfig::new(ev.angles().clone()).with_seed(seed).with_advice(advice).with_cutoff(0.01);
        let t = solve_quantum_greedy(&g, &cfg, ev).unwrap();
        prop_assert!(g.is_independent(t.set()));
        prop_assert_eq!(t.steps().iter().map(|s| s.removed).sum::<usize>(), n);
    }

    #[test]
    fn incremental_matches_full_recompute(seed in any::<u64>()) {
        let g = Graph::generate_regular(50, 3, seed).unwrap();
        let ev = p2_evaluator();
        let cfg = SolverConfig::new(ev.angles().clone()).with_seed(seed);
        let a = solve_quantum_greedy(&g, &cfg, ev).unwrap();
        let b = solve_quantum_greedy(&g, &cfg.clone().with_full_recompute(true), ev).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn alpha_shift_keeps_selection(seed in any::<u64>(), alpha in -0.5f64..0.5) {
        let g = Graph::generate_regular(40, 3, seed).unwrap();
        let ev = p2_evaluator();
        let base = NoiseParams::new(0.03, 0.0, 0.04, seed).unwrap();
        let run = |params: NoiseParams| {
            let cfg = SolverConfig::new(ev.angles().clone())
                .with_seed(seed)
                .with_tie_break(TieBreak::LowestId)
                .with_advice(Advice::Noise(params));
            solve_quantum_greedy(&g, &cfg, ev).unwrap().selections()
        };
        prop_assert_eq!(run(base), run(base.with_alpha(alpha).unwrap()));
    }
}

#[test]
fn warm_cache_gives_identical_traces() {
    let g = Graph::generate_regular(80, 3, 4).unwrap();
    let a = default_angles(2).unwrap();
    let ev = Evaluator::new(a.clone());
    let cfg = SolverConfig::new(a).with_seed(9);
    let cold = solve_quantum_greedy(&g, &cfg, &ev).unwrap();
    let filled = ev.cache().len();
    assert!(filled > 0);
    let warm = solve_quantum_greedy(&g, &cfg, &ev).unwrap();
    assert_eq!(cold, warm);
    assert_eq!(ev.cache().len(), filled);
}

#[test]
fn tree_cone_is_the_bulk_cone() {
    let g = Graph::generate_regular(2000, 3, 1).unwrap();
    let tree = canonical_key(&LightCone::regular_tree(2, 3));
    let hits = (0..2000)
        .filter(|&v| canonical_key(&extract_lightcone(&g, v, 2).unwrap()) == tree)
        .count();
    assert!(hits > 1900, "{hits}");
}
