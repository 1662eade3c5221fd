//! Property tests for the structural invariants: metric axioms, adjacency
//! consistency, evolving-set identities, and estimator sanity.

use dynaperc::dyn_env::interval_open_probability;
use dynaperc::evolving_set::{
    doob_step, evolving_set_law, set_size, step_kernel, PiecewiseEnvironment,
};
use dynaperc::graphs::{dist, neighbors, FiniteGraph, GraphSpec, VertexRef, Word};
use dynaperc::rng::StreamRng;
use dynaperc::stats::mean_stderr;
use dynaperc::walker::fit_power_law;
use proptest::prelude::*;

fn arb_word(d: u32, max_len: usize) -> impl Strategy<Value = Word> {
    let first = 0..d as u8;
    let rest = prop::collection::vec(0..(d - 1) as u8, 0..max_len);
    prop_oneof![
        Just(Word::root()),
        (first, rest).prop_map(|(f, mut r)| {
            let mut w = vec![f];
            w.append(&mut r);
            Word(w)
        }),
    ]
}

proptest! {
    #[test]
    fn tree_distance_is_a_metric(
        a in arb_word(3, 10),
        b in arb_word(3, 10),
        c in arb_word(3, 10),
    ) {
        let g = GraphSpec::regular_tree(3).unwrap();
        let d_ab = dist(&g, &VertexRef::Tree(a.clone()), &VertexRef::Tree(b.clone())).unwrap().unwrap();
        let d_ba = dist(&g, &VertexRef::Tree(b.clone()), &VertexRef::Tree(a.clone())).unwrap().unwrap();
        prop_assert_eq!(d_ab, d_ba);
        prop_assert_eq!(d_ab == 0, a == b);
        let d_ac = dist(&g, &VertexRef::Tree(a.clone()), &VertexRef::Tree(c.clone())).unwrap().unwrap();
        let d_cb = dist(&g, &VertexRef::Tree(c), &VertexRef::Tree(b)).unwrap().unwrap();
        prop_assert!(d_ab <= d_ac + d_cb, "triangle violated");
    }

    #[test]
    fn neighbors_iff_distance_one(v in arb_word(4, 8), w in arb_word(4, 8)) {
        let g = GraphSpec::regular_tree(4).unwrap();
        let (rv, rw) = (VertexRef::Tree(v), VertexRef::Tree(w));
        let d = dist(&g, &rv, &rw).unwrap().unwrap();
        let adjacent = neighbors(&g, &rv).unwrap().iter().any(|(n, _)| *n == rw);
        prop_assert_eq!(d == 1, adjacent);
        // Degree matches the regular tree everywhere.
        prop_assert_eq!(neighbors(&g, &rv).unwrap().len(), 4);
    }

    #[test]
    fn finite_graph_metric_and_adjacency(seed in 0u64..1_000) {
        // Random connected-ish small graph: a cycle plus chords.
        let mut rng = StreamRng::from_parts(seed, &[5]);
        let n = 4 + rng.below(5) as u32;
        let mut lists: Vec<Vec<u32>> = (0..n)
            .map(|i| vec![(i + n - 1) % n, (i + 1) % n])
            .collect();
        for _ in 0..rng.below(3) {
            let a = rng.below(n as u64) as u32;
            let b = rng.below(n as u64) as u32;
            if a != b && !lists[a as usize].contains(&b) {
                lists[a as usize].push(b);
                lists[b as usize].push(a);
            }
        }
        let g = GraphSpec::Finite(FiniteGraph::new(lists).unwrap());
        for u in 0..n {
            for v in 0..n {
                let d_uv = dist(&g, &VertexRef::Finite(u), &VertexRef::Finite(v)).unwrap().unwrap();
                let d_vu = dist(&g, &VertexRef::Finite(v), &VertexRef::Finite(u)).unwrap().unwrap();
                prop_assert_eq!(d_uv, d_vu);
                prop_assert_eq!(d_uv == 0, u == v);
                let adjacent = neighbors(&g, &VertexRef::Finite(u))
                    .unwrap()
                    .iter()
                    .any(|(x, _)| *x == VertexRef::Finite(v));
                prop_assert_eq!(d_uv == 1, adjacent);
            }
        }
    }

    #[test]
    fn evolving_set_identities_hold(seed in 0u64..2_000) {
        let mut rng = StreamRng::from_parts(seed, &[9]);
        let graph = match seed % 3 {
            0 => FiniteGraph::new(vec![vec![1], vec![0]]).unwrap(),
            1 => FiniteGraph::cycle(4),
            _ => FiniteGraph::complete(4),
        };
        let n_edges = graph.edge_list().len();
        let env = PiecewiseEnvironment::random(n_edges, 0.5, &mut rng);
        let kernel = step_kernel(&graph, &env).unwrap();
        let full = (1u64 << graph.len()) - 1;
        let set = 1 + rng.below(full) as u64;
        let law = evolving_set_law(&kernel, set).unwrap();
        prop_assert!((law.total_probability() - 1.0).abs() < 1e-12);
        prop_assert!((law.expected_size() - set_size(set) as f64).abs() < 1e-12);
        for w in law.outcomes.windows(2) {
            prop_assert_eq!(w[0].0 & w[1].0, w[0].0, "level sets nested");
        }
        // The Doob transform never returns the empty set.
        prop_assert_ne!(doob_step(&kernel, set, &mut rng).unwrap(), 0);
    }

    #[test]
    fn interval_probability_in_range_and_monotone(
        p in 0.01f64..1.0,
        mu in 0.01f64..10.0,
        delta in 0.0f64..50.0,
    ) {
        let q = interval_open_probability(p, mu, delta);
        prop_assert!((p..=1.0).contains(&q));
        let q2 = interval_open_probability(p, mu, delta + 1.0);
        prop_assert!(q2 >= q);
    }

    #[test]
    fn power_law_fit_recovers_noiseless_exponent(
        expo in -3.0f64..3.0,
        scale in 0.1f64..10.0,
    ) {
        let pts: Vec<(f64, f64, f64)> = (1..10)
            .map(|i| {
                let x = i as f64;
                (x, scale * x.powf(expo), 0.0)
            })
            .collect();
        let (e, c, _) = fit_power_law(&pts).unwrap();
        prop_assert!((e - expo).abs() < 1e-9);
        prop_assert!((c - scale.ln()).abs() < 1e-9);
    }
}

#[test]
fn doob_supermartingale_mean_nonincreasing() {
    // Empirical E[M_n] along Doob evolving-set paths on the 4-cycle with a
    // fresh random environment each step, n <= 6: non-increasing within
    // two standard errors. Phi of the full set is zero (no escape).
    let graph = FiniteGraph::cycle(4);
    let n_edges = graph.edge_list().len();
    let steps = 6;
    let n_paths = 4_000u64;
    let mut m_values: Vec<Vec<f64>> = vec![Vec::new(); steps + 1];
    for path in 0..n_paths {
        let mut rng = StreamRng::from_parts(0x4d6e, &[path]);
        let mut set = 1u64;
        let mut phi_sq_sum = 0.0;
        m_values[0].push(1.0);
        for n in 1..=steps {
            let env = PiecewiseEnvironment::random(n_edges, 0.5, &mut rng);
            let kernel = step_kernel(&graph, &env).unwrap();
            let phi_s = if set == 0b1111 {
                0.0
            } else {
                dynaperc::evolving_set::phi(&kernel, set).unwrap()
            };
            phi_sq_sum += phi_s * phi_s / 6.0;
            set = doob_step(&kernel, set, &mut rng).unwrap();
            let m_n = (set_size(set) as f64).powf(-0.5) * phi_sq_sum.exp();
            m_values[n].push(m_n);
        }
    }
    let stats: Vec<(f64, f64)> = m_values.iter().map(|v| mean_stderr(v)).collect();
    for w in stats.windows(2) {
        assert!(
            w[1].0 <= w[0].0 + 2.0 * (w[0].1 + w[1].1),
            "E[M_n] increased: {stats:?}"
        );
    }
}
