mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use revc::compare::compare;
use revc::dijkstra::distances;
use revc::graph::{Direction, Graph, PerturbationSpec};
use revc::oracle::{local_optimality_factor, DistanceMemo};
use revc::params::RevcParams;
use revc::pipeline::run;
use revc::query::re_distance;
use revc::reach::{compute_reach_bounds, exact_reaches};

/// Connected-ish random graph: a spanning path plus extra edges, integer
/// costs so that ties are common before perturbation.
fn arb_graph() -> impl Strategy<Value = Graph> {
    (5usize..16)
        .prop_flat_map(|n| {
            let extra = prop::collection::vec((0..n, 0..n, 1u32..6, any::<bool>()), 0..2 * n);
            let chain = prop::collection::vec((1u32..6, any::<bool>()), n - 1);
            (Just(n), chain, extra, 0u64..1000)
        })
        .prop_map(|(n, chain, extra, seed)| {
            let mut tsv = String::from("from\tto\tcost\tbidir\n");
            for (i, (c, bi)) in chain.into_iter().enumerate() {
                tsv += &format!("v{i}\tv{}\t{c}\t{}\n", i + 1, if i % 3 == 0 { 1 } else { bi as u8 });
            }
            for (a, b, c, bi) in extra {
                if a != b {
                    tsv += &format!("v{a}\tv{b}\t{c}\t{}\n", bi as u8);
                }
            }
            let _ = n;
            Graph::load_str(&tsv).unwrap().perturb_costs(&PerturbationSpec::new(1e-6, seed).unwrap())
        })
}

fn arb_params() -> impl Strategy<Value = RevcParams> {
    (0.05f64..0.5, 1.0f64..2.5, 0.5f64..=1.0, 1.0f64..2.0)
        .prop_map(|(a, b, g, d)| RevcParams::new(a, b, g, d).unwrap())
}

fn pairs_for(g: &Graph, k: usize) -> Vec<(u32, u32)> {
    let n = g.num_vertices() as u32;
    let k = k.min(n as usize / 2) as u32;
    let o: Vec<u32> = (0..k).collect();
    let d: Vec<u32> = (n - k..n).collect();
    common::all_pairs(&o, &d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reach_bounds_dominate_exact_reach(g in arb_graph(), cap in prop_oneof![Just(0.0), 0.5f64..4.0]) {
        let idx = compute_reach_bounds(&g, cap);
        for (v, (b, r)) in idx.bound.iter().zip(exact_reaches(&g)).enumerate() {
            prop_assert!(*b >= r * (1.0 - 1e-9), "vertex {v}: bound {b} < reach {r}");
        }
    }

    #[test]
    fn pruned_queries_are_exact(g in arb_graph(), cap in prop_oneof![Just(0.0), 0.5f64..4.0]) {
        let idx = compute_reach_bounds(&g, cap);
        for s in 0..g.num_vertices() as u32 {
            let exact = distances(&g, s, Direction::Forward);
            for t in 0..g.num_vertices() as u32 {
                let d = re_distance(&g, &idx, s, t);
                let e = exact[t as usize];
                prop_assert!(d == e || (d - e).abs() <= 1e-9 * e, "{s}->{t}: {d} vs {e}");
            }
        }
    }

    #[test]
    fn returned_routes_are_valid(g in arb_graph(), p in arb_params(), cap in prop_oneof![Just(0.0), 1.0f64..3.0]) {
        let idx = compute_reach_bounds(&g, cap);
        let out = run(&g, &idx, &pairs_for(&g, 3), &p).unwrap();
        let mut seen = HashSet::new();
        let mut memo = DistanceMemo::default();
        for r in &out.routes {
            prop_assert!(seen.insert((r.s_ord, r.t_ord, r.vertices.clone())), "duplicate sequence");
            prop_assert_eq!(r.vertices[0], r.origin);
            prop_assert_eq!(*r.vertices.last().unwrap(), r.destination);
            prop_assert!(r.vertices.contains(&r.via));
            let cost = g.path_cost(&r.vertices).expect("route follows graph edges");
            prop_assert!((cost - r.length).abs() <= 1e-9 * cost.max(1.0));
            prop_assert!(r.length >= r.shortest * (1.0 - 1e-9));
            prop_assert!(r.length <= p.beta * r.shortest * (1.0 + 1e-9));
            let f = local_optimality_factor(&g, &r.vertices, &mut memo);
            prop_assert!(f >= r.guaranteed_alpha * (1.0 - 1e-9), "factor {} below {}", f, r.guaranteed_alpha);
            prop_assert!(r.guaranteed_alpha >= p.alpha * p.gamma * (1.0 - 1e-12));
        }
    }

    #[test]
    fn sandwich_holds(g in arb_graph(), p in arb_params()) {
        let idx = compute_reach_bounds(&g, 0.0);
        let out = run(&g, &idx, &pairs_for(&g, 3), &p).unwrap();
        let c = compare(&g, &out, &p);
        prop_assert!(c.sandwich_holds(), "{:?}", c);
        prop_assert_eq!(c.tree_incomplete, 0);
    }

    #[test]
    fn tree_costs_are_distances(g in arb_graph(), p in arb_params()) {
        let idx = compute_reach_bounds(&g, 0.0);
        let out = run(&g, &idx, &pairs_for(&g, 2), &p).unwrap();
        for t in &out.trees.forward {
            let exact = distances(&g, t.root, Direction::Forward);
            for e in &t.entries {
                prop_assert!((e.cost - exact[e.v as usize]).abs() <= 1e-9 * e.cost.max(1.0));
            }
        }
        for t in &out.trees.backward {
            let exact = distances(&g, t.root, Direction::Backward);
            for e in &t.entries {
                prop_assert!((e.cost - exact[e.v as usize]).abs() <= 1e-9 * e.cost.max(1.0));
            }
        }
    }

    #[test]
    fn output_is_deterministic(g in arb_graph(), p in arb_params()) {
        let idx = compute_reach_bounds(&g, 0.0);
        let pairs = pairs_for(&g, 3);
        let a = run(&g, &idx, &pairs, &p).unwrap();
        let b = run(&g, &idx, &pairs, &p).unwrap();
        prop_assert_eq!(a.routes, b.routes);
    }
}
