mod common;

use std::collections::HashMap;

use common::{graph, v};
use revc::compare::{compare, MissCause};
use revc::graph::{Graph, PerturbationSpec};
use revc::lo::reconstruct;
use revc::params::{Ablation, RevcParams};
use revc::pipeline::{run, PipelineOutput};
use revc::reach::{compute_reach_bounds, ReachIndex};
use revc::via::{
    collect_via_edges, dedup_by_length, eliminate_dominated_edges, filter_by_length, Candidate, ViaEdgeSet,
};

fn grow(g: &Graph, pairs: &[(&str, &str)], params: RevcParams) -> PipelineOutput {
    let pairs: Vec<_> = pairs.iter().map(|(s, t)| (v(g, s), v(g, t))).collect();
    run(g, &ReachIndex::unbounded(g.num_vertices()), &pairs, &params).unwrap()
}

fn labels(g: &Graph, es: &ViaEdgeSet) -> Vec<(String, String)> {
    es.edges.iter().map(|&e| (g.label(g.edge(e).tail).into(), g.label(g.edge(e).head).into())).collect()
}

fn pair(a: &str, b: &str) -> (String, String) {
    (a.into(), b.into())
}

#[test]
fn path_graph_keeps_both_edges() {
    let g = graph(&[("A", "B", 1.0, false), ("B", "C", 1.0, false)]);
    let out = grow(&g, &[("A", "C")], RevcParams::default());
    let es = collect_via_edges(&g, &out.trees.scan, &out.endpoints);
    assert_eq!(labels(&g, &es), vec![pair("A", "B"), pair("B", "C")]);
    assert_eq!(es.via_vertices(&g), vec![v(&g, "A"), v(&g, "B")]);
}

#[test]
fn dead_end_spur_is_not_a_via_edge() {
    // D and E hang off B. Both trees reach them, but through opposite
    // edges, so any path through them would turn around.
    let g = graph(&[("A", "B", 1.0, true), ("B", "C", 1.0, true), ("B", "D", 1.0, true), ("D", "E", 1.0, true)]);
    let p = RevcParams::new(0.2, 3.0, 0.9, 1.1).unwrap().with_ablation(Ablation { no_prune: true, ..Default::default() });
    let out = grow(&g, &[("A", "C")], p);
    for x in ["D", "E"] {
        assert!(out.trees.forward[0].get(v(&g, x)).is_some());
        assert!(out.trees.backward[0].get(v(&g, x)).is_some());
    }
    let es = collect_via_edges(&g, &out.trees.scan, &out.endpoints);
    assert_eq!(labels(&g, &es), vec![pair("A", "B"), pair("B", "C")]);
}

#[test]
fn equal_chain_keeps_one_edge() {
    let g = graph(&[("A", "B", 1.0, false), ("B", "C", 1.0, false), ("C", "D", 1.0, false)]);
    let out = grow(&g, &[("A", "D")], RevcParams::default());
    let all = collect_via_edges(&g, &out.trees.scan, &out.endpoints);
    assert_eq!(all.len(), 3);
    assert_eq!(eliminate_dominated_edges(&g, &out.trees.scan, &all).len(), 1);
}

#[test]
fn strictly_dominated_edge_removed() {
    // (p,q) is scanned from s1 and s2, its successor (q,r) only from s1
    // because s2 reaches r directly.
    let g = graph(&[
        ("s1", "p", 1.0, false),
        ("s2", "p", 1.0, false),
        ("p", "q", 1.0, false),
        ("q", "r", 1.0, false),
        ("s2", "r", 1.5, false),
        ("r", "t", 1.0, false),
    ]);
    let out = grow(&g, &[("s1", "t"), ("s2", "t")], RevcParams::new(0.2, 3.0, 0.9, 1.1).unwrap());
    let all = collect_via_edges(&g, &out.trees.scan, &out.endpoints);
    assert!(labels(&g, &all).contains(&pair("q", "r")));
    let kept = labels(&g, &eliminate_dominated_edges(&g, &out.trees.scan, &all));
    assert!(kept.contains(&pair("p", "q")));
    assert!(!kept.contains(&pair("q", "r")));
}

#[test]
fn dominance_elimination_preserves_routes() {
    for seed in 0..6 {
        let g = common::random_case(seed);
        let idx = compute_reach_bounds(&g, 0.0);
        let pairs = common::endpoints(&g, 4, seed);
        let p = RevcParams::new(0.2, 1.5, 1.0, 1.0).unwrap();
        let a = run(&g, &idx, &pairs, &p).unwrap();
        let off = p.with_ablation(Ablation { no_dedup_neighbours: true, ..Default::default() });
        let b = run(&g, &idx, &pairs, &off).unwrap();
        let seqs = |o: &PipelineOutput| o.routes.iter().map(|r| r.vertices.clone()).collect::<Vec<_>>();
        assert_eq!(seqs(&a), seqs(&b), "seed {seed}");
        assert!(a.report.via_edges_after_dominance <= b.report.via_edges_after_dominance);
    }
}

#[test]
fn length_filter_boundaries() {
    let g = common::random_case(3);
    let idx = compute_reach_bounds(&g, 0.0);
    let pairs = common::endpoints(&g, 4, 3);
    let p = RevcParams::new(0.2, 2.0, 0.9, 1.1).unwrap().with_ablation(Ablation { no_dedup: true, ..Default::default() });
    let out = run(&g, &idx, &pairs, &p).unwrap();
    let cands = out.dedup.kept.clone();
    let d = |c: &Candidate| out.distances.get(c.s as usize, c.t as usize);
    for c in &cands {
        assert!(c.via_len >= d(c) * (1.0 - 1e-12));
        assert!(c.via_len <= 2.0 * d(c) * (1.0 + 1e-9));
    }
    let tight = filter_by_length(cands.clone(), &out.distances, 1.0, 1e-9);
    assert!(!tight.is_empty());
    assert!(tight.iter().all(|c| (c.via_len - d(c)).abs() <= 1e-9 * d(c)));
    let mid = filter_by_length(cands.clone(), &out.distances, 1.3, 1e-9);
    assert_eq!(mid.len(), cands.iter().filter(|c| c.via_len <= 1.3 * d(c) * (1.0 + 1e-9)).count());
}

#[test]
fn length_filter_matches_oracle_feasible_set() {
    let g = common::random_case(5);
    let idx = compute_reach_bounds(&g, 0.0);
    let pairs = common::endpoints(&g, 3, 5);
    let p = RevcParams::default().with_ablation(Ablation { no_dedup: true, ..Default::default() });
    let out = run(&g, &idx, &pairs, &p).unwrap();
    let ep = &out.endpoints;
    for (i, j) in (0..3).flat_map(|i| (0..3).map(move |j| (i, j))) {
        let (s, t) = (ep.origins[i], ep.destinations[j]);
        let d = out.distances.get(i, j);
        let feasible: std::collections::HashSet<Vec<u32>> = revc::oracle::enumerate_via_paths(&g, s, t)
            .into_iter()
            .filter(|r| r.length <= 1.5 * d * (1.0 + 1e-9))
            .map(|r| r.vertices)
            .collect();
        for c in out.dedup.kept.iter().filter(|c| (c.s as usize, c.t as usize) == (i, j)) {
            assert!(feasible.contains(&reconstruct(&out.trees, c.s, c.v, c.t)));
        }
    }
}

#[test]
fn dedup_merges_vertices_on_one_path() {
    let g = graph(&[("A", "B", 1.0, false), ("B", "C", 1.0, false), ("C", "D", 1.0, false)]);
    let p = RevcParams::default().with_ablation(Ablation { no_dedup_neighbours: true, ..Default::default() });
    let out = grow(&g, &[("A", "D")], p);
    assert_eq!(out.dedup.kept.len(), 1);
    assert_eq!(out.dedup.merged.len(), 2);
    assert_eq!(out.routes.len(), 1);
}

#[test]
fn distinct_lengths_survive_dedup() {
    let c = |v, len| Candidate { s: 0, t: 0, v, via_len: len };
    let cands = vec![c(1, 10.0), c(2, 10.0 + 1e-12), c(3, 10.5)];
    let scores = HashMap::from([(1, 1), (2, 4), (3, 1)]);
    let out = dedup_by_length(&cands, &scores, 1e-9);
    let kept: Vec<u32> = out.kept.iter().map(|c| c.v).collect();
    assert_eq!(kept, vec![2, 3]);
    assert_eq!(out.merged.len(), 1);
}

#[test]
fn unit_hexagon_collapses_without_perturbation() {
    // Both halves of the cycle are via paths of equal length.
    let rows = [
        ("A", "B", 1.0, true),
        ("B", "C", 1.0, true),
        ("C", "D", 1.0, true),
        ("D", "E", 1.0, true),
        ("E", "F", 1.0, true),
        ("F", "A", 1.0, true),
    ];
    let p = RevcParams::new(0.2, 1.5, 0.9, 1.1).unwrap().with_ablation(Ablation { no_dedup_neighbours: true, ..Default::default() });
    let plain = graph(&rows);
    let out = grow(&plain, &[("A", "D")], p);
    assert_eq!(out.dedup.kept.len(), 1);
    let perturbed = plain.perturb_costs(&PerturbationSpec::new(1e-6, 1).unwrap());
    let out = grow(&perturbed, &[("A", "D")], p);
    assert_eq!(out.dedup.kept.len(), 2);
}

#[test]
fn two_sided_edge_exclusion_is_counted() {
    // The path s x' u v w y' t is admissible, but s reaches w around v and u
    // reaches t around v, so no edge next to v lies in both trees.
    let g = graph(&[
        ("s", "x'", 1.0, false),
        ("x'", "u", 5.0, false),
        ("u", "v", 1.0, false),
        ("v", "w", 1.0, false),
        ("w", "y'", 5.0, false),
        ("y'", "t", 1.0, false),
        ("s", "m", 3.9, false),
        ("m", "w", 3.95, false),
        ("u", "n", 3.9, false),
        ("n", "t", 3.9, false),
    ]);
    let idx = compute_reach_bounds(&g, 0.0);
    let p = RevcParams::new(0.2, 1.5, 1.0, 1.0).unwrap();
    let out = run(&g, &idx, &[(v(&g, "s"), v(&g, "t"))], &p).unwrap();
    let target: Vec<u32> = ["s", "x'", "u", "v", "w", "y'", "t"].iter().map(|x| v(&g, x)).collect();
    let f = revc::oracle::local_optimality_factor(&g, &target, &mut Default::default());
    assert!((f - 6.0 / 14.0).abs() < 1e-12);
    assert!(out.routes.iter().all(|r| r.vertices != target));
    let c = compare(&g, &out, &p);
    assert_eq!(c.two_sided_exclusions, 1);
    assert!(c.missing_admissible.iter().all(|m| m.cause == Some(MissCause::NoTwoSidedEdge)));
    assert!(c.exact_match());
}
