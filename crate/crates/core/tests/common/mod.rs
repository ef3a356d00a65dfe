#![allow(dead_code)]

use revc::graph::{Graph, PerturbationSpec, VertexId};
use revc::reach::compute_reach_bounds;
use revc::synth;

/// Graph from `(tail, head, cost, bidirectional)` rows.
pub fn graph(rows: &[(&str, &str, f64, bool)]) -> Graph {
    let mut tsv = String::from("from\tto\tcost\tbidir\n");
    for (a, b, c, bi) in rows {
        tsv += &format!("{a}\t{b}\t{c}\t{}\n", *bi as u8);
    }
    Graph::load_str(&tsv).unwrap()
}

pub fn v(g: &Graph, label: &str) -> VertexId {
    g.vertex(label).unwrap()
}

/// Perturbed random road graph with 100 to 300 vertices.
pub fn random_case(seed: u64) -> Graph {
    let n = 100 + (seed as usize * 37) % 201;
    synth::random_road_graph(n, seed).perturb_costs(&PerturbationSpec::new(1e-6, seed).unwrap())
}

pub fn all_pairs(o: &[VertexId], d: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    o.iter().flat_map(|&s| d.iter().map(move |&t| (s, t))).collect()
}

pub fn endpoints(g: &Graph, k: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    let (o, d) = synth::random_endpoints(g, k, k, seed);
    all_pairs(&o, &d)
}

pub fn index(g: &Graph) -> revc::reach::ReachIndex {
    compute_reach_bounds(g, 0.0)
}
