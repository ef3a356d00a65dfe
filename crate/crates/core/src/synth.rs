//! Seeded random road-like graphs and endpoint samples for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, Graph, VertexId};

/// Jittered grid of about `n` vertices. Each link gets an independent
/// continuous cost per direction, some links are one-way, a few diagonals are
/// added and every fourth row and column is a faster arterial.
pub fn random_road_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (n as f64).sqrt().ceil().max(2.0) as usize;
    let pos: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (r, c) = ((i / side) as f64, (i % side) as f64);
            (c + rng.gen_range(-0.3..0.3), r + rng.gen_range(-0.3..0.3))
        })
        .collect();
    let dist = |a: usize, b: usize| ((pos[a].0 - pos[b].0).powi(2) + (pos[a].1 - pos[b].1).powi(2)).sqrt();
    let mut edges = Vec::new();
    let mut link = |a: usize, b: usize, fast: bool, rng: &mut ChaCha8Rng| {
        let base = dist(a, b) * if fast { 0.45 } else { 1.0 };
        let one_way = rng.gen_bool(0.06);
        let forward_only = rng.gen_bool(0.5);
        if !one_way || forward_only {
            edges.push(Edge { tail: a as VertexId, head: b as VertexId, cost: base * rng.gen_range(1.0..1.3) });
        }
        if !one_way || !forward_only {
            edges.push(Edge { tail: b as VertexId, head: a as VertexId, cost: base * rng.gen_range(1.0..1.3) });
        }
    };
    for i in 0..n {
        let (r, c) = (i / side, i % side);
        if c + 1 < side && i + 1 < n {
            link(i, i + 1, r % 4 == 0, &mut rng);
        }
        if i + side < n {
            link(i, i + side, c % 4 == 0, &mut rng);
        }
        if c + 1 < side && i + side + 1 < n && rng.gen_bool(0.1) {
            link(i, i + side + 1, false, &mut rng);
        }
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    Graph::from_parts(labels, edges).expect("generated graph is valid")
}

/// Unit-cost bidirectional grid with `side * side` vertices.
pub fn unit_grid(side: usize) -> Graph {
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let v = (r * side + c) as VertexId;
            if c + 1 < side {
                edges.push(Edge { tail: v, head: v + 1, cost: 1.0 });
                edges.push(Edge { tail: v + 1, head: v, cost: 1.0 });
            }
            if r + 1 < side {
                let w = v + side as VertexId;
                edges.push(Edge { tail: v, head: w, cost: 1.0 });
                edges.push(Edge { tail: w, head: v, cost: 1.0 });
            }
        }
    }
    let labels = (0..side * side).map(|i| i.to_string()).collect();
    Graph::from_parts(labels, edges).expect("grid is valid")
}

/// Two disjoint samples of `k_o` origins and `k_d` destinations.
pub fn random_endpoints(g: &Graph, k_o: usize, k_d: usize, seed: u64) -> (Vec<VertexId>, Vec<VertexId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<VertexId> = (0..g.num_vertices() as VertexId).collect();
    all.shuffle(&mut rng);
    let k_o = k_o.min(all.len());
    let k_d = k_d.min(all.len() - k_o);
    let origins = all[..k_o].to_vec();
    let dests = all[k_o..k_o + k_d].to_vec();
    (origins, dests)
}
