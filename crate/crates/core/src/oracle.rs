//! Brute-force reference: every single-via path of a pair with its exact
//! local-optimality factor.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dijkstra::{dijkstra_tree, distances};
use crate::error::{Result, RevcError};
use crate::graph::{Cost, Direction, Graph, VertexId, INF};

/// Largest graph the oracle accepts without being forced.
pub const ORACLE_VERTEX_LIMIT: usize = 2000;

/// Relative slack when deciding that a subpath is not a shortest path.
const SUBPATH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRoute {
    pub origin: VertexId,
    pub destination: VertexId,
    /// Smallest via vertex producing this sequence.
    pub via: VertexId,
    pub vertices: Vec<VertexId>,
    pub length: Cost,
    pub exact_factor: f64,
}

pub fn check_size(g: &Graph, force: bool) -> Result<()> {
    if g.num_vertices() > ORACLE_VERTEX_LIMIT && !force {
        return Err(RevcError::OracleSizeGuard { vertices: g.num_vertices(), limit: ORACLE_VERTEX_LIMIT });
    }
    Ok(())
}

/// Memoized single-source distances.
#[derive(Default)]
pub struct DistanceMemo {
    rows: HashMap<VertexId, Vec<Cost>>,
}

impl DistanceMemo {
    pub fn get(&mut self, g: &Graph, u: VertexId, w: VertexId) -> Cost {
        self.rows.entry(u).or_insert_with(|| distances(g, u, Direction::Forward))[w as usize]
    }
}

/// Exact `sup { a : seq is a-relative locally optimal }`: the shortest
/// interior over all non-shortest subpaths, divided by the path length.
pub fn local_optimality_factor(g: &Graph, seq: &[VertexId], memo: &mut DistanceMemo) -> f64 {
    let mut pos = vec![0.0; seq.len()];
    for i in 1..seq.len() {
        let e = g.edge_between(seq[i - 1], seq[i]).expect("route uses existing edges");
        pos[i] = pos[i - 1] + g.edge(e).cost;
    }
    let total = *pos.last().unwrap_or(&0.0);
    let mut worst = INF;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            let interior = if j > i + 1 { pos[j - 1] - pos[i + 1] } else { 0.0 };
            if interior >= worst {
                break;
            }
            let len = pos[j] - pos[i];
            if memo.get(g, seq[i], seq[j]) < len * (1.0 - SUBPATH_TOL) {
                worst = interior;
                break;
            }
        }
    }
    if worst == INF || total <= 0.0 {
        1.0
    } else {
        (worst / total).min(1.0)
    }
}

/// All distinct `s -> v -> t` concatenations of shortest paths.
pub fn enumerate_via_paths(g: &Graph, s: VertexId, t: VertexId) -> Vec<OracleRoute> {
    let fwd = dijkstra_tree(g, s, Direction::Forward, INF);
    let bwd = dijkstra_tree(g, t, Direction::Backward, INF);
    let mut seen: HashMap<Vec<VertexId>, usize> = HashMap::new();
    let mut out: Vec<OracleRoute> = Vec::new();
    for v in 0..g.num_vertices() as VertexId {
        let (a, b) = (fwd.cost[v as usize], bwd.cost[v as usize]);
        if !a.is_finite() || !b.is_finite() {
            continue;
        }
        let (Some(mut seq), Some(back)) = (fwd.path(v), bwd.path(v)) else { continue };
        seq.extend_from_slice(&back[1..]);
        if seen.contains_key(&seq) {
            continue;
        }
        seen.insert(seq.clone(), out.len());
        out.push(OracleRoute { origin: s, destination: t, via: v, vertices: seq, length: a + b, exact_factor: f64::NAN });
    }
    out
}

/// Every via path with its exact factor filled in.
pub fn scored_via_paths(g: &Graph, s: VertexId, t: VertexId) -> Vec<OracleRoute> {
    let mut memo = DistanceMemo::default();
    let mut routes = enumerate_via_paths(g, s, t);
    for r in &mut routes {
        r.exact_factor = local_optimality_factor(g, &r.vertices, &mut memo);
    }
    routes
}

/// Via paths with factor at least `alpha` and length at most `beta * d(s, t)`.
pub fn oracle_admissible(g: &Graph, s: VertexId, t: VertexId, alpha: f64, beta: f64) -> Vec<OracleRoute> {
    let d = distances(g, s, Direction::Forward)[t as usize];
    if !d.is_finite() {
        return Vec::new();
    }
    filter_admissible(scored_via_paths(g, s, t), d, alpha, beta)
}

pub fn filter_admissible(routes: Vec<OracleRoute>, d: Cost, alpha: f64, beta: f64) -> Vec<OracleRoute> {
    routes.into_iter().filter(|r| r.exact_factor >= alpha && r.length <= beta * d * (1.0 + SUBPATH_TOL)).collect()
}

/// Scored via paths for many pairs, in parallel.
pub fn scored_for_pairs(g: &Graph, pairs: &[(VertexId, VertexId)]) -> Vec<Vec<OracleRoute>> {
    pairs.par_iter().map(|&(s, t)| scored_via_paths(g, s, t)).collect()
}
