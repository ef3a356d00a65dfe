//! Reach upper bounds, length-capped shortcuts over degree-2 chains, and an
//! exhaustive reach oracle for small graphs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dijkstra::{distances, HeapEntry};
use crate::graph::{Cost, Direction, EdgeId, Graph, VertexId, INF};

/// Relative slack used when deciding whether an edge lies on a shortest path.
const DAG_TOL: f64 = 1e-9;
const MAX_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shortcut {
    pub tail: VertexId,
    pub head: VertexId,
    pub cost: Cost,
    /// Interior vertices bypassed, in travel order.
    pub bypassed: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachIndex {
    /// Upper bound on the reach of each vertex in the original graph.
    pub bound: Vec<Cost>,
    pub shortcuts: Vec<Shortcut>,
    pub cap: Cost,
    /// Bounds valid for queries on the graph augmented with `shortcuts`.
    /// Bypassed vertices of fully covered chains drop to the chain length.
    pub query_bound: Vec<Cost>,
}

impl ReachIndex {
    /// Index that never prunes anything.
    pub fn unbounded(n: usize) -> Self {
        ReachIndex { bound: vec![INF; n], shortcuts: Vec::new(), cap: 0.0, query_bound: vec![INF; n] }
    }
}

struct TreeScratch {
    cost: Vec<Cost>,
    scanned: Vec<bool>,
    height: Vec<Cost>,
    touched: Vec<VertexId>,
    order: Vec<VertexId>,
    heap: std::collections::BinaryHeap<HeapEntry>,
}

impl TreeScratch {
    fn new(n: usize) -> Self {
        TreeScratch {
            cost: vec![INF; n],
            scanned: vec![false; n],
            height: vec![0.0; n],
            touched: Vec::new(),
            order: Vec::new(),
            heap: Default::default(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.cost[v as usize] = INF;
            self.scanned[v as usize] = false;
            self.height[v as usize] = 0.0;
        }
        self.touched.clear();
        self.order.clear();
        self.heap.clear();
    }
}

fn on_dag(from: Cost, edge: Cost, to: Cost) -> bool {
    from + edge <= to * (1.0 + DAG_TOL) + f64::MIN_POSITIVE
}

/// Grows a tree from `root` to `radius` and flags every active vertex that
/// has depth and height at least `eps` on the shortest-path DAG.
fn certify_from(
    g: &Graph,
    root: VertexId,
    radius: Cost,
    eps: Cost,
    active: &[bool],
    has_zero: bool,
    ws: &mut TreeScratch,
    out: &mut Vec<VertexId>,
) {
    ws.reset();
    ws.cost[root as usize] = 0.0;
    ws.touched.push(root);
    ws.heap.push(HeapEntry { cost: 0.0, v: root });
    while let Some(HeapEntry { cost: c, v }) = ws.heap.pop() {
        if c > radius {
            break;
        }
        if ws.scanned[v as usize] || c > ws.cost[v as usize] {
            continue;
        }
        ws.scanned[v as usize] = true;
        ws.order.push(v);
        for a in g.arcs(v, Direction::Forward) {
            let nc = c + a.cost;
            let slot = &mut ws.cost[a.to as usize];
            if *slot == INF {
                ws.touched.push(a.to);
            }
            if nc < *slot {
                *slot = nc;
                ws.heap.push(HeapEntry { cost: nc, v: a.to });
            }
        }
    }
    // Heights over scanned vertices; frontier labels contribute as leaves.
    // Zero-cost edges can order a DAG child before its parent, so repeat
    // until stable in that case.
    loop {
        let mut changed = false;
        for &v in ws.order.iter().rev() {
            let cv = ws.cost[v as usize];
            let mut h = ws.height[v as usize];
            for a in g.arcs(v, Direction::Forward) {
                let cw = ws.cost[a.to as usize];
                if cw < INF && on_dag(cv, a.cost, cw) {
                    h = h.max(ws.height[a.to as usize] + (cw - cv));
                }
            }
            if h > ws.height[v as usize] {
                ws.height[v as usize] = h;
                changed = true;
            }
        }
        if !has_zero || !changed {
            break;
        }
    }
    let thr = eps * (1.0 - DAG_TOL);
    for &v in &ws.order {
        if active[v as usize] && ws.cost[v as usize] >= thr && ws.height[v as usize] >= thr {
            out.push(v);
        }
    }
}

fn median_positive_cost(g: &Graph) -> Cost {
    let mut c: Vec<Cost> = g.edges().iter().map(|e| e.cost).filter(|&c| c > 0.0).collect();
    if c.is_empty() {
        return 1.0;
    }
    c.sort_by(f64::total_cmp);
    c[c.len() / 2]
}

/// Upper bounds on reach by doubling thresholds: in each round every vertex
/// not shown to have reach at least `eps` receives bound `eps`. Vertices still
/// open after the last round keep bound infinity. `cap > 0` adds shortcuts.
pub fn compute_reach_bounds(g: &Graph, cap: Cost) -> ReachIndex {
    let n = g.num_vertices();
    let mut bound = vec![INF; n];
    let mut active = vec![true; n];
    for v in 0..n as VertexId {
        let nb = g.undirected_neighbours(v);
        let positive = g.arcs(v, Direction::Forward).chain(g.arcs(v, Direction::Backward)).all(|a| a.cost > 0.0);
        if nb.len() <= 1 && positive {
            bound[v as usize] = 0.0;
            active[v as usize] = false;
        }
    }
    let has_zero = g.edges().iter().any(|e| e.cost == 0.0);
    let max_out: Vec<Cost> = (0..n as VertexId).map(|v| g.max_out_cost(v, Direction::Forward)).collect();
    let mut eps = median_positive_cost(g);
    for round in 0..MAX_ROUNDS {
        if !active.iter().any(|&a| a) {
            break;
        }
        let big: Vec<VertexId> = (0..n as VertexId)
            .into_par_iter()
            .map_init(
                || (TreeScratch::new(n), Vec::new()),
                |(ws, out), root| {
                    out.clear();
                    let radius = (2.0 * eps + max_out[root as usize]) * (1.0 + DAG_TOL);
                    certify_from(g, root, radius, eps, &active, has_zero, ws, out);
                    out.clone()
                },
            )
            .flatten()
            .collect();
        let mut keep = vec![false; n];
        for v in big {
            keep[v as usize] = true;
        }
        let mut settled = 0usize;
        for v in 0..n {
            if active[v] && !keep[v] {
                bound[v] = eps;
                active[v] = false;
                settled += 1;
            }
        }
        log::debug!("reach round {round}: eps {eps:.4}, settled {settled}");
        eps *= 2.0;
    }
    let (shortcuts, query_bound) = build_shortcuts(g, &bound, cap);
    ReachIndex { bound, shortcuts, cap, query_bound }
}

/// Maximal chains of vertices with exactly two distinct neighbours, as
/// `[a, c1, .., ck, b]` with `a` and `b` outside the chain.
fn degree_two_chains(g: &Graph) -> Vec<Vec<VertexId>> {
    let n = g.num_vertices();
    let nbrs: Vec<Vec<VertexId>> = (0..n as VertexId).map(|v| g.undirected_neighbours(v)).collect();
    let interior = |v: VertexId| nbrs[v as usize].len() == 2;
    let mut seen = vec![false; n];
    let mut chains = Vec::new();
    for start in 0..n as VertexId {
        if seen[start as usize] || !interior(start) {
            continue;
        }
        seen[start as usize] = true;
        let mut sides: Vec<Vec<VertexId>> = Vec::with_capacity(2);
        let mut cyclic = false;
        for &first in &nbrs[start as usize] {
            let mut side = Vec::new();
            let (mut prev, mut cur) = (start, first);
            loop {
                side.push(cur);
                if cur == start {
                    cyclic = true;
                    break;
                }
                if !interior(cur) {
                    break;
                }
                seen[cur as usize] = true;
                let nb = &nbrs[cur as usize];
                let next = if nb[0] == prev { nb[1] } else { nb[0] };
                prev = cur;
                cur = next;
            }
            sides.push(side);
            if cyclic {
                break;
            }
        }
        if cyclic {
            continue;
        }
        let mut chain: Vec<VertexId> = sides[0].iter().rev().copied().collect();
        chain.push(start);
        chain.extend(sides[1].iter().copied());
        if chain.first() != chain.last() {
            chains.push(chain);
        }
    }
    chains
}

fn chain_edges(g: &Graph, seq: &[VertexId]) -> Option<Vec<EdgeId>> {
    seq.windows(2).map(|w| g.edge_between(w[0], w[1])).collect()
}

fn build_shortcuts(g: &Graph, bound: &[Cost], cap: Cost) -> (Vec<Shortcut>, Vec<Cost>) {
    let mut query_bound = bound.to_vec();
    let mut shortcuts = Vec::new();
    if cap <= 0.0 {
        return (shortcuts, query_bound);
    }
    for chain in degree_two_chains(g) {
        let mut traversable = 0;
        let mut covered = 0;
        let mut total = 0.0;
        for w in chain.windows(2) {
            for (a, b) in [(w[0], w[1]), (w[1], w[0])] {
                if let Some(e) = g.edge_between(a, b) {
                    total += g.edge(e).cost;
                }
            }
        }
        for seq in [chain.clone(), chain.iter().rev().copied().collect::<Vec<_>>()] {
            let Some(edges) = chain_edges(g, &seq) else { continue };
            traversable += 1;
            let cost = edges.iter().fold(0.0, |acc, &e| acc + g.edge(e).cost);
            if cost <= cap {
                covered += 1;
                shortcuts.push(Shortcut {
                    tail: seq[0],
                    head: *seq.last().unwrap(),
                    cost,
                    bypassed: seq[1..seq.len() - 1].to_vec(),
                    edges,
                });
            }
        }
        if traversable > 0 && covered == traversable {
            for &c in &chain[1..chain.len() - 1] {
                query_bound[c as usize] = query_bound[c as usize].min(total);
            }
        }
    }
    (shortcuts, query_bound)
}

/// Exhaustive reach of every vertex: the largest `min(d(u,v), d(v,w))` over
/// pairs whose distance is attained through `v`. Quadratic memory.
pub fn exact_reaches(g: &Graph) -> Vec<Cost> {
    let n = g.num_vertices();
    let all: Vec<Vec<Cost>> = (0..n as VertexId).into_par_iter().map(|u| distances(g, u, Direction::Forward)).collect();
    (0..n)
        .into_par_iter()
        .map(|v| {
            let mut best: Cost = 0.0;
            let dv = &all[v];
            for du in &all {
                let duv = du[v];
                if duv == INF || duv <= best {
                    continue;
                }
                for w in 0..n {
                    let (dvw, duw) = (dv[w], du[w]);
                    if dvw > best && dvw < INF && duv + dvw <= duw * (1.0 + 1e-12) {
                        best = best.max(duv.min(dvw));
                    }
                }
            }
            best
        })
        .collect()
}

pub fn exact_reach(g: &Graph, v: VertexId) -> Cost {
    exact_reaches(g)[v as usize]
}
