//! Reach-pruned bidirectional point-to-point distance queries.

use std::collections::BinaryHeap;

use crate::dijkstra::HeapEntry;
use crate::graph::{Cost, Graph, VertexId, INF};
use crate::reach::ReachIndex;

const SHORTCUT_TAG: u32 = 1 << 31;
const NO_PARENT: (VertexId, u32) = (u32::MAX, u32::MAX);

#[derive(Debug, Clone, Copy)]
struct QArc {
    to: VertexId,
    cost: Cost,
    /// Original edge id, or shortcut index with `SHORTCUT_TAG` set.
    tag: u32,
}

/// The graph plus shortcut arcs, with the pruning bounds that are valid on it.
pub struct QueryGraph<'a> {
    g: &'a Graph,
    idx: &'a ReachIndex,
    offsets: [Vec<u32>; 2],
    arcs: [Vec<QArc>; 2],
}


impl<'a> QueryGraph<'a> {
    pub fn new(g: &'a Graph, idx: &'a ReachIndex) -> Self {
        let n = g.num_vertices();
        let mut lists: [Vec<Vec<QArc>>; 2] = [vec![Vec::new(); n], vec![Vec::new(); n]];
        for (id, e) in g.edges().iter().enumerate() {
            lists[0][e.tail as usize].push(QArc { to: e.head, cost: e.cost, tag: id as u32 });
            lists[1][e.head as usize].push(QArc { to: e.tail, cost: e.cost, tag: id as u32 });
        }
        for (k, s) in idx.shortcuts.iter().enumerate() {
            let tag = k as u32 | SHORTCUT_TAG;
            lists[0][s.tail as usize].push(QArc { to: s.head, cost: s.cost, tag });
            lists[1][s.head as usize].push(QArc { to: s.tail, cost: s.cost, tag });
        }
        let flatten = |l: &Vec<Vec<QArc>>| {
            let mut off = Vec::with_capacity(n + 1);
            let mut flat = Vec::new();
            off.push(0u32);
            for a in l {
                flat.extend_from_slice(a);
                off.push(flat.len() as u32);
            }
            (off, flat)
        };
        let (of, af) = flatten(&lists[0]);
        let (ob, ab) = flatten(&lists[1]);
        QueryGraph { g, idx, offsets: [of, ob], arcs: [af, ab] }
    }

    pub fn graph(&self) -> &Graph {
        self.g
    }

    fn out(&self, s: usize, v: VertexId) -> &[QArc] {
        let o = &self.offsets[s];
        &self.arcs[s][o[v as usize] as usize..o[v as usize + 1] as usize]
    }

    pub fn workspace(&self) -> QueryWorkspace {
        QueryWorkspace::new(self.g.num_vertices())
    }

    /// Exact `d(u, w)`, `INF` if unreachable. The value is the left-to-right
    /// sum of original edge costs along the path found, so it is bit-equal to
    /// a plain Dijkstra distance whenever the shortest path is unique.
    pub fn distance(&self, ws: &mut QueryWorkspace, u: VertexId, w: VertexId) -> Cost {
        match self.path(ws, u, w) {
            Some(p) => self.g.path_cost(&p).expect("path uses existing edges"),
            None => INF,
        }
    }

    /// Vertex sequence of a shortest `u`-`w` path with shortcuts expanded.
    pub fn path(&self, ws: &mut QueryWorkspace, u: VertexId, w: VertexId) -> Option<Vec<VertexId>> {
        ws.queries += 1;
        if u == w {
            return Some(vec![u]);
        }
        ws.reset();
        ws.label(0, u, 0.0, NO_PARENT);
        ws.label(1, w, 0.0, NO_PARENT);
        let bound = &self.idx.query_bound;
        let mut mu = INF;
        let mut meet = None;
        loop {
            let tops = [ws.top(0), ws.top(1)];
            let s = if tops[0] <= tops[1] { 0 } else { 1 };
            if tops[s] == INF || tops[s] > mu / 2.0 {
                break;
            }
            let HeapEntry { cost: c, v } = ws.heap[s].pop().unwrap();
            if ws.settled[s][v as usize] || c > ws.dist[s][v as usize] {
                continue;
            }
            ws.settled[s][v as usize] = true;
            let b = bound[v as usize];
            if b < c && b < ws.top(1 - s) {
                continue;
            }
            for a in self.out(s, v) {
                let nc = c + a.cost;
                if nc < ws.dist[s][a.to as usize] {
                    ws.label(s, a.to, nc, (v, a.tag));
                    let other = ws.dist[1 - s][a.to as usize];
                    if nc + other < mu {
                        mu = nc + other;
                        meet = Some(a.to);
                    }
                }
            }
        }
        let m = meet?;
        let mut fwd = self.unwind(ws, 0, m);
        fwd.reverse();
        let bwd = self.unwind(ws, 1, m);
        fwd.extend_from_slice(&bwd[1..]);
        Some(fwd)
    }

    /// Walks parents from `m` to the search root, expanding shortcuts, and
    /// returns the visited vertices starting at `m`.
    fn unwind(&self, ws: &QueryWorkspace, s: usize, m: VertexId) -> Vec<VertexId> {
        let mut out = vec![m];
        let mut cur = m;
        loop {
            let (p, tag) = ws.parent[s][cur as usize];
            if p == u32::MAX {
                break;
            }
            if tag & SHORTCUT_TAG != 0 {
                let sc = &self.idx.shortcuts[(tag & !SHORTCUT_TAG) as usize];
                if s == 0 {
                    out.extend(sc.bypassed.iter().rev());
                } else {
                    out.extend(sc.bypassed.iter());
                }
            }
            out.push(p);
            cur = p;
        }
        out
    }
}

/// Per-thread scratch for [`QueryGraph`] searches; cleared lazily.
pub struct QueryWorkspace {
    dist: [Vec<Cost>; 2],
    parent: [Vec<(VertexId, u32)>; 2],
    settled: [Vec<bool>; 2],
    touched: Vec<VertexId>,
    heap: [BinaryHeap<HeapEntry>; 2],
    /// Number of point queries answered so far.
    pub queries: u64,
}

impl QueryWorkspace {
    pub fn new(n: usize) -> Self {
        QueryWorkspace {
            dist: [vec![INF; n], vec![INF; n]],
            parent: [vec![NO_PARENT; n], vec![NO_PARENT; n]],
            settled: [vec![false; n], vec![false; n]],
            touched: Vec::new(),
            heap: [BinaryHeap::new(), BinaryHeap::new()],
            queries: 0,
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            for s in 0..2 {
                self.dist[s][v as usize] = INF;
                self.parent[s][v as usize] = NO_PARENT;
                self.settled[s][v as usize] = false;
            }
        }
        self.touched.clear();
        self.heap[0].clear();
        self.heap[1].clear();
    }

    fn label(&mut self, s: usize, v: VertexId, c: Cost, parent: (VertexId, u32)) {
        if self.dist[0][v as usize] == INF && self.dist[1][v as usize] == INF {
            self.touched.push(v);
        }
        self.dist[s][v as usize] = c;
        self.parent[s][v as usize] = parent;
        self.heap[s].push(HeapEntry { cost: c, v });
    }

    fn top(&self, s: usize) -> Cost {
        self.heap[s].peek().map_or(INF, |e| e.cost)
    }
}

/// One-off convenience wrapper around [`QueryGraph::distance`].
pub fn re_distance(g: &Graph, idx: &ReachIndex, u: VertexId, w: VertexId) -> Cost {
    let q = QueryGraph::new(g, idx);
    let mut ws = q.workspace();
    q.distance(&mut ws, u, w)
}
