use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::{Cost, Direction, EdgeId, Graph, VertexId, INF};

/// Min-heap entry ordered by `(cost, vertex id)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeapEntry {
    pub cost: Cost,
    pub v: VertexId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct SpTree {
    pub root: VertexId,
    pub direction: Direction,
    pub cost: Vec<Cost>,
    pub parent: Vec<Option<VertexId>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub scanned: Vec<bool>,
    /// Scanned vertices in pop order.
    pub order: Vec<VertexId>,
    pub height_bound: Cost,
}

impl SpTree {
    /// `v, parent(v), ..., root`. For a backward tree this is the graph-order
    /// path from `v` to the root.
    pub fn chain(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur as usize] {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Graph-order vertex sequence between the root and `v`.
    pub fn path(&self, v: VertexId) -> Option<Vec<VertexId>> {
        if !self.scanned[v as usize] {
            return None;
        }
        let mut c = self.chain(v);
        if self.direction == Direction::Forward {
            c.reverse();
        }
        Some(c)
    }
}

/// Plain Dijkstra from `root`, stopping once the smallest queued cost
/// exceeds `height_bound`. Equal-cost ties go to the smaller vertex id.
pub fn dijkstra_tree(g: &Graph, root: VertexId, direction: Direction, height_bound: Cost) -> SpTree {
    let n = g.num_vertices();
    let mut cost = vec![INF; n];
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut scanned = vec![false; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    cost[root as usize] = 0.0;
    heap.push(HeapEntry { cost: 0.0, v: root });
    while let Some(HeapEntry { cost: c, v }) = heap.pop() {
        if c > height_bound {
            break;
        }
        if scanned[v as usize] || c > cost[v as usize] {
            continue;
        }
        scanned[v as usize] = true;
        order.push(v);
        for a in g.arcs(v, direction) {
            let nc = c + a.cost;
            if nc < cost[a.to as usize] {
                cost[a.to as usize] = nc;
                parent[a.to as usize] = Some(v);
                parent_edge[a.to as usize] = Some(a.edge);
                heap.push(HeapEntry { cost: nc, v: a.to });
            }
        }
    }
    SpTree { root, direction, cost, parent, parent_edge, scanned, order, height_bound }
}

/// Exact distances from `root` to every vertex (or into `root` when
/// `direction` is backward); unreached vertices hold `INF`.
pub fn distances(g: &Graph, root: VertexId, direction: Direction) -> Vec<Cost> {
    let t = dijkstra_tree(g, root, direction, INF);
    t.cost.iter().zip(&t.scanned).map(|(&c, &s)| if s { c } else { INF }).collect()
}
