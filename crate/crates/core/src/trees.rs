//! Height-bounded, reach-pruned shortest-path trees around every origin and
//! destination, with per-edge scan provenance.
//!
//! A pruned vertex does not expand its successors cleanly. Its successors are
//! still labelled, but as *tainted*, and a tainted label only travels as far
//! as the pruned vertex's reach bound allows. Tainted vertices are never part
//! of a tree, yet their labels keep every included cost exact: any shortest
//! path leaving a pruned vertex `v` ends within `bound[v]` of it.

use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;

use crate::bits::BitRows;
use crate::dijkstra::HeapEntry;
use crate::distance::DistanceMatrix;
use crate::graph::{Cost, Direction, EdgeId, Graph, VertexId, INF};
use crate::params::RevcParams;
use crate::reach::ReachIndex;

const HEIGHT_SLACK: f64 = 1e-9;

/// `max((1 - alpha) * beta * m, beta * m / 2)`.
pub fn tree_height_bound(alpha: f64, beta: f64, m: Cost) -> Cost {
    ((1.0 - alpha) * beta * m).max(0.5 * beta * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Origins,
    Destinations,
}

/// The side with fewer endpoints grows first; ties go to the origins.
pub fn direction_order(n_origins: usize, n_destinations: usize) -> (Side, Side) {
    if n_destinations < n_origins {
        (Side::Destinations, Side::Origins)
    } else {
        (Side::Origins, Side::Destinations)
    }
}

/// Requested endpoint combinations. `pairs` has one row per origin ordinal.
#[derive(Debug, Clone)]
pub struct Endpoints {
    pub origins: Vec<VertexId>,
    pub destinations: Vec<VertexId>,
    pub pairs: BitRows,
}

impl Endpoints {
    pub fn all_pairs(origins: Vec<VertexId>, destinations: Vec<VertexId>) -> Self {
        let mut pairs = BitRows::new(origins.len(), destinations.len());
        for i in 0..origins.len() {
            for j in 0..destinations.len() {
                pairs.set(i, j);
            }
        }
        Endpoints { origins, destinations, pairs }
    }

    /// Clears pairs that coincide or cannot be connected; returns how many.
    pub fn drop_degenerate(&mut self, dm: &DistanceMatrix) -> (usize, usize) {
        let (mut same, mut unreachable) = (0, 0);
        let mut pairs = BitRows::new(self.origins.len(), self.destinations.len());
        for i in 0..self.origins.len() {
            for j in self.pairs.ones(i).collect::<Vec<_>>() {
                if self.origins[i] == self.destinations[j] {
                    same += 1;
                } else if !dm.is_reachable(i, j) {
                    unreachable += 1;
                } else {
                    pairs.set(i, j);
                }
            }
        }
        self.pairs = pairs;
        (same, unreachable)
    }

    pub fn num_pairs(&self) -> usize {
        (0..self.origins.len()).map(|i| self.pairs.count(i)).sum()
    }
}

/// Largest (`m`) and smallest (`l`) distance to a requested partner; both
/// `INF` for endpoints without partners.
#[derive(Debug, Clone)]
pub struct EndpointBounds {
    pub m_origin: Vec<Cost>,
    pub l_origin: Vec<Cost>,
    pub m_dest: Vec<Cost>,
    pub l_dest: Vec<Cost>,
}

impl EndpointBounds {
    pub fn new(dm: &DistanceMatrix, ep: &Endpoints) -> Self {
        let (no, nd) = (ep.origins.len(), ep.destinations.len());
        let mut b = EndpointBounds {
            m_origin: vec![f64::NEG_INFINITY; no],
            l_origin: vec![INF; no],
            m_dest: vec![f64::NEG_INFINITY; nd],
            l_dest: vec![INF; nd],
        };
        for i in 0..no {
            for j in ep.pairs.ones(i) {
                let d = dm.get(i, j);
                b.m_origin[i] = b.m_origin[i].max(d);
                b.l_origin[i] = b.l_origin[i].min(d);
                b.m_dest[j] = b.m_dest[j].max(d);
                b.l_dest[j] = b.l_dest[j].min(d);
            }
        }
        for m in b.m_origin.iter_mut().chain(b.m_dest.iter_mut()) {
            if *m == f64::NEG_INFINITY {
                *m = INF;
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEntry {
    pub v: VertexId,
    pub cost: Cost,
    pub parent: Option<VertexId>,
    pub parent_edge: Option<EdgeId>,
    /// False for vertices whose edge was marked but which failed the
    /// second-phase inclusion test.
    pub included: bool,
}

/// Every vertex popped with a clean label, in pop order.
#[derive(Debug, Clone)]
pub struct GrownTree {
    pub root: VertexId,
    pub direction: Direction,
    pub entries: Vec<TreeEntry>,
    index: HashMap<VertexId, u32>,
}

impl GrownTree {
    fn new(root: VertexId, direction: Direction, entries: Vec<TreeEntry>) -> Self {
        let index = entries.iter().enumerate().map(|(i, e)| (e.v, i as u32)).collect();
        GrownTree { root, direction, entries, index }
    }

    pub fn get(&self, v: VertexId) -> Option<&TreeEntry> {
        self.index.get(&v).map(|&i| &self.entries[i as usize])
    }

    pub fn cost(&self, v: VertexId) -> Option<Cost> {
        self.get(v).map(|e| e.cost)
    }

    pub fn is_included(&self, v: VertexId) -> bool {
        self.get(v).is_some_and(|e| e.included)
    }

    /// `v, parent(v), ..., root`; empty if `v` was not scanned.
    pub fn chain(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut cur = self.get(v);
        while let Some(e) = cur {
            out.push(e.v);
            cur = e.parent.and_then(|p| self.get(p));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per directed edge, the origins and destinations it was scanned from.
#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub origins: BitRows,
    pub destinations: BitRows,
}

#[derive(Debug, Clone, Default)]
pub struct TreeStats {
    pub popped: u64,
    pub scanned: u64,
    pub included: u64,
}

#[derive(Debug, Clone)]
pub struct TreeSet {
    pub forward: Vec<GrownTree>,
    pub backward: Vec<GrownTree>,
    pub scan: ScanRecord,
    /// Distance to the closest first-phase endpoint that scanned each vertex.
    pub dmin: Vec<Cost>,
    pub first: Side,
    pub stats: TreeStats,
}

struct Workspace {
    cost: Vec<Cost>,
    parent: Vec<(VertexId, EdgeId)>,
    /// `INF` marks a clean label; otherwise the remaining taint allowance.
    budget: Vec<Cost>,
    settled: Vec<bool>,
    touched: Vec<VertexId>,
    heap: BinaryHeap<HeapEntry>,
}

const NONE: (VertexId, EdgeId) = (u32::MAX, u32::MAX);

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            cost: vec![INF; n],
            parent: vec![NONE; n],
            budget: vec![INF; n],
            settled: vec![false; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.cost[v as usize] = INF;
            self.parent[v as usize] = NONE;
            self.budget[v as usize] = INF;
            self.settled[v as usize] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }

    /// Offers label `nc` to `w`; `budget == INF` means clean. Clean labels win
    /// ties against tainted ones.
    fn offer(&mut self, w: VertexId, nc: Cost, from: (VertexId, EdgeId), budget: Cost) {
        let wi = w as usize;
        if budget < -HEIGHT_SLACK * nc.max(1.0) || self.settled[wi] {
            return;
        }
        if self.cost[wi] == INF {
            self.touched.push(w);
        }
        if nc < self.cost[wi] {
            self.cost[wi] = nc;
            self.parent[wi] = from;
            self.budget[wi] = budget;
            self.heap.push(HeapEntry { cost: nc, v: w });
        } else if nc == self.cost[wi] && budget > self.budget[wi] {
            if budget == INF {
                self.parent[wi] = from;
            }
            self.budget[wi] = budget;
        }
    }
}

#[derive(Clone, Copy)]
enum Phase<'a> {
    First,
    Second { dmin: Option<&'a [Cost]> },
}

struct GrowSpec<'a> {
    g: &'a Graph,
    bound: &'a [Cost],
    direction: Direction,
    alpha: f64,
    phase: Phase<'a>,
}

impl GrowSpec<'_> {
    fn passes(&self, v: VertexId, c: Cost, l: Cost) -> bool {
        let b = self.bound[v as usize];
        if b == INF {
            return true;
        }
        let mut need = c.min(0.5 * self.alpha * c.max(l));
        if let Phase::Second { dmin: Some(d) } = self.phase {
            need = need.min(d[v as usize]);
        }
        b >= need
    }

    fn grow(&self, ws: &mut Workspace, root: VertexId, height: Cost, l: Cost, stats: &mut TreeStats) -> GrownTree {
        ws.reset();
        let mut entries = Vec::new();
        if !height.is_finite() {
            return GrownTree::new(root, self.direction, entries);
        }
        let limit = height * (1.0 + HEIGHT_SLACK);
        ws.offer(root, 0.0, NONE, INF);
        // An edge may straddle the window the height guarantees, so the tree
        // also records vertices whose parent lies within the height. Dijkstra
        // keeps running until every such label is settled, which keeps their
        // costs exact; vertices reached only from beyond are not recorded.
        let mut frontier_end = limit;
        while let Some(HeapEntry { cost: c, v }) = ws.heap.pop() {
            if c > frontier_end {
                break;
            }
            let vi = v as usize;
            if ws.settled[vi] || c > ws.cost[vi] {
                continue;
            }
            ws.settled[vi] = true;
            stats.popped += 1;
            let taint = ws.budget[vi];
            if taint < INF {
                for a in self.g.arcs(v, self.direction) {
                    ws.offer(a.to, c + a.cost, (v, a.edge), taint - a.cost);
                }
                continue;
            }
            let (p, pe) = ws.parent[vi];
            let mut entry = TreeEntry {
                v,
                cost: c,
                parent: (p != u32::MAX).then_some(p),
                parent_edge: (pe != u32::MAX).then_some(pe),
                included: true,
            };
            let record = c <= limit || ws.cost[p as usize] <= limit;
            let expand = self.passes(v, c, l);
            if c <= limit && expand {
                let reach = self.g.arcs(v, self.direction).map(|a| a.cost).fold(0.0, f64::max);
                frontier_end = frontier_end.max(c + reach);
            }
            match self.phase {
                Phase::First => {
                    for a in self.g.arcs(v, self.direction) {
                        let budget = if expand { INF } else { self.bound[vi] - a.cost };
                        ws.offer(a.to, c + a.cost, (v, a.edge), budget);
                    }
                }
                Phase::Second { .. } => {
                    entry.included = expand;
                    for a in self.g.arcs(v, self.direction) {
                        let nc = c + a.cost;
                        let budget = if !expand {
                            self.bound[vi] - a.cost
                        } else if self.passes(a.to, nc, l) {
                            INF
                        } else {
                            self.bound[a.to as usize]
                        };
                        ws.offer(a.to, nc, (v, a.edge), budget);
                    }
                }
            }
            if !record {
                continue;
            }
            stats.scanned += 1;
            if entry.included {
                stats.included += 1;
            }
            entries.push(entry);
        }
        GrownTree::new(root, self.direction, entries)
    }
}

struct SideInput<'a> {
    roots: &'a [VertexId],
    m: &'a [Cost],
    l: &'a [Cost],
    direction: Direction,
}

fn grow_side(
    g: &Graph,
    bound: &[Cost],
    side: &SideInput,
    params: &RevcParams,
    phase: Phase,
    stats: &mut TreeStats,
) -> Vec<GrownTree> {
    let spec = GrowSpec { g, bound, direction: side.direction, alpha: params.alpha, phase };
    let n = g.num_vertices();
    let out: Vec<(GrownTree, TreeStats)> = (0..side.roots.len())
        .into_par_iter()
        .map_init(
            || Workspace::new(n),
            |ws, k| {
                let m = side.m[k];
                let h = if params.ablation.naive_tree_bound {
                    params.beta * m
                } else {
                    tree_height_bound(params.alpha, params.beta, m)
                };
                let mut st = TreeStats::default();
                let t = spec.grow(ws, side.roots[k], h, side.l[k], &mut st);
                (t, st)
            },
        )
        .collect();
    out.into_iter()
        .map(|(t, st)| {
            stats.popped += st.popped;
            stats.scanned += st.scanned;
            stats.included += st.included;
            t
        })
        .collect()
}

fn mark(trees: &[GrownTree], rows: &mut BitRows) {
    for (k, t) in trees.iter().enumerate() {
        for e in &t.entries {
            if let Some(pe) = e.parent_edge {
                rows.set(pe as usize, k);
            }
        }
    }
}

fn dmin_of(n: usize, trees: &[GrownTree]) -> Vec<Cost> {
    let mut d = vec![INF; n];
    for t in trees {
        for e in t.entries.iter().filter(|e| e.included) {
            let slot = &mut d[e.v as usize];
            *slot = slot.min(e.cost);
        }
    }
    d
}

/// Grows both tree families in the order given by [`direction_order`].
pub fn grow_trees(g: &Graph, idx: &ReachIndex, ep: &Endpoints, eb: &EndpointBounds, params: &RevcParams) -> TreeSet {
    let n = g.num_vertices();
    let unbounded;
    let bound: &[Cost] = if params.ablation.no_prune {
        unbounded = vec![INF; n];
        &unbounded
    } else {
        &idx.bound
    };
    let fwd = SideInput { roots: &ep.origins, m: &eb.m_origin, l: &eb.l_origin, direction: Direction::Forward };
    let bwd = SideInput { roots: &ep.destinations, m: &eb.m_dest, l: &eb.l_dest, direction: Direction::Backward };
    let (first, _) = direction_order(ep.origins.len(), ep.destinations.len());
    let (a, b) = match first {
        Side::Origins => (&fwd, &bwd),
        Side::Destinations => (&bwd, &fwd),
    };
    let mut stats = TreeStats::default();
    let first_trees = grow_side(g, bound, a, params, Phase::First, &mut stats);
    let dmin = dmin_of(n, &first_trees);
    let dmin_ref = (!params.ablation.no_dmin_prune).then_some(dmin.as_slice());
    let second_trees = grow_side(g, bound, b, params, Phase::Second { dmin: dmin_ref }, &mut stats);
    let (forward, backward) = match first {
        Side::Origins => (first_trees, second_trees),
        Side::Destinations => (second_trees, first_trees),
    };
    let m = g.num_edges();
    let mut scan = ScanRecord { origins: BitRows::new(m, ep.origins.len()), destinations: BitRows::new(m, ep.destinations.len()) };
    mark(&forward, &mut scan.origins);
    mark(&backward, &mut scan.destinations);
    TreeSet { forward, backward, scan, dmin, first, stats }
}

/// First-phase growth of forward trees from the origins.
pub fn grow_forward_trees(
    g: &Graph,
    idx: &ReachIndex,
    ep: &Endpoints,
    eb: &EndpointBounds,
    params: &RevcParams,
) -> (Vec<GrownTree>, Vec<Cost>) {
    let side = SideInput { roots: &ep.origins, m: &eb.m_origin, l: &eb.l_origin, direction: Direction::Forward };
    let trees = grow_side(g, &idx.bound, &side, params, Phase::First, &mut TreeStats::default());
    let dmin = dmin_of(g.num_vertices(), &trees);
    (trees, dmin)
}

/// Second-phase growth of backward trees into the destinations.
pub fn grow_backward_trees(
    g: &Graph,
    idx: &ReachIndex,
    ep: &Endpoints,
    eb: &EndpointBounds,
    params: &RevcParams,
    dmin: Option<&[Cost]>,
) -> Vec<GrownTree> {
    let side = SideInput { roots: &ep.destinations, m: &eb.m_dest, l: &eb.l_dest, direction: Direction::Backward };
    grow_side(g, &idx.bound, &side, params, Phase::Second { dmin }, &mut TreeStats::default())
}
