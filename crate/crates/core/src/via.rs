//! Via-edge selection: two-sided edges, neighbour dominance, length filter
//! and length-based deduplication of identical via paths.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::bits::{is_subset, ones};
use crate::distance::DistanceMatrix;
use crate::graph::{Cost, EdgeId, Graph, VertexId};
use crate::trees::{Endpoints, ScanRecord, TreeSet};

/// Edges scanned from at least one origin and one destination that form a
/// requested pair. Kept sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViaEdgeSet {
    pub edges: Vec<EdgeId>,
}

impl ViaEdgeSet {
    /// Tails of the member edges, sorted and unique.
    pub fn via_vertices(&self, g: &Graph) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.edges.iter().map(|&e| g.edge(e).tail).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn has_pair(scan: &ScanRecord, ep: &Endpoints, e: usize) -> bool {
    let d = scan.destinations.row(e);
    scan.origins.ones(e).any(|s| ep.pairs.row(s).iter().zip(d).any(|(a, b)| a & b != 0))
}

pub fn collect_via_edges(g: &Graph, scan: &ScanRecord, ep: &Endpoints) -> ViaEdgeSet {
    let edges = (0..g.num_edges())
        .into_par_iter()
        .filter(|&e| scan.origins.any(e) && scan.destinations.any(e) && has_pair(scan, ep, e))
        .map(|e| e as EdgeId)
        .collect();
    ViaEdgeSet { edges }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rel {
    Unrelated,
    Equal,
    Superset,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Pending,
    Kept,
    Removed,
}

struct Dominance<'a> {
    g: &'a Graph,
    scan: &'a ScanRecord,
    member: HashMap<EdgeId, usize>,
    edges: &'a [EdgeId],
    state: Vec<State>,
}

impl Dominance<'_> {
    /// How the sets of `b` relate to those of `a`.
    fn rel(&self, a: EdgeId, b: EdgeId) -> Rel {
        let (a, b) = (a as usize, b as usize);
        let (oa, ob) = (self.scan.origins.row(a), self.scan.origins.row(b));
        let (da, db) = (self.scan.destinations.row(a), self.scan.destinations.row(b));
        if !is_subset(oa, ob) || !is_subset(da, db) {
            Rel::Unrelated
        } else if oa == ob && da == db {
            Rel::Equal
        } else {
            Rel::Superset
        }
    }

    fn neighbours(&self, e: EdgeId, pred: bool) -> Vec<usize> {
        let edge = self.g.edge(e);
        let ids = if pred { self.g.in_edge_ids(edge.tail) } else { self.g.out_edge_ids(edge.head) };
        ids.iter().filter_map(|id| self.member.get(id).copied()).collect()
    }

    /// Walks the chain of equal neighbours from edge slot `k` in one
    /// direction. True if some neighbour along the way covers strictly more,
    /// or an equal neighbour is already settled. Equal pending edges walked
    /// over are removed.
    fn has_superior(&mut self, k: usize, pred: bool) -> bool {
        let mut visited = HashSet::from([k]);
        let mut cur = k;
        loop {
            let e = self.edges[cur];
            let mut next = None;
            let mut settled_equal = false;
            for n in self.neighbours(e, pred) {
                if visited.contains(&n) {
                    continue;
                }
                match self.rel(e, self.edges[n]) {
                    Rel::Superset => return true,
                    Rel::Equal if self.state[n] == State::Pending => {
                        next.get_or_insert(n);
                    }
                    Rel::Equal => settled_equal = true,
                    Rel::Unrelated => {}
                }
            }
            match next {
                Some(n) => {
                    self.state[n] = State::Removed;
                    visited.insert(n);
                    cur = n;
                }
                None => return settled_equal,
            }
        }
    }
}

/// Drops edges whose via paths are also represented by an adjacent edge.
/// Within a maximal run of equal edges exactly one survives, unless the
/// run touches an edge that covers strictly more.
pub fn eliminate_dominated_edges(g: &Graph, scan: &ScanRecord, es: &ViaEdgeSet) -> ViaEdgeSet {
    let member = es.edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let mut d = Dominance { g, scan, member, edges: &es.edges, state: vec![State::Pending; es.edges.len()] };
    for k in 0..es.edges.len() {
        if d.state[k] != State::Pending {
            continue;
        }
        d.state[k] = State::Removed;
        if !d.has_superior(k, true) && !d.has_superior(k, false) {
            d.state[k] = State::Kept;
        }
    }
    let edges = es.edges.iter().zip(&d.state).filter(|(_, s)| **s == State::Kept).map(|(&e, _)| e).collect();
    ViaEdgeSet { edges }
}

/// One origin ordinal, via vertex and destination ordinal with the length
/// of the via path through the two trees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub s: u32,
    pub t: u32,
    pub v: VertexId,
    pub via_len: Cost,
}

/// Per via vertex, `|O_v| * |D_v|` over its out-edges in `es`.
pub fn via_scores(g: &Graph, scan: &ScanRecord, es: &ViaEdgeSet) -> HashMap<VertexId, u64> {
    let mut unions: HashMap<VertexId, (Vec<u64>, Vec<u64>)> = HashMap::new();
    for &e in &es.edges {
        let (o, d) = (scan.origins.row(e as usize), scan.destinations.row(e as usize));
        let u = unions.entry(g.edge(e).tail).or_insert_with(|| (vec![0; o.len()], vec![0; d.len()]));
        u.0.iter_mut().zip(o).for_each(|(a, b)| *a |= b);
        u.1.iter_mut().zip(d).for_each(|(a, b)| *a |= b);
    }
    unions
        .into_iter()
        .map(|(v, (o, d))| (v, ones(&o).count() as u64 * ones(&d).count() as u64))
        .collect()
}

/// All requested `(s, v, t)` with some out-edge of `v` in `es` scanned from
/// both `s` and `t`, sorted by `(s, t, v)`.
pub fn candidates(g: &Graph, trees: &TreeSet, ep: &Endpoints, es: &ViaEdgeSet) -> Vec<Candidate> {
    let mut by_tail: HashMap<VertexId, Vec<EdgeId>> = HashMap::new();
    for &e in &es.edges {
        by_tail.entry(g.edge(e).tail).or_default().push(e);
    }
    let mut tails: Vec<_> = by_tail.into_iter().collect();
    tails.sort_unstable_by_key(|(v, _)| *v);
    let mut out: Vec<Candidate> = tails
        .par_iter()
        .flat_map_iter(|(v, edges)| {
            let mut pairs: Vec<(u32, u32)> = Vec::new();
            for &e in edges {
                let d = trees.scan.destinations.row(e as usize);
                for s in trees.scan.origins.ones(e as usize) {
                    let mask: Vec<u64> = ep.pairs.row(s).iter().zip(d).map(|(a, b)| a & b).collect();
                    pairs.extend(ones(&mask).map(|t| (s as u32, t as u32)));
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            let v = *v;
            pairs.into_iter().map(move |(s, t)| {
                let cs = trees.forward[s as usize].cost(v).expect("via vertex in origin tree");
                let ct = trees.backward[t as usize].cost(v).expect("via vertex in destination tree");
                Candidate { s, t, v, via_len: cs + ct }
            })
        })
        .collect();
    out.sort_unstable_by_key(|c| (c.s, c.t, c.v));
    out
}

/// Keeps candidates with `via_len <= beta * d(s, t) * (1 + tol)`.
pub fn filter_by_length(cands: Vec<Candidate>, dm: &DistanceMatrix, beta: f64, tol: f64) -> Vec<Candidate> {
    cands
        .into_iter()
        .filter(|c| c.via_len <= beta * dm.get(c.s as usize, c.t as usize) * (1.0 + tol))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct DedupOutcome {
    pub kept: Vec<Candidate>,
    /// `(index into kept of the representative, dropped candidate)`.
    pub merged: Vec<(usize, Candidate)>,
}

/// Per `(s, t)`, keeps one candidate per class of lengths equal within
/// `tol * via_len`. Representatives are picked greedily by descending score,
/// then ascending vertex id. Input must be grouped by `(s, t)`.
pub fn dedup_by_length(cands: &[Candidate], scores: &HashMap<VertexId, u64>, tol: f64) -> DedupOutcome {
    let groups: Vec<&[Candidate]> = cands.chunk_by(|a, b| (a.s, a.t) == (b.s, b.t)).collect();
    let parts: Vec<(Vec<Candidate>, Vec<(usize, Candidate)>)> = groups
        .par_iter()
        .map(|grp| {
            let mut order: Vec<&Candidate> = grp.iter().collect();
            order.sort_by_key(|c| (std::cmp::Reverse(scores.get(&c.v).copied().unwrap_or(0)), c.v));
            let top = grp.iter().map(|c| c.via_len).fold(0.0, f64::max);
            let width = (tol * top).max(f64::MIN_POSITIVE);
            let mut buckets: HashMap<i64, Vec<usize>> = HashMap::new();
            let (mut kept, mut merged): (Vec<Candidate>, Vec<(usize, Candidate)>) = (Vec::new(), Vec::new());
            for c in order {
                let k = (c.via_len / width).floor() as i64;
                let hit = (k - 1..=k + 1)
                    .filter_map(|b| buckets.get(&b))
                    .flatten()
                    .copied()
                    .find(|&i| (kept[i].via_len - c.via_len).abs() <= width);
                match hit {
                    Some(i) => merged.push((i, *c)),
                    None => {
                        buckets.entry(k).or_default().push(kept.len());
                        kept.push(*c);
                    }
                }
            }
            (kept, merged)
        })
        .collect();
    let mut out = DedupOutcome::default();
    for (kept, merged) in parts {
        let base = out.kept.len();
        out.merged.extend(merged.into_iter().map(|(i, c)| (base + i, c)));
        out.kept.extend(kept);
    }
    out
}

/// Passes candidates through unchanged, for the ablation without dedup.
pub fn no_dedup(cands: Vec<Candidate>) -> DedupOutcome {
    DedupOutcome { kept: cands, merged: Vec::new() }
}
