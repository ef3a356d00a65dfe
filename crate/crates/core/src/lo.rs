//! Approximate local-optimality testing of candidate via paths, with batch
//! rejection and acceptance of paths sharing a tested section.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitRows;
use crate::graph::{Cost, Graph, VertexId};
use crate::params::RevcParams;
use crate::query::{QueryGraph, QueryWorkspace};
use crate::trees::{Endpoints, TreeSet};
use crate::via::Candidate;

/// The part of a via path around `v` that a test has to certify. Positions
/// are signed distances from `v` along the path, increasing towards `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub vertices: Vec<VertexId>,
    pub pos: Vec<Cost>,
    /// Index of the via vertex.
    pub iv: usize,
    /// First and last vertex are the path ends, not threshold vertices.
    pub open_start: bool,
    pub open_end: bool,
}

impl Section {
    /// Builds the section from branches running away from `v`, each given as
    /// `(vertex, distance to v)` starting with `v` itself. A branch is cut at
    /// its first vertex at distance `>= t`.
    pub fn from_branches(s_branch: &[(VertexId, Cost)], t_branch: &[(VertexId, Cost)], t: Cost) -> Self {
        let cut = |b: &[(VertexId, Cost)]| b.iter().position(|&(_, d)| d >= t).map_or((b.len(), true), |i| (i + 1, false));
        let (ns, open_start) = cut(s_branch);
        let (nt, open_end) = cut(t_branch);
        let mut vertices = Vec::with_capacity(ns + nt - 1);
        let mut pos = Vec::with_capacity(ns + nt - 1);
        for &(u, d) in s_branch[..ns].iter().rev() {
            vertices.push(u);
            pos.push(-d);
        }
        for &(w, d) in &t_branch[1..nt] {
            vertices.push(w);
            pos.push(d);
        }
        Section { vertices, pos, iv: ns - 1, open_start, open_end }
    }

    pub fn last(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Smallest `j >= iv` with `pos[j] - pos[i] >= l`, else the last index.
    fn partner_after(&self, i: usize, l: Cost) -> usize {
        let target = self.pos[i] + l;
        let k = self.iv + self.pos[self.iv..].partition_point(|&p| p < target);
        k.min(self.last())
    }

    /// Largest `i <= iv` with `pos[w] - pos[i] >= l`.
    fn partner_before(&self, w: usize, l: Cost) -> Option<usize> {
        let target = self.pos[w] - l;
        let k = self.pos[..=self.iv].partition_point(|&p| p <= target);
        k.checked_sub(1)
    }
}

/// Pairs `(u, w)` around one via vertex known to be joined optimally through
/// it, with the certified distance.
#[derive(Debug, Clone, Default)]
pub struct SectionCache {
    by_start: HashMap<VertexId, Vec<(VertexId, Cost)>>,
}

impl SectionCache {
    pub fn insert(&mut self, u: VertexId, w: VertexId, d: Cost) {
        let e = self.by_start.entry(u).or_default();
        if !e.iter().any(|&(x, _)| x == w) {
            e.push((w, d));
        }
    }

    pub fn len(&self) -> usize {
        self.by_start.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_start.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub verdict: Verdict,
    /// Section indices of the failing pair.
    pub witness: Option<(usize, usize)>,
    pub queries: u32,
    pub cache_hits: u32,
}

impl TestOutcome {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}

/// Decides whether every subpath of the section through `v` with interior
/// shorter than `t` is a shortest path, querying pairs that are up to
/// `delta * t` apart. Exact for `delta == 1`; for larger `delta` a
/// rejection may also come from a subpath with interior below `delta * t`.
pub fn t_delta_test(
    q: &QueryGraph,
    ws: &mut QueryWorkspace,
    sec: &Section,
    t: Cost,
    delta: f64,
    tol: f64,
    mut cache: Option<&mut SectionCache>,
) -> TestOutcome {
    let mut out = TestOutcome { verdict: Verdict::Accepted, witness: None, queries: 0, cache_hits: 0 };
    let k_last = sec.last();
    let index_after: HashMap<VertexId, usize> =
        sec.vertices[sec.iv + 1..].iter().enumerate().map(|(k, &w)| (w, sec.iv + 1 + k)).collect();
    let mut u = 0;
    while u < sec.iv {
        let reach_end = sec.partner_after(u + 1, t);
        let w = sec.partner_after(u, delta * t).max(reach_end);
        let cached = cache.as_deref().and_then(|c| c.by_start.get(&sec.vertices[u])).and_then(|ws| {
            ws.iter().filter_map(|&(x, d)| index_after.get(&x).map(|&j| (j, d))).filter(|&(j, _)| j >= reach_end).max_by_key(|&(j, _)| j)
        });
        let (w, d) = match cached {
            Some(hit) => {
                out.cache_hits += 1;
                hit
            }
            None => {
                out.queries += 1;
                (w, q.distance(ws, sec.vertices[u], sec.vertices[w]))
            }
        };
        let len = sec.pos[w] - sec.pos[u];
        if d < len * (1.0 - tol) {
            out.verdict = Verdict::Rejected;
            out.witness = Some((u, w));
            return out;
        }
        if let Some(c) = cache.as_deref_mut() {
            c.insert(sec.vertices[u], sec.vertices[w], d);
        }
        if w == k_last {
            break;
        }
        u = sec.partner_before(w, t).unwrap_or(u).max(u + 1);
    }
    out
}

/// Per via vertex: branch walks and membership flags of the walked vertices.
#[derive(Debug, Clone)]
pub struct PrepData {
    pub v: VertexId,
    /// Origin ordinals in local order.
    pub origins: Vec<u32>,
    pub destinations: Vec<u32>,
    /// `(vertex, distance to v)` from `v` towards each local origin.
    pub s_branches: Vec<Vec<(VertexId, Cost)>>,
    pub t_branches: Vec<Vec<(VertexId, Cost)>>,
    index: HashMap<VertexId, usize>,
    a_origin: BitRows,
    a_dest: BitRows,
}

impl PrepData {
    fn local_s(&self, s: u32) -> usize {
        self.origins.binary_search(&s).expect("origin of v")
    }

    fn local_t(&self, t: u32) -> usize {
        self.destinations.binary_search(&t).expect("destination of v")
    }

    /// `u` lies on the walked part of the path from origin ordinal `s` to `v`.
    pub fn on_origin_side(&self, u: VertexId, s: u32) -> bool {
        u == self.v || self.index.get(&u).is_some_and(|&i| self.a_origin.get(i, self.local_s(s)))
    }

    pub fn on_dest_side(&self, w: VertexId, t: u32) -> bool {
        w == self.v || self.index.get(&w).is_some_and(|&i| self.a_dest.get(i, self.local_t(t)))
    }
}

/// Walks parents from `v` towards every endpoint of its candidates until the
/// distance exceeds `alpha` times the longest via path of that endpoint.
pub fn prepare_via_vertex(v: VertexId, trees: &TreeSet, cands: &[Candidate], alpha: f64) -> PrepData {
    let mut worst_s: HashMap<u32, Cost> = HashMap::new();
    let mut worst_t: HashMap<u32, Cost> = HashMap::new();
    for c in cands {
        let e = worst_s.entry(c.s).or_insert(0.0);
        *e = e.max(c.via_len);
        let e = worst_t.entry(c.t).or_insert(0.0);
        *e = e.max(c.via_len);
    }
    let mut origins: Vec<u32> = worst_s.keys().copied().collect();
    let mut destinations: Vec<u32> = worst_t.keys().copied().collect();
    origins.sort_unstable();
    destinations.sort_unstable();
    let walk = |tree: &crate::trees::GrownTree, limit: Cost| {
        let cv = tree.cost(v).expect("via vertex scanned");
        let mut out = vec![(v, 0.0)];
        let mut cur = tree.get(v).and_then(|e| e.parent);
        while let Some(u) = cur {
            let e = tree.get(u).expect("parent scanned");
            let d = cv - e.cost;
            out.push((u, d));
            if d > limit {
                break;
            }
            cur = e.parent;
        }
        out
    };
    let s_branches: Vec<_> = origins.iter().map(|&s| walk(&trees.forward[s as usize], alpha * worst_s[&s])).collect();
    let t_branches: Vec<_> = destinations.iter().map(|&t| walk(&trees.backward[t as usize], alpha * worst_t[&t])).collect();
    let mut index = HashMap::new();
    for b in s_branches.iter().chain(&t_branches) {
        for &(u, _) in &b[1..] {
            let n = index.len();
            index.entry(u).or_insert(n);
        }
    }
    let mut a_origin = BitRows::new(index.len(), origins.len());
    let mut a_dest = BitRows::new(index.len(), destinations.len());
    for (k, b) in s_branches.iter().enumerate() {
        for &(u, _) in &b[1..] {
            a_origin.set(index[&u], k);
        }
    }
    for (k, b) in t_branches.iter().enumerate() {
        for &(w, _) in &b[1..] {
            a_dest.set(index[&w], k);
        }
    }
    PrepData { v, origins, destinations, s_branches, t_branches, index, a_origin, a_dest }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TripleState {
    Pending,
    Accepted { guaranteed_alpha: f64, batch: bool },
    Rejected { batch: bool },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LoStats {
    pub probes: u64,
    pub queries: u64,
    pub cache_hits: u64,
    pub max_queries_per_test: u64,
    pub accepted_probed: u64,
    pub accepted_batch: u64,
    pub rejected_probed: u64,
    pub rejected_batch: u64,
    /// Tests whose section ran into a path end before the threshold.
    pub short_sides: u64,
}

impl LoStats {
    fn merge(&mut self, o: &LoStats) {
        self.probes += o.probes;
        self.queries += o.queries;
        self.cache_hits += o.cache_hits;
        self.max_queries_per_test = self.max_queries_per_test.max(o.max_queries_per_test);
        self.accepted_probed += o.accepted_probed;
        self.accepted_batch += o.accepted_batch;
        self.rejected_probed += o.rejected_probed;
        self.rejected_batch += o.rejected_batch;
        self.short_sides += o.short_sides;
    }
}

/// Verdicts for all candidates of one via vertex, in the input order.
pub fn test_via_vertex(
    q: &QueryGraph,
    ws: &mut QueryWorkspace,
    trees: &TreeSet,
    cands: &[Candidate],
    params: &RevcParams,
    stats: &mut LoStats,
) -> Vec<TripleState> {
    let v = cands[0].v;
    let prep = prepare_via_vertex(v, trees, cands, params.alpha);
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&cands[a], &cands[b]);
        x.via_len.total_cmp(&y.via_len).then((x.s, x.t).cmp(&(y.s, y.t)))
    });
    let mut state = vec![TripleState::Pending; cands.len()];
    let mut cache = SectionCache::default();
    let batch = !params.ablation.no_batch_lo;
    for (rank, &i) in order.iter().enumerate() {
        if state[i] != TripleState::Pending {
            continue;
        }
        let c = cands[i];
        let t = params.alpha * c.via_len;
        let sec = Section::from_branches(&prep.s_branches[prep.local_s(c.s)], &prep.t_branches[prep.local_t(c.t)], t);
        let cache_ref = (!params.ablation.no_sp_cache).then_some(&mut cache);
        let out = t_delta_test(q, ws, &sec, t, params.delta, params.lo_tol, cache_ref);
        stats.probes += 1;
        stats.queries += out.queries as u64;
        stats.cache_hits += out.cache_hits as u64;
        stats.max_queries_per_test = stats.max_queries_per_test.max(out.queries as u64);
        stats.short_sides += (sec.open_start || sec.open_end) as u64;
        if out.accepted() {
            state[i] = TripleState::Accepted { guaranteed_alpha: params.alpha, batch: false };
            stats.accepted_probed += 1;
            if !batch {
                continue;
            }
            let (x, y) = (sec.vertices[0], sec.vertices[sec.last()]);
            for &j in &order[rank + 1..] {
                let o = cands[j];
                if state[j] != TripleState::Pending || params.gamma * o.via_len > c.via_len {
                    continue;
                }
                let s_ok = if sec.open_start { o.s == c.s } else { prep.on_origin_side(x, o.s) };
                let t_ok = if sec.open_end { o.t == c.t } else { prep.on_dest_side(y, o.t) };
                if s_ok && t_ok {
                    state[j] = TripleState::Accepted { guaranteed_alpha: params.alpha * params.gamma, batch: true };
                    stats.accepted_batch += 1;
                }
            }
        } else {
            state[i] = TripleState::Rejected { batch: false };
            stats.rejected_probed += 1;
            if !batch {
                continue;
            }
            let (a, b) = out.witness.expect("rejection carries a witness");
            let (u, w) = (sec.vertices[a], sec.vertices[b]);
            for &j in &order[rank + 1..] {
                let o = cands[j];
                if state[j] == TripleState::Pending && prep.on_origin_side(u, o.s) && prep.on_dest_side(w, o.t) {
                    state[j] = TripleState::Rejected { batch: true };
                    stats.rejected_batch += 1;
                }
            }
        }
    }
    state
}

/// A route found by the pipeline. Ordinals index the endpoint lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleRoute {
    pub s_ord: u32,
    pub t_ord: u32,
    pub origin: VertexId,
    pub destination: VertexId,
    pub via: VertexId,
    pub vertices: Vec<VertexId>,
    pub length: Cost,
    pub shortest: Cost,
    pub guaranteed_alpha: f64,
    pub batch_accepted: bool,
}

/// `s -> v -> t` through the two trees.
pub fn reconstruct(trees: &TreeSet, s: u32, v: VertexId, t: u32) -> Vec<VertexId> {
    let mut seq = trees.forward[s as usize].chain(v);
    seq.reverse();
    let back = trees.backward[t as usize].chain(v);
    seq.extend_from_slice(&back[1..]);
    seq
}

/// Tests all candidates, grouped by via vertex, and returns the accepted
/// routes with duplicate vertex sequences removed.
pub fn run_step4(
    g: &Graph,
    q: &QueryGraph,
    trees: &TreeSet,
    ep: &Endpoints,
    cands: &[Candidate],
    shortest: impl Fn(u32, u32) -> Cost + Sync,
    params: &RevcParams,
) -> (Vec<AdmissibleRoute>, LoStats) {
    let mut sorted = cands.to_vec();
    sorted.sort_by_key(|c| (c.v, c.s, c.t));
    let groups: Vec<&[Candidate]> = sorted.chunk_by(|a, b| a.v == b.v).collect();
    let n = g.num_vertices();
    let parts: Vec<(Vec<AdmissibleRoute>, LoStats)> = groups
        .par_iter()
        .map_init(
            || QueryWorkspace::new(n),
            |ws, grp| {
                let mut st = LoStats::default();
                let verdicts = test_via_vertex(q, ws, trees, grp, params, &mut st);
                let routes = grp
                    .iter()
                    .zip(verdicts)
                    .filter_map(|(c, state)| match state {
                        TripleState::Accepted { guaranteed_alpha, batch } => Some(AdmissibleRoute {
                            s_ord: c.s,
                            t_ord: c.t,
                            origin: ep.origins[c.s as usize],
                            destination: ep.destinations[c.t as usize],
                            via: c.v,
                            vertices: reconstruct(trees, c.s, c.v, c.t),
                            length: c.via_len,
                            shortest: shortest(c.s, c.t),
                            guaranteed_alpha,
                            batch_accepted: batch,
                        }),
                        _ => None,
                    })
                    .collect();
                (routes, st)
            },
        )
        .collect();
    let mut stats = LoStats::default();
    let mut routes = Vec::new();
    for (r, st) in parts {
        stats.merge(&st);
        routes.extend(r);
    }
    (dedup_sequences(routes), stats)
}

/// One route per `(s, t, vertex sequence)`: the higher guarantee wins, then
/// the smaller via vertex. Output sorted by `(s, t, length, via)`.
pub fn dedup_sequences(mut routes: Vec<AdmissibleRoute>) -> Vec<AdmissibleRoute> {
    routes.sort_by(|a, b| {
        (a.s_ord, a.t_ord, &a.vertices)
            .cmp(&(b.s_ord, b.t_ord, &b.vertices))
            .then(b.guaranteed_alpha.total_cmp(&a.guaranteed_alpha))
            .then(a.via.cmp(&b.via))
    });
    routes.dedup_by(|b, a| (a.s_ord, a.t_ord, &a.vertices) == (b.s_ord, b.t_ord, &b.vertices));
    routes.sort_by(|a, b| {
        (a.s_ord, a.t_ord).cmp(&(b.s_ord, b.t_ord)).then(a.length.total_cmp(&b.length)).then(a.via.cmp(&b.via))
    });
    routes
}
