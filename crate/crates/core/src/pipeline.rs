//! End-to-end route enumeration for a set of origin-destination pairs.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::distance::DistanceMatrix;
use crate::error::Result;
use crate::graph::{Graph, VertexId};
use crate::lo::{run_step4, AdmissibleRoute, LoStats};
use crate::params::RevcParams;
use crate::query::QueryGraph;
use crate::reach::ReachIndex;
use crate::trees::{grow_trees, EndpointBounds, Endpoints, TreeSet, TreeStats};
use crate::via::{
    candidates, collect_via_edges, dedup_by_length, eliminate_dominated_edges, filter_by_length, no_dedup, via_scores,
    DedupOutcome, ViaEdgeSet,
};

/// Distinct endpoints (sorted by id) and the requested pair mask.
pub fn endpoints_from_pairs(pairs: &[(VertexId, VertexId)]) -> Endpoints {
    let mut origins: Vec<VertexId> = pairs.iter().map(|p| p.0).collect();
    let mut destinations: Vec<VertexId> = pairs.iter().map(|p| p.1).collect();
    origins.sort_unstable();
    origins.dedup();
    destinations.sort_unstable();
    destinations.dedup();
    let mut ep = Endpoints::all_pairs(origins, destinations);
    ep.pairs = crate::bits::BitRows::new(ep.origins.len(), ep.destinations.len());
    let os: HashMap<VertexId, usize> = ep.origins.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let ds: HashMap<VertexId, usize> = ep.destinations.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for &(s, t) in pairs {
        ep.pairs.set(os[&s], ds[&t]);
    }
    ep
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PhaseTimings {
    pub distances: f64,
    pub trees: f64,
    pub via_selection: f64,
    pub local_optimality: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineReport {
    pub pairs_requested: usize,
    pub pairs_same_vertex: usize,
    pub pairs_unreachable: usize,
    pub pairs_tested: usize,
    pub tree_popped: u64,
    pub tree_scanned: u64,
    pub tree_included: u64,
    pub via_edges: usize,
    pub via_edges_after_dominance: usize,
    pub via_vertices: usize,
    pub candidates: usize,
    pub after_length_filter: usize,
    pub after_dedup: usize,
    pub dedup_merges: usize,
    pub lo: LoStats,
    pub routes: usize,
    pub timings: PhaseTimings,
}

pub struct PipelineOutput {
    pub endpoints: Endpoints,
    pub distances: DistanceMatrix,
    pub trees: TreeSet,
    pub via_edges: ViaEdgeSet,
    pub dedup: DedupOutcome,
    pub routes: Vec<AdmissibleRoute>,
    pub report: PipelineReport,
}

/// Runs all steps for the given pairs. Pairs with `s == t` or without any
/// connection are dropped and counted.
pub fn run(g: &Graph, idx: &ReachIndex, pairs: &[(VertexId, VertexId)], params: &RevcParams) -> Result<PipelineOutput> {
    params.validate()?;
    let start = Instant::now();
    let mut report = PipelineReport::default();
    let mut ep = endpoints_from_pairs(pairs);
    report.pairs_requested = ep.num_pairs();

    let t0 = Instant::now();
    let dm = DistanceMatrix::compute(g, &ep.origins, &ep.destinations);
    let (same, unreachable) = ep.drop_degenerate(&dm);
    report.pairs_same_vertex = same;
    report.pairs_unreachable = unreachable;
    report.pairs_tested = ep.num_pairs();
    let eb = EndpointBounds::new(&dm, &ep);
    report.timings.distances = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let trees = grow_trees(g, idx, &ep, &eb, params);
    let TreeStats { popped, scanned, included } = trees.stats;
    (report.tree_popped, report.tree_scanned, report.tree_included) = (popped, scanned, included);
    report.timings.trees = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let all = collect_via_edges(g, &trees.scan, &ep);
    report.via_edges = all.len();
    let ab = params.ablation;
    let es = if ab.no_dedup || ab.no_dedup_neighbours { all } else { eliminate_dominated_edges(g, &trees.scan, &all) };
    report.via_edges_after_dominance = es.len();
    report.via_vertices = es.via_vertices(g).len();
    let cands = candidates(g, &trees, &ep, &es);
    report.candidates = cands.len();
    let cands = filter_by_length(cands, &dm, params.beta, params.length_tol);
    report.after_length_filter = cands.len();
    let dedup = if ab.no_dedup {
        no_dedup(cands)
    } else {
        dedup_by_length(&cands, &via_scores(g, &trees.scan, &es), params.length_tol)
    };
    report.after_dedup = dedup.kept.len();
    report.dedup_merges = dedup.merged.len();
    report.timings.via_selection = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let q = QueryGraph::new(g, idx);
    let (routes, lo) = run_step4(g, &q, &trees, &ep, &dedup.kept, |s, t| dm.get(s as usize, t as usize), params);
    report.lo = lo;
    report.routes = routes.len();
    report.timings.local_optimality = t0.elapsed().as_secs_f64();
    report.timings.total = start.elapsed().as_secs_f64();

    Ok(PipelineOutput { endpoints: ep, distances: dm, trees, via_edges: es, dedup, routes, report })
}
