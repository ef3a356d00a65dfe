//! Checks pipeline output against the brute-force oracle.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{Cost, Graph, VertexId};
use crate::lo::reconstruct;
use crate::oracle::{enumerate_via_paths, local_optimality_factor, DistanceMemo};
use crate::params::RevcParams;
use crate::pipeline::PipelineOutput;
use crate::trees::TreeSet;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MissCause {
    /// No vertex of the path is in both trees with its path distances.
    NotScannedFromBoth,
    /// Scanned from both sides, but no edge of the path carries both marks.
    NoTwoSidedEdge,
    /// Represented by a via edge, yet not returned.
    Rejected,
    /// Dropped by the length deduplication because another route of the pair
    /// has the same length within tolerance.
    MergedByLength,
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteIssue {
    pub origin: VertexId,
    pub destination: VertexId,
    pub via: VertexId,
    pub length: Cost,
    pub exact_factor: f64,
    pub cause: Option<MissCause>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CompareReport {
    pub pairs: usize,
    pub pipeline_routes: usize,
    /// Oracle routes with factor at least `alpha` within the length bound.
    pub oracle_admissible: usize,
    /// Returned routes with factor below `alpha * gamma`.
    pub spurious: Vec<RouteIssue>,
    /// Missing routes with factor at least `alpha * delta`.
    pub missing: Vec<RouteIssue>,
    /// Missing admissible routes (factor at least `alpha`), any cause.
    pub missing_admissible: Vec<RouteIssue>,
    /// Returned routes that the oracle does not consider admissible.
    pub extra: Vec<RouteIssue>,
    /// Admissible routes without a vertex scanned from both endpoints.
    pub tree_incomplete: usize,
    /// Admissible routes lost only because no edge is marked from both sides.
    pub two_sided_exclusions: usize,
    /// Admissible routes lost to a length tie with a surviving candidate.
    pub length_merges: usize,
}

impl CompareReport {
    /// No spurious routes and every high-factor miss is a two-sided-edge
    /// exclusion.
    pub fn sandwich_holds(&self) -> bool {
        self.spurious.is_empty() && self.missing.iter().all(RouteIssue::excused)
    }

    /// Returned set equals the admissible set up to two-sided-edge
    /// exclusions.
    pub fn exact_match(&self) -> bool {
        self.extra.is_empty() && self.missing_admissible.iter().all(RouteIssue::excused)
    }
}

impl RouteIssue {
    /// Misses that the method accepts by construction.
    pub fn excused(&self) -> bool {
        matches!(self.cause, Some(MissCause::NoTwoSidedEdge | MissCause::MergedByLength))
    }
}

/// A route is represented by vertex `u` when the tree paths of both
/// endpoints through `u` are exactly the route's prefix and suffix. It can
/// only be returned through an edge whose tail and head both represent it.
fn classify(g: &Graph, trees: &TreeSet, s: usize, t: usize, seq: &[VertexId]) -> MissCause {
    let (ft, bt) = (&trees.forward[s], &trees.backward[t]);
    let represents: Vec<bool> = (0..seq.len())
        .map(|i| {
            let u = seq[i];
            if ft.get(u).is_none() || bt.get(u).is_none() {
                return false;
            }
            let mut prefix = ft.chain(u);
            prefix.reverse();
            prefix == seq[..=i] && bt.chain(u) == seq[i..]
        })
        .collect();
    if !represents.contains(&true) {
        return MissCause::NotScannedFromBoth;
    }
    let marked = (1..seq.len()).any(|i| {
        let e = g.edge_between(seq[i - 1], seq[i]).expect("edge") as usize;
        represents[i - 1] && represents[i] && trees.scan.origins.get(e, s) && trees.scan.destinations.get(e, t)
    });
    if marked {
        MissCause::Rejected
    } else {
        MissCause::NoTwoSidedEdge
    }
}

/// Oracle comparison over every pair the pipeline tested.
pub fn compare(g: &Graph, out: &PipelineOutput, params: &RevcParams) -> CompareReport {
    let ep = &out.endpoints;
    let pairs: Vec<(usize, usize)> =
        (0..ep.origins.len()).flat_map(|i| ep.pairs.ones(i).map(move |j| (i, j))).collect();
    let parts: Vec<CompareReport> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (s, t) = (ep.origins[i], ep.destinations[j]);
            let d = out.distances.get(i, j);
            let mut rep = CompareReport { pairs: 1, ..Default::default() };
            let mut memo = DistanceMemo::default();
            let returned: Vec<_> =
                out.routes.iter().filter(|r| (r.s_ord as usize, r.t_ord as usize) == (i, j)).collect();
            rep.pipeline_routes = returned.len();
            let oracle = enumerate_via_paths(g, s, t);
            let mut admissible: HashSet<&[VertexId]> = HashSet::new();
            let got: HashSet<&[VertexId]> = returned.iter().map(|r| r.vertices.as_slice()).collect();
            let merged: HashSet<Vec<VertexId>> = out
                .dedup
                .merged
                .iter()
                .map(|(_, c)| c)
                .filter(|c| (c.s as usize, c.t as usize) == (i, j))
                .map(|c| reconstruct(&out.trees, c.s, c.v, c.t))
                .filter(|seq| !got.contains(seq.as_slice()))
                .collect();
            let issue = |via, length, exact_factor, cause| RouteIssue { origin: s, destination: t, via, length, exact_factor, cause };
            for o in &oracle {
                if o.length > params.beta * d * (1.0 + TOL) {
                    continue;
                }
                let f = local_optimality_factor(g, &o.vertices, &mut memo);
                if f < params.alpha {
                    continue;
                }
                admissible.insert(&o.vertices);
                rep.oracle_admissible += 1;
                if got.contains(o.vertices.as_slice()) {
                    continue;
                }
                let cause = if merged.contains(o.vertices.as_slice()) {
                    MissCause::MergedByLength
                } else {
                    classify(g, &out.trees, i, j, &o.vertices)
                };
                match cause {
                    MissCause::NotScannedFromBoth => rep.tree_incomplete += 1,
                    MissCause::NoTwoSidedEdge => rep.two_sided_exclusions += 1,
                    MissCause::MergedByLength => rep.length_merges += 1,
                    MissCause::Rejected => {}
                }
                let is = issue(o.via, o.length, f, Some(cause));
                if f >= params.alpha * params.delta * (1.0 + TOL) {
                    rep.missing.push(is.clone());
                }
                rep.missing_admissible.push(is);
            }
            for r in returned {
                let f = local_optimality_factor(g, &r.vertices, &mut memo);
                if f < params.alpha * params.gamma * (1.0 - TOL) {
                    rep.spurious.push(issue(r.via, r.length, f, None));
                }
                if !admissible.contains(r.vertices.as_slice()) {
                    rep.extra.push(issue(r.via, r.length, f, None));
                }
            }
            rep
        })
        .collect();
    let mut total = CompareReport::default();
    for p in parts {
        total.pairs += p.pairs;
        total.pipeline_routes += p.pipeline_routes;
        total.oracle_admissible += p.oracle_admissible;
        total.spurious.extend(p.spurious);
        total.missing.extend(p.missing);
        total.missing_admissible.extend(p.missing_admissible);
        total.extra.extend(p.extra);
        total.tree_incomplete += p.tree_incomplete;
        total.two_sided_exclusions += p.two_sided_exclusions;
        total.length_merges += p.length_merges;
    }
    total
}
