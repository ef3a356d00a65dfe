//! Monte-Carlo scenarios: random endpoint sets reused across parameter
//! settings, with timing, slowdown factor and route statistics.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::compare::compare;
use crate::error::{Result, RevcError};
use crate::graph::{Graph, VertexId};
use crate::params::RevcParams;
use crate::pipeline::{run, PhaseTimings};
use crate::query::QueryGraph;
use crate::reach::ReachIndex;
use crate::synth::random_endpoints;

#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub origins: usize,
    pub destinations: usize,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub label: String,
    pub params: RevcParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub label: String,
    pub repetition: usize,
    pub params: RevcParams,
    pub pairs: usize,
    pub routes: usize,
    pub total_time: f64,
    pub time_per_path: f64,
    /// Time of one point-to-point query per pair on the same graph.
    pub pairwise_time: f64,
    /// `total_time / pairwise_time`.
    pub slowdown: f64,
    pub timings: PhaseTimings,
    pub paths_per_pair_mean: f64,
    /// 10th, 25th, 50th, 75th and 90th percentile of routes per pair.
    pub paths_per_pair_quantiles: [f64; 5],
    /// Mean route length divided by the shortest distance of its pair.
    pub mean_relative_length: f64,
    pub mean_length: f64,
    pub dedup_merges: usize,
    pub queries: u64,
    pub max_queries_per_test: u64,
    /// Oracle mode only: admissible routes lost for lack of a two-sided edge.
    pub two_sided_exclusions: Option<usize>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Wall time of answering every pair with one point-to-point query.
pub fn pairwise_time(g: &Graph, idx: &ReachIndex, pairs: &[(VertexId, VertexId)]) -> f64 {
    let q = QueryGraph::new(g, idx);
    let start = Instant::now();
    let n = g.num_vertices();
    let total: f64 = pairs
        .par_iter()
        .map_init(|| crate::query::QueryWorkspace::new(n), |ws, &(s, t)| q.distance(ws, s, t))
        .filter(|d| d.is_finite())
        .sum();
    std::hint::black_box(total);
    start.elapsed().as_secs_f64().max(1e-9)
}

pub fn run_scenarios(
    g: &Graph,
    idx: &ReachIndex,
    scenario: &Scenario,
    sweep: &[SweepPoint],
    with_oracle: bool,
) -> Result<Vec<RunReport>> {
    if scenario.origins + scenario.destinations > g.num_vertices() {
        return Err(RevcError::InvalidParameter(format!(
            "{} origins and {} destinations exceed the {} vertices of the graph",
            scenario.origins,
            scenario.destinations,
            g.num_vertices()
        )));
    }
    let mut out = Vec::new();
    for rep in 0..scenario.repetitions {
        let (o, d) = random_endpoints(g, scenario.origins, scenario.destinations, scenario.seed.wrapping_add(rep as u64));
        let pairs: Vec<_> = o.iter().flat_map(|&s| d.iter().map(move |&t| (s, t))).collect();
        let pairwise = pairwise_time(g, idx, &pairs);
        for sp in sweep {
            let res = run(g, idx, &pairs, &sp.params)?;
            let r = &res.report;
            let tested = r.pairs_tested.max(1);
            let mut per_pair = vec![0usize; res.endpoints.origins.len() * res.endpoints.destinations.len()];
            for route in &res.routes {
                per_pair[route.s_ord as usize * res.endpoints.destinations.len() + route.t_ord as usize] += 1;
            }
            let mut counts: Vec<f64> = (0..res.endpoints.origins.len())
                .flat_map(|i| res.endpoints.pairs.ones(i).map(move |j| (i, j)).collect::<Vec<_>>())
                .map(|(i, j)| per_pair[i * res.endpoints.destinations.len() + j] as f64)
                .collect();
            counts.sort_by(f64::total_cmp);
            let nr = res.routes.len().max(1) as f64;
            let excl = with_oracle.then(|| compare(g, &res, &sp.params).two_sided_exclusions);
            out.push(RunReport {
                label: sp.label.clone(),
                repetition: rep,
                params: sp.params,
                pairs: r.pairs_tested,
                routes: r.routes,
                total_time: r.timings.total,
                time_per_path: r.timings.total / nr,
                pairwise_time: pairwise,
                slowdown: r.timings.total / pairwise,
                timings: r.timings.clone(),
                paths_per_pair_mean: r.routes as f64 / tested as f64,
                paths_per_pair_quantiles: [0.1, 0.25, 0.5, 0.75, 0.9].map(|q| quantile(&counts, q)),
                mean_relative_length: res.routes.iter().map(|x| x.length / x.shortest).sum::<f64>() / nr,
                mean_length: res.routes.iter().map(|x| x.length).sum::<f64>() / nr,
                dedup_merges: r.dedup_merges,
                queries: r.lo.queries,
                max_queries_per_test: r.lo.max_queries_per_test,
                two_sided_exclusions: excl,
            });
        }
    }
    Ok(out)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len().max(1) as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v.sqrt())
}

/// One CSV row per sweep label with mean and standard deviation of each
/// metric over repetitions.
pub fn summary_csv(reports: &[RunReport]) -> String {
    let metrics: [(&str, fn(&RunReport) -> f64); 9] = [
        ("total_time", |r| r.total_time),
        ("time_per_path", |r| r.time_per_path),
        ("slowdown", |r| r.slowdown),
        ("paths_per_pair", |r| r.paths_per_pair_mean),
        ("mean_length", |r| r.mean_length),
        ("mean_relative_length", |r| r.mean_relative_length),
        ("queries", |r| r.queries as f64),
        ("dedup_merges", |r| r.dedup_merges as f64),
        ("two_sided_exclusions", |r| r.two_sided_exclusions.unwrap_or(0) as f64),
    ];
    let mut s = String::from("label,alpha,beta,gamma,delta,runs");
    for (m, _) in &metrics {
        let _ = write!(s, ",{m}_mean,{m}_std");
    }
    s.push('\n');
    let mut labels: Vec<&str> = Vec::new();
    for r in reports {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    for l in labels {
        let rows: Vec<&RunReport> = reports.iter().filter(|r| r.label == l).collect();
        let p = rows[0].params;
        let _ = write!(s, "{l},{},{},{},{},{}", p.alpha, p.beta, p.gamma, p.delta, rows.len());
        for (_, f) in &metrics {
            let (m, sd) = mean_std(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            let _ = write!(s, ",{m},{sd}");
        }
        s.push('\n');
    }
    s
}
