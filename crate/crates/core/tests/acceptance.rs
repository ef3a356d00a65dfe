//! End-to-end acceptance checks. Runs as a plain binary so that the verdict
//! lines always reach the test log; exits non-zero if any check fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use revc::compare::{compare, CompareReport};
use revc::dijkstra::distances;
use revc::distance::DistanceMatrix;
use revc::graph::{Direction, Graph, PerturbationSpec, VertexId};
use revc::io::{write_jsonl, RouteRecord};
use revc::params::{Ablation, RevcParams};
use revc::pipeline::{run, PipelineOutput};
use revc::query::re_distance;
use revc::reach::{compute_reach_bounds, exact_reaches, ReachIndex};
use revc::synth;

const GRAPHS: u64 = 20;
const ENDPOINTS: usize = 5;

struct Case {
    g: Graph,
    pairs: Vec<(VertexId, VertexId)>,
    /// Index with shortcuts capped at 3% of the mean pair distance.
    idx: ReachIndex,
    /// Index without shortcuts.
    plain: ReachIndex,
}

fn cases() -> Vec<Case> {
    (0..GRAPHS)
        .into_par_iter()
        .map(|seed| {
            let g = common::random_case(seed);
            let (o, d) = synth::random_endpoints(&g, ENDPOINTS, ENDPOINTS, seed);
            let mean = DistanceMatrix::compute(&g, &o, &d).mean_finite().unwrap_or(0.0);
            let idx = compute_reach_bounds(&g, 0.03 * mean);
            let plain = compute_reach_bounds(&g, 0.0);
            Case { pairs: common::all_pairs(&o, &d), g, idx, plain }
        })
        .collect()
}

fn sum(reports: &[CompareReport]) -> CompareReport {
    let mut t = CompareReport::default();
    for r in reports {
        t.pairs += r.pairs;
        t.pipeline_routes += r.pipeline_routes;
        t.oracle_admissible += r.oracle_admissible;
        t.spurious.extend(r.spurious.iter().cloned());
        t.missing.extend(r.missing.iter().cloned());
        t.missing_admissible.extend(r.missing_admissible.iter().cloned());
        t.extra.extend(r.extra.iter().cloned());
        t.tree_incomplete += r.tree_incomplete;
        t.two_sided_exclusions += r.two_sided_exclusions;
        t.length_merges += r.length_merges;
    }
    t
}

fn sequences(out: &PipelineOutput) -> BTreeSet<(VertexId, VertexId, Vec<VertexId>)> {
    out.routes.iter().map(|r| (r.origin, r.destination, r.vertices.clone())).collect()
}

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn sandwich(cs: &[Case], tree_incomplete: &mut usize) -> Verdict {
    let start = Instant::now();
    let p = RevcParams::default();
    let reports: Vec<CompareReport> =
        cs.par_iter().map(|c| compare(&c.g, &run(&c.g, &c.idx, &c.pairs, &p).unwrap(), &p)).collect();
    let t = sum(&reports);
    let secs = start.elapsed().as_secs_f64();
    *tree_incomplete += t.tree_incomplete;
    let non_excused = t
        .missing
        .iter()
        .filter(|m| !m.excused())
        .count();
    Verdict {
        id: 1,
        name: "oracle sandwich",
        pass: reports.iter().all(CompareReport::sandwich_holds) && secs < 300.0,
        detail: format!(
            "{} pairs, {} routes, {} spurious, {} missing above alpha*delta ({} not excused), {} two-sided exclusions, {} length merges, {secs:.1}s",
            t.pairs,
            t.pipeline_routes,
            t.spurious.len(),
            t.missing.len(),
            non_excused,
            t.two_sided_exclusions,
            t.length_merges
        ),
    }
}

fn exact_mode(cs: &[Case], tree_incomplete: &mut usize) -> Verdict {
    let p = RevcParams::new(0.2, 1.5, 1.0, 1.0).unwrap();
    let reports: Vec<CompareReport> =
        cs.par_iter().map(|c| compare(&c.g, &run(&c.g, &c.plain, &c.pairs, &p).unwrap(), &p)).collect();
    let t = sum(&reports);
    *tree_incomplete += t.tree_incomplete;
    let excused = t.two_sided_exclusions + t.length_merges;
    Verdict {
        id: 2,
        name: "exact-mode equivalence",
        pass: reports.iter().all(CompareReport::exact_match),
        detail: format!(
            "{} admissible, {} returned, {} extra, {} missing ({} two-sided exclusions = {:.1}%, {} length merges)",
            t.oracle_admissible,
            t.pipeline_routes,
            t.extra.len(),
            t.missing_admissible.len(),
            t.two_sided_exclusions,
            100.0 * t.two_sided_exclusions as f64 / t.oracle_admissible.max(1) as f64,
            excused - t.two_sided_exclusions
        ),
    }
}

fn tree_completeness(cs: &[Case], mut incomplete: usize) -> Verdict {
    // Beyond the two runs above, a sweep over the parameters that drive the
    // tree height.
    let extra: usize = [(0.1, 1.2), (0.3, 2.0), (0.5, 1.1), (0.05, 1.0)]
        .par_iter()
        .map(|&(a, b)| {
            let p = RevcParams::new(a, b, 1.0, 1.0).unwrap();
            cs.iter().map(|c| compare(&c.g, &run(&c.g, &c.idx, &c.pairs, &p).unwrap(), &p).tree_incomplete).sum::<usize>()
        })
        .sum();
    incomplete += extra;
    Verdict {
        id: 3,
        name: "tree-bound completeness",
        pass: incomplete == 0,
        detail: format!("{incomplete} admissible routes without a vertex scanned from both endpoints over 6 parameter settings"),
    }
}

fn reach_soundness() -> Verdict {
    let violations: Vec<usize> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let g = synth::random_road_graph(100 + (seed as usize * 11) % 101, 100 + seed);
            let exact = exact_reaches(&g);
            [0.0, 1.0, 5.0]
                .iter()
                .map(|&cap| {
                    let idx = compute_reach_bounds(&g, cap);
                    idx.bound.iter().zip(&exact).filter(|(b, r)| **b < **r * (1.0 - 1e-12)).count()
                })
                .sum()
        })
        .collect();
    let total: usize = violations.iter().sum();
    Verdict {
        id: 4,
        name: "reach soundness",
        pass: total == 0,
        detail: format!("10 graphs of 100-200 vertices, 3 shortcut caps each, {total} violations"),
    }
}

fn query_correctness(cs: &[Case]) -> Verdict {
    let bad: usize = cs
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let n = c.g.num_vertices() as VertexId;
            let mut bad = 0;
            let mut done = 0;
            while done < 1000 {
                let s = rng.gen_range(0..n);
                let exact = distances(&c.g, s, Direction::Forward);
                for _ in 0..50 {
                    let t = rng.gen_range(0..n);
                    if re_distance(&c.g, &c.idx, s, t) != exact[t as usize] {
                        bad += 1;
                    }
                    done += 1;
                }
            }
            bad
        })
        .sum();
    Verdict {
        id: 5,
        name: "pruned query correctness",
        pass: bad == 0,
        detail: format!("{} queries on shortcut-augmented graphs, {bad} differ from plain Dijkstra", 1000 * cs.len()),
    }
}

fn query_budget(cs: &[Case]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for delta in [1.1, 1.25, 1.5, 2.0] {
        let p = RevcParams::new(0.2, 1.5, 0.9, delta).unwrap();
        let budget = p.query_budget().unwrap();
        let worst = cs.par_iter().map(|c| run(&c.g, &c.idx, &c.pairs, &p).unwrap().report.lo.max_queries_per_test).max().unwrap();
        pass &= worst <= budget;
        parts.push(format!("delta {delta}: max {worst} of {budget}"));
    }
    Verdict { id: 6, name: "delta-test query budget", pass, detail: parts.join(", ") }
}

fn trends() -> Verdict {
    let g = synth::random_road_graph(1000, 7).perturb_costs(&PerturbationSpec::new(1e-6, 7).unwrap());
    let idx = compute_reach_bounds(&g, 0.0);
    let pairs = common::endpoints(&g, 20, 7);
    let mean = |a: f64, b: f64| {
        let p = RevcParams::new(a, b, 1.0, 1.0).unwrap();
        let out = run(&g, &idx, &pairs, &p).unwrap();
        out.routes.len() as f64 / out.report.pairs_tested.max(1) as f64
    };
    let by_alpha: Vec<f64> = [0.1, 0.2, 0.3, 0.5].par_iter().map(|&a| mean(a, 1.5)).collect();
    let by_beta: Vec<f64> = [1.1, 1.5, 2.0].par_iter().map(|&b| mean(0.2, b)).collect();
    let dec = by_alpha.windows(2).all(|w| w[1] < w[0]);
    let inc = by_beta.windows(2).all(|w| w[1] > w[0]);
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" > ");
    Verdict {
        id: 7,
        name: "qualitative trends",
        pass: dec && inc,
        detail: format!(
            "{} vertices, routes per pair over alpha 0.1..0.5: {}; over beta 1.1..2.0: {}",
            g.num_vertices(),
            fmt(&by_alpha),
            fmt(&by_beta).replace(" > ", " < ")
        ),
    }
}

fn batching(cs: &[Case]) -> Verdict {
    let p = RevcParams::new(0.2, 1.5, 1.0, 1.1).unwrap();
    let solo = p.with_ablation(Ablation { no_batch_lo: true, no_sp_cache: true, ..Default::default() });
    let diffs: Vec<usize> = cs
        .par_iter()
        .map(|c| {
            let a = sequences(&run(&c.g, &c.idx, &c.pairs, &p).unwrap());
            let b = sequences(&run(&c.g, &c.idx, &c.pairs, &solo).unwrap());
            a.symmetric_difference(&b).count()
        })
        .collect();
    let total: usize = diffs.iter().sum();
    Verdict {
        id: 8,
        name: "batching consistency",
        pass: total == 0,
        detail: format!("gamma 1, delta 1.1: {total} routes differ between batched and individual testing on {} graphs", cs.len()),
    }
}

fn jsonl(c: &Case, p: &RevcParams) -> Vec<u8> {
    let out = run(&c.g, &c.idx, &c.pairs, p).unwrap();
    let recs: Vec<RouteRecord> = out.routes.iter().map(|r| RouteRecord::from_route(&c.g, r)).collect();
    let mut buf = Vec::new();
    write_jsonl(&recs, &mut buf).unwrap();
    buf
}

fn determinism(cs: &[Case]) -> Verdict {
    let p = RevcParams::default();
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let (one, eight) = (pool(1), pool(8));
    let same = cs[..5].iter().filter(|c| one.install(|| jsonl(c, &p)) == eight.install(|| jsonl(c, &p))).count();
    Verdict {
        id: 9,
        name: "thread-count determinism",
        pass: same == 5,
        detail: format!("{same} of 5 seeds byte-identical between 1 and 8 threads"),
    }
}

fn ablations(cs: &[Case]) -> Verdict {
    let base = RevcParams::default();
    let reference: Vec<_> = cs.par_iter().map(|c| sequences(&run(&c.g, &c.idx, &c.pairs, &base).unwrap())).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in Ablation::NAMES {
        let p = base.with_ablation(Ablation::single(name).unwrap());
        let start = Instant::now();
        let outs: Vec<_> = cs.par_iter().map(|c| run(&c.g, &c.idx, &c.pairs, &p).unwrap()).collect();
        let secs = start.elapsed().as_secs_f64();
        let timed = outs.iter().all(|o| o.report.timings.total > 0.0);
        let pure = matches!(name, "no_dmin_prune" | "no_prune" | "naive_tree_bound" | "no_sp_cache");
        let diff: usize = if pure {
            outs.iter().zip(&reference).map(|(o, r)| sequences(o).symmetric_difference(r).count()).sum()
        } else {
            0
        };
        pass &= timed && diff == 0;
        parts.push(if pure { format!("{name} {secs:.2}s diff {diff}") } else { format!("{name} {secs:.2}s") });
    }
    Verdict { id: 10, name: "ablation harness", pass, detail: parts.join(", ") }
}

fn main() {
    let start = Instant::now();
    let cs = cases();
    let mut incomplete = 0;
    let mut verdicts = vec![sandwich(&cs, &mut incomplete), exact_mode(&cs, &mut incomplete)];
    verdicts.push(tree_completeness(&cs, incomplete));
    verdicts.push(reach_soundness());
    verdicts.push(query_correctness(&cs));
    verdicts.push(query_budget(&cs));
    verdicts.push(trends());
    verdicts.push(batching(&cs));
    verdicts.push(determinism(&cs));
    verdicts.push(ablations(&cs));
    let mut failed = 0;
    for v in &verdicts {
        println!("criterion {:>2} {:<28} {}  {}", v.id, v.name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} of {} passed in {:.1}s", verdicts.len() - failed, verdicts.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
