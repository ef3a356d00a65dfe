mod args;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use log::{info, warn};
use revc::bench::{run_scenarios, summary_csv, Scenario, SweepPoint};
use revc::compare::compare;
use revc::distance::DistanceMatrix;
use revc::io::{read_od_pairs, write_jsonl, write_od_pairs, OdFile, RouteRecord};
use revc::oracle::{check_size, oracle_admissible};
use revc::params::{Ablation, RevcParams};
use revc::pipeline::{run, PipelineOutput};
use revc::reach::{compute_reach_bounds, ReachIndex};
use revc::sidecar::{self, index_key, IndexKey};
use revc::{synth, Graph, PerturbationSpec, RevcError};

use args::{BenchArgs, Cli, Command, GenerateArgs, GraphArgs, OracleArgs, PreprocessArgs, RoutesArgs};

const SHORTCUT_SHARE: f64 = 0.03;

enum Failure {
    Input(RevcError),
    Verification(String),
}

impl From<RevcError> for Failure {
    fn from(e: RevcError) -> Self {
        Failure::Input(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.into())
    }
}

type CliResult = Result<(), Failure>;

/// Raw inputs plus the graph the pipeline runs on.
struct Inputs {
    graph_bytes: Vec<u8>,
    od_bytes: Option<Vec<u8>>,
    perturb: PerturbationSpec,
    cap: f64,
}

fn read(path: &Path) -> Result<Vec<u8>, RevcError> {
    fs::read(path).map_err(|e| RevcError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn parse_od(g: &Graph, bytes: &[u8]) -> Result<OdFile, RevcError> {
    let od = read_od_pairs(g, bytes)?;
    for e in &od.row_errors {
        warn!("skipping OD row: {e}");
    }
    Ok(od)
}

impl Inputs {
    fn load(ga: &GraphArgs, od: Option<&Path>) -> Result<(Self, Graph), RevcError> {
        let graph_bytes = read(&ga.graph)?;
        let raw = Graph::load(graph_bytes.as_slice())?;
        let od_bytes = od.map(read).transpose()?;
        let perturb = PerturbationSpec::new(ga.perturb, ga.seed)?;
        let cap = match (ga.shortcut_cap, &od_bytes) {
            (Some(c), _) if !(c >= 0.0 && c.is_finite()) => {
                return Err(RevcError::InvalidParameter(format!("shortcut cap must be finite and >= 0, got {c}")))
            }
            (Some(c), _) => c,
            (None, Some(b)) => {
                let od = read_od_pairs(&raw, b.as_slice())?;
                let dm = DistanceMatrix::compute(&raw, &od.origins(), &od.destinations());
                SHORTCUT_SHARE * dm.mean_finite().unwrap_or(0.0)
            }
            (None, None) => 0.0,
        };
        Ok((Inputs { graph_bytes, od_bytes, perturb, cap }, raw))
    }

    fn key(&self, trimmed: bool) -> IndexKey {
        let od = if trimmed { self.od_bytes.as_deref() } else { None };
        index_key(&self.graph_bytes, od, &self.perturb, self.cap)
    }

    /// Trims dead ends away from the OD endpoints if asked, then perturbs.
    fn derive(&self, raw: &Graph, trimmed: bool) -> Result<Graph, RevcError> {
        let g = match (&self.od_bytes, trimmed) {
            (Some(b), true) => {
                let od = read_od_pairs(raw, b.as_slice())?;
                let keep: Vec<&str> = od.origins().into_iter().chain(od.destinations()).map(|v| raw.label(v)).collect();
                let t = raw.trim_dead_ends(&keep)?;
                info!("trimmed {} of {} vertices", raw.num_vertices() - t.num_vertices(), raw.num_vertices());
                t
            }
            _ => raw.clone(),
        };
        Ok(if self.perturb.relative_magnitude > 0.0 { g.perturb_costs(&self.perturb) } else { g })
    }
}

fn build_index(g: &Graph, cap: f64) -> ReachIndex {
    let t = Instant::now();
    let idx = compute_reach_bounds(g, cap);
    info!("index for {} vertices with {} shortcuts in {:.2}s", g.num_vertices(), idx.shortcuts.len(), t.elapsed().as_secs_f64());
    idx
}

/// Graph and index for a run. An existing index file decides whether the
/// graph was trimmed; a missing one is created from the trimmed graph.
fn resolve(inputs: &Inputs, raw: &Graph, path: Option<&Path>, force: bool) -> Result<(Graph, ReachIndex), RevcError> {
    let trim_default = inputs.od_bytes.is_some();
    let Some(path) = path else {
        let g = inputs.derive(raw, trim_default)?;
        let idx = build_index(&g, inputs.cap);
        return Ok((g, idx));
    };
    if !path.exists() {
        let g = inputs.derive(raw, trim_default)?;
        let idx = build_index(&g, inputs.cap);
        sidecar::save(path, &inputs.key(trim_default), &idx)?;
        return Ok((g, idx));
    }
    let (stored, idx) = sidecar::read_index(io::BufReader::new(File::open(path)?))?;
    let trimmed = if trim_default && stored == inputs.key(true) {
        true
    } else if stored == inputs.key(false) {
        false
    } else if force {
        warn!("using index {} despite a key mismatch", path.display());
        trim_default
    } else {
        return Err(RevcError::StaleIndex(format!(
            "{} does not match the graph, OD file, perturbation and shortcut cap; rerun preprocess or pass --force-index",
            path.display()
        )));
    };
    let g = inputs.derive(raw, trimmed)?;
    if idx.bound.len() != g.num_vertices() {
        return Err(RevcError::StaleIndex(format!(
            "{} covers {} vertices, the graph has {}",
            path.display(),
            idx.bound.len(),
            g.num_vertices()
        )));
    }
    info!("loaded index {}", path.display());
    Ok((g, idx))
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, RevcError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| RevcError::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn warn_dropped(out: &PipelineOutput) {
    let r = &out.report;
    if r.pairs_same_vertex > 0 {
        warn!("{} pairs with origin equal to destination yield no routes", r.pairs_same_vertex);
    }
    if r.pairs_unreachable > 0 {
        warn!("{} unreachable pairs skipped", r.pairs_unreachable);
    }
}

fn cmd_preprocess(a: &PreprocessArgs) -> CliResult {
    let (inputs, raw) = Inputs::load(&a.graph, a.od.as_deref())?;
    let trimmed = inputs.od_bytes.is_some();
    let key = inputs.key(trimmed);
    let path = a.output.clone().unwrap_or_else(|| {
        let mut p = a.graph.graph.clone().into_os_string();
        p.push(".revcidx");
        PathBuf::from(p)
    });
    match sidecar::load_checked(&path, &key, false) {
        Ok(Some(_)) if !a.force_index => {
            eprintln!("index {} is up to date", path.display());
            return Ok(());
        }
        Err(RevcError::StaleIndex(m)) if !a.force_index => return Err(RevcError::StaleIndex(m).into()),
        _ => {}
    }
    let g = inputs.derive(&raw, trimmed)?;
    let idx = build_index(&g, inputs.cap);
    sidecar::save(&path, &key, &idx)?;
    eprintln!(
        "wrote {} ({} vertices, {} shortcuts, cap {})",
        path.display(),
        g.num_vertices(),
        idx.shortcuts.len(),
        inputs.cap
    );
    Ok(())
}

fn cmd_routes(a: &RoutesArgs) -> CliResult {
    let params = a.params.params()?;
    let (inputs, raw) = Inputs::load(&a.graph, Some(&a.od))?;
    let (g, idx) = resolve(&inputs, &raw, a.index.as_deref(), a.force_index)?;
    let od = parse_od(&g, inputs.od_bytes.as_deref().unwrap_or_default())?;
    let out = run(&g, &idx, &od.pairs, &params)?;
    warn_dropped(&out);
    let records: Vec<RouteRecord> = out.routes.iter().map(|r| RouteRecord::from_route(&g, r)).collect();
    let mut w = sink(a.output.as_ref())?;
    write_jsonl(&records, &mut w)?;
    w.flush()?;
    if let Some(p) = &a.report {
        fs::write(p, serde_json::to_string_pretty(&out.report).map_err(io::Error::from)?)?;
    }
    eprintln!(
        "{} routes for {} pairs in {:.3}s",
        out.report.routes,
        out.report.pairs_tested,
        out.report.timings.total
    );
    Ok(())
}

fn sweep(a: &BenchArgs) -> Result<Vec<SweepPoint>, RevcError> {
    let base: Ablation = a.ablation.into();
    let mut points = Vec::new();
    for &alpha in &a.alphas {
        for &beta in &a.betas {
            for &gamma in &a.gammas {
                for &delta in &a.deltas {
                    let p = RevcParams::new(alpha, beta, gamma, delta)?.with_ablation(base);
                    let label = format!("a{alpha}_b{beta}_g{gamma}_d{delta}");
                    if a.ablation_sweep {
                        for name in Ablation::NAMES {
                            let p = p.with_ablation(Ablation::single(name).expect("known switch"));
                            points.push(SweepPoint { label: format!("{label}+{name}"), params: p });
                        }
                    }
                    points.push(SweepPoint { label, params: p });
                }
            }
        }
    }
    Ok(points)
}

fn cmd_bench(a: &BenchArgs) -> CliResult {
    let points = sweep(a)?;
    let (inputs, raw) = Inputs::load(&a.graph, None)?;
    let (g, idx) = resolve(&inputs, &raw, a.index.as_deref(), a.force_index)?;
    if a.compare {
        check_size(&g, false)?;
    }
    let scenario =
        Scenario { origins: a.origins, destinations: a.destinations, repetitions: a.repetitions, seed: a.scenario_seed };
    let reports = run_scenarios(&g, &idx, &scenario, &points, a.compare)?;
    if let Some(p) = &a.runs {
        write_jsonl(&reports, sink(Some(p))?)?;
    }
    let mut w = sink(a.output.as_ref())?;
    w.write_all(summary_csv(&reports).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> CliResult {
    let params = a.params.params()?;
    let (inputs, raw) = Inputs::load(&a.graph, Some(&a.od))?;
    let g = inputs.derive(&raw, false)?;
    check_size(&g, a.force)?;
    let od = parse_od(&g, inputs.od_bytes.as_deref().unwrap_or_default())?;
    let mut records = Vec::new();
    for &(s, t) in &od.pairs {
        if s == t {
            warn!("pair {} -> {} has no routes", g.label(s), g.label(t));
            continue;
        }
        let mut routes = oracle_admissible(&g, s, t, params.alpha, params.beta);
        routes.sort_by(|x, y| x.length.total_cmp(&y.length).then(x.via.cmp(&y.via)));
        records.extend(routes.iter().map(|r| RouteRecord::from_oracle(&g, r)));
    }
    let mut w = sink(a.output.as_ref())?;
    write_jsonl(&records, &mut w)?;
    w.flush()?;
    eprintln!("{} oracle routes for {} pairs", records.len(), od.pairs.len());
    if !a.compare {
        return Ok(());
    }
    let idx = build_index(&g, inputs.cap);
    let out = run(&g, &idx, &od.pairs, &params)?;
    warn_dropped(&out);
    let c = compare(&g, &out, &params);
    let not_excused = c.missing.iter().filter(|m| !m.excused()).count();
    eprintln!("pipeline routes:               {}", c.pipeline_routes);
    eprintln!("oracle admissible routes:      {}", c.oracle_admissible);
    eprintln!("spurious (factor < alpha*gamma): {}", c.spurious.len());
    eprintln!("missing (factor >= alpha*delta): {} ({} unexplained)", c.missing.len(), not_excused);
    eprintln!("two-sided edge exclusions:     {}", c.two_sided_exclusions);
    eprintln!("length-tie merges:             {}", c.length_merges);
    if c.sandwich_holds() {
        eprintln!("verdict: PASS");
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} spurious and {not_excused} unexplained missing routes", c.spurious.len())))
    }
}

fn cmd_generate(a: &GenerateArgs) -> CliResult {
    let g = synth::random_road_graph(a.vertices, a.seed);
    fs::write(&a.output, g.to_tsv())?;
    if let Some(p) = &a.od {
        let (o, d) = synth::random_endpoints(&g, a.endpoints, a.endpoints, a.seed);
        let pairs: Vec<_> = o.iter().flat_map(|&s| d.iter().map(move |&t| (s, t))).collect();
        write_od_pairs(&g, &pairs, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match &cli.command {
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Routes(a) => cmd_routes(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(2)
        }
    }
}
