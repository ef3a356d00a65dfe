use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use revc::params::{Ablation, RevcParams};

#[derive(Parser, Debug)]
#[command(name = "revc", version, about = "Locally optimal single-via routes between origin and destination sets")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute reach bounds and shortcuts and store them next to the graph.
    Preprocess(PreprocessArgs),
    /// Compute admissible routes for every pair in an OD file.
    Routes(RoutesArgs),
    /// Random-scenario benchmark over a parameter sweep.
    Bench(BenchArgs),
    /// Brute-force admissible routes, optionally checked against the pipeline.
    Oracle(OracleArgs),
    /// Write a synthetic road-like graph and a random OD file.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Tab-separated edge list: from, to, cost and an optional bidirectional flag.
    #[arg(long)]
    pub graph: PathBuf,
    /// Relative magnitude of the random cost perturbation; 0 disables it.
    #[arg(long, default_value_t = 1e-6)]
    pub perturb: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest shortcut added during preprocessing. Defaults to 3% of the
    /// mean origin-destination distance when an OD file is given, else 0.
    #[arg(long)]
    pub shortcut_cap: Option<f64>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.1)]
    pub delta: f64,
    #[command(flatten)]
    pub ablation: AblationArgs,
}

#[derive(Args, Debug, Clone, Copy, Default)]
pub struct AblationArgs {
    /// Drop the closest-origin term from second-phase pruning.
    #[arg(long)]
    pub no_dmin_prune: bool,
    /// Disable reach pruning during tree growth.
    #[arg(long)]
    pub no_prune: bool,
    /// Grow trees to beta times the largest pair distance.
    #[arg(long)]
    pub naive_tree_bound: bool,
    /// Keep via edges that represent the same paths as a neighbour.
    #[arg(long)]
    pub no_dedup_neighbours: bool,
    /// Skip both via-edge and length deduplication.
    #[arg(long)]
    pub no_dedup: bool,
    /// Test every candidate individually.
    #[arg(long)]
    pub no_batch_lo: bool,
    /// Do not reuse certified sections between tests.
    #[arg(long)]
    pub no_sp_cache: bool,
}

impl From<AblationArgs> for Ablation {
    fn from(a: AblationArgs) -> Self {
        Ablation {
            no_dmin_prune: a.no_dmin_prune,
            no_prune: a.no_prune,
            naive_tree_bound: a.naive_tree_bound,
            no_dedup_neighbours: a.no_dedup_neighbours,
            no_dedup: a.no_dedup,
            no_batch_lo: a.no_batch_lo,
            no_sp_cache: a.no_sp_cache,
        }
    }
}

impl ParamArgs {
    pub fn params(&self) -> revc::Result<RevcParams> {
        Ok(RevcParams::new(self.alpha, self.beta, self.gamma, self.delta)?.with_ablation(self.ablation.into()))
    }
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// OD file; dead ends away from its endpoints are trimmed first.
    #[arg(long)]
    pub od: Option<PathBuf>,
    /// Index file to write. Defaults to the graph path with `.revcidx` appended.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Recompute even if a matching index exists.
    #[arg(long)]
    pub force_index: bool,
}

#[derive(Args, Debug)]
pub struct RoutesArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub od: PathBuf,
    /// Index file; created if missing. Without it the index is built in memory.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Use an index whose key does not match the inputs.
    #[arg(long)]
    pub force_index: bool,
    #[command(flatten)]
    pub params: ParamArgs,
    /// JSON Lines output; standard output if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the run statistics as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub force_index: bool,
    #[arg(long, default_value_t = 10)]
    pub origins: usize,
    #[arg(long, default_value_t = 10)]
    pub destinations: usize,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// Seed of the endpoint draws.
    #[arg(long, default_value_t = 0)]
    pub scenario_seed: u64,
    /// Comma-separated sweep values; the defaults hold the other parameters.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2])]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.5])]
    pub betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9])]
    pub gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.1])]
    pub deltas: Vec<f64>,
    /// Add one run per ablation switch next to each sweep point.
    #[arg(long)]
    pub ablation_sweep: bool,
    #[command(flatten)]
    pub ablation: AblationArgs,
    /// Count routes lost to the two-sided edge requirement with the oracle.
    #[arg(long)]
    pub compare: bool,
    /// CSV summary, mean and standard deviation per sweep point.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// One JSON object per run.
    #[arg(long)]
    pub runs: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub od: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also run the pipeline and check it against the oracle; exit 2 on failure.
    #[arg(long)]
    pub compare: bool,
    /// Run above the oracle's vertex limit.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 500)]
    pub vertices: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    /// Also draw an OD file with this many origins and destinations.
    #[arg(long)]
    pub od: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub endpoints: usize,
}
