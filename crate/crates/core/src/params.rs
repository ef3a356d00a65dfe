use serde::{Deserialize, Serialize};

use crate::error::{Result, RevcError};

/// Switches that disable individual optimizations for ablation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    /// Drop the `d_min` term from second-phase pruning.
    pub no_dmin_prune: bool,
    /// Grow trees without any reach pruning.
    pub no_prune: bool,
    /// Use `beta * M` as tree height.
    pub naive_tree_bound: bool,
    /// Skip neighbour-dominance elimination of via edges.
    pub no_dedup_neighbours: bool,
    /// Skip neighbour-dominance and length-based deduplication.
    pub no_dedup: bool,
    /// Test every candidate individually.
    pub no_batch_lo: bool,
    /// Do not reuse certified sections between tests.
    pub no_sp_cache: bool,
}

impl Ablation {
    pub const NAMES: [&'static str; 7] = [
        "no_dmin_prune",
        "no_prune",
        "naive_tree_bound",
        "no_dedup_neighbours",
        "no_dedup",
        "no_batch_lo",
        "no_sp_cache",
    ];

    /// Configuration with only the named switch enabled.
    pub fn single(name: &str) -> Option<Self> {
        let mut a = Ablation::default();
        match name {
            "no_dmin_prune" => a.no_dmin_prune = true,
            "no_prune" => a.no_prune = true,
            "naive_tree_bound" => a.naive_tree_bound = true,
            "no_dedup_neighbours" => a.no_dedup_neighbours = true,
            "no_dedup" => a.no_dedup = true,
            "no_batch_lo" => a.no_batch_lo = true,
            "no_sp_cache" => a.no_sp_cache = true,
            _ => return None,
        }
        Some(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevcParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Relative tolerance for length comparisons (filter and dedup).
    pub length_tol: f64,
    /// Relative tolerance below which a query result counts as a shortcut.
    pub lo_tol: f64,
    pub ablation: Ablation,
}

impl Default for RevcParams {
    fn default() -> Self {
        RevcParams { alpha: 0.2, beta: 1.5, gamma: 0.9, delta: 1.1, length_tol: 1e-9, lo_tol: 1e-9, ablation: Ablation::default() }
    }
}

impl RevcParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = RevcParams { alpha, beta, gamma, delta, ..Default::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(RevcError::InvalidParameter(what));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return bad(format!("beta must be >= 1, got {}", self.beta));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(1.0..=2.0).contains(&self.delta) {
            return bad(format!("delta must lie in [1, 2], got {}", self.delta));
        }
        if !(self.length_tol >= 0.0 && self.lo_tol >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }

    /// Worst-case number of point queries of one delta-test.
    pub fn query_budget(&self) -> Option<u64> {
        (self.delta > 1.0).then(|| 2 * (1.0 / (self.delta - 1.0)).ceil() as u64)
    }
}
