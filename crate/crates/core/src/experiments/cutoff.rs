use serde::{Deserialize, Serialize};

use super::scaling::cell_seed;
use crate::drift::{bound_formula, BoundKind};
use crate::engine::{batch_run, default_max_generations, EaConfig};
use crate::error::{Error, Result};
use crate::fitness::{FitnessFunction, FitnessKind};

pub const DEFAULT_CUTOFF_C: f64 = 2.0;

/// Relative tolerance on the cut-off comparison, so that `N = 1` qualifies
/// for any `C` within rounding of 1.
const RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffPoint {
    pub population: usize,
    pub mean_evaluations: f64,
    pub stderr: f64,
    /// Normal-approximation 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub timeouts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffEstimate {
    pub fitness: String,
    pub n: usize,
    pub c: f64,
    /// Mean evaluations at `N = 1`.
    pub runtime_1: f64,
    pub n_star: Option<usize>,
    pub curve: Vec<CutoffPoint>,
    /// The asymptotic cut-off expression, for orientation only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
}

/// Largest `N` in `grid` whose mean evaluations stay within `c` times the
/// `N = 1` value. Each grid point uses its own seed derived from `seed`.
pub fn cutoff_estimate(
    f: &FitnessFunction,
    grid: &[usize],
    c: f64,
    replicates: usize,
    seed: u64,
) -> Result<CutoffEstimate> {
    if !grid.contains(&1) {
        return Err(Error::InvalidConfig(
            "the population grid must contain 1".into(),
        ));
    }
    if grid.contains(&0) {
        return Err(Error::InvalidConfig(
            "population sizes must be at least 1".into(),
        ));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidConfig(format!("C = {c} must be positive")));
    }
    let n = f.n();
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut curve = Vec::with_capacity(grid.len());
    for &population in &grid {
        let ea =
            EaConfig::new(f.clone(), population)?.with_max_generations(default_max_generations(n));
        let stats = batch_run(&ea, replicates, cell_seed(seed, n, population))?;
        let half = 1.96 * stats.std_error_evaluations;
        curve.push(CutoffPoint {
            population,
            mean_evaluations: stats.mean_evaluations,
            stderr: stats.std_error_evaluations,
            ci_low: stats.mean_evaluations - half,
            ci_high: stats.mean_evaluations + half,
            timeouts: stats.timeout_count,
        });
    }
    let runtime_1 = curve[0].mean_evaluations;
    let limit = c * runtime_1 * (1.0 + RELATIVE_TOLERANCE);
    let n_star = curve
        .iter()
        .filter(|p| p.mean_evaluations <= limit)
        .map(|p| p.population)
        .max();
    let reference = match f.kind() {
        FitnessKind::OneMax => bound_formula(BoundKind::OneMaxCutoff, n, 1).ok(),
        FitnessKind::BinVal => bound_formula(BoundKind::BinValCutoff, n, 1).ok(),
        _ => None,
    };
    Ok(CutoffEstimate {
        fitness: f.name().to_string(),
        n,
        c,
        runtime_1,
        n_star,
        curve,
        reference,
    })
}
