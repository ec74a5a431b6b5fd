use serde::{Deserialize, Serialize};

use super::config::{model_for, ExperimentConfig};
use crate::drift::{bound_formula, e_to_e, BoundKind};
use crate::engine::{batch_run, default_max_generations, run_seed, EaConfig};
use crate::error::Result;
use crate::fitness::{check_linear_like, FitnessFunction, FitnessKind, CHECKER_CAP};
use crate::oracle::exact_hitting_time;

pub const CSV_COLUMNS: [&str; 13] = [
    "fitness",
    "n",
    "N",
    "mode",
    "replicates",
    "mean_gens",
    "stderr_gens",
    "mean_evals",
    "stderr_evals",
    "exact_g",
    "bound_lower",
    "bound_upper",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub fitness: String,
    pub n: usize,
    pub population: usize,
    pub mode: String,
    pub replicates: usize,
    pub mean_gens: Option<f64>,
    pub stderr_gens: Option<f64>,
    pub mean_evals: Option<f64>,
    pub stderr_evals: Option<f64>,
    pub exact_g: Option<f64>,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    pub seed: u64,
    /// Runs that hit the generation cap; not part of the CSV.
    #[serde(default)]
    pub timeouts: usize,
}

/// Seed of the `(n, N)` cell, independent of the rest of the grid.
pub fn cell_seed(master_seed: u64, n: usize, population: usize) -> u64 {
    run_seed(run_seed(master_seed, n as u64), population as u64)
}

fn linear_like(f: &FitnessFunction) -> bool {
    match f.kind() {
        FitnessKind::OneMax | FitnessKind::BinVal => true,
        _ => f.n() <= CHECKER_CAP && check_linear_like(f).is_ok_and(|r| r.holds),
    }
}

/// Orientation values for the CSV; `None` where no bound applies.
pub fn bound_columns(f: &FitnessFunction, population: usize) -> (Option<f64>, Option<f64>) {
    let n = f.n();
    if n < 2 {
        return (None, None);
    }
    let eval = |kind| bound_formula(kind, n, population).ok();
    let monotone_lower = || {
        let base = eval(BoundKind::MonotoneLower)?;
        Some(if population as f64 > e_to_e() {
            base.max(eval(BoundKind::MonotoneLowerLargeN)?)
        } else {
            base
        })
    };
    match f.kind() {
        FitnessKind::OneMax => (eval(BoundKind::OneMaxLower), eval(BoundKind::OneMaxUpper)),
        FitnessKind::BinVal => {
            let lower = monotone_lower()
                .zip(eval(BoundKind::BinValLower))
                .map(|(a, b)| a.max(b));
            (lower, eval(BoundKind::LinearLikeUpper))
        }
        _ if linear_like(f) => (monotone_lower(), eval(BoundKind::LinearLikeUpper)),
        _ => (None, None),
    }
}

fn scaling_row(cfg: &ExperimentConfig, n: usize, population: usize) -> Result<ScalingRow> {
    let f = cfg.build_fitness(n)?;
    let mut row = ScalingRow {
        fitness: cfg.fitness.name().to_string(),
        n,
        population,
        mode: cfg.mode.as_str().to_string(),
        replicates: if cfg.mode.simulates() {
            cfg.replicates
        } else {
            0
        },
        mean_gens: None,
        stderr_gens: None,
        mean_evals: None,
        stderr_evals: None,
        exact_g: None,
        bound_lower: None,
        bound_upper: None,
        seed: cfg.seed,
        timeouts: 0,
    };
    (row.bound_lower, row.bound_upper) = bound_columns(&f, population);
    if cfg.mode.uses_oracle() {
        row.exact_g = Some(exact_hitting_time(&model_for(&f, population)?)?.g_uniform);
    }
    if cfg.mode.simulates() {
        let max_generations = cfg
            .max_generations
            .unwrap_or_else(|| default_max_generations(n));
        let ea = EaConfig::new(f, population)?.with_max_generations(max_generations);
        let stats = batch_run(&ea, cfg.replicates, cell_seed(cfg.seed, n, population))?;
        row.mean_gens = Some(stats.mean_generations);
        row.stderr_gens = Some(stats.std_error);
        row.mean_evals = Some(stats.mean_evaluations);
        row.stderr_evals = Some(stats.std_error_evaluations);
        row.timeouts = stats.timeout_count;
    }
    Ok(row)
}

/// One row per `(n, N)` in grid order.
pub fn scaling_experiment(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        for &population in &cfg.population_grid {
            rows.push(scaling_row(cfg, n, population)?);
        }
    }
    Ok(rows)
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV text; `header` becomes a leading `# ...` comment line.
pub fn scaling_csv(rows: &[ScalingRow], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&format!("# {h}\n"));
    }
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let fields = [
            r.fitness.clone(),
            r.n.to_string(),
            r.population.to_string(),
            r.mode.clone(),
            r.replicates.to_string(),
            cell(r.mean_gens),
            cell(r.stderr_gens),
            cell(r.mean_evals),
            cell(r.stderr_evals),
            cell(r.exact_g),
            cell(r.bound_lower),
            cell(r.bound_upper),
            r.seed.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Least-squares line `y = slope x + intercept` with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fits mean evaluations against `n ln n` over the rows with simulation data.
pub fn fit_n_log_n(rows: &[ScalingRow]) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.mean_evals.map(|y| (r.n as f64 * (r.n as f64).ln(), y)))
        .unzip();
    linear_fit(&xs, &ys)
}
