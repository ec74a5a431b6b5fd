use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use driftlab_core::drift::drift_report;
use driftlab_core::experiments::{
    cutoff_estimate, invariant_distribution_check, model_for, run_suite, scaling_csv,
    scaling_experiment, DistanceChoice, InvariantOptions, Suite, DEFAULT_CUTOFF_C,
    MIN_MC_REPLICATES,
};
use driftlab_core::fitness::{check_linear_like, check_monotonic, FitnessSpec, PropertyReport};
use driftlab_core::{exact_hitting_time, Error, ExperimentConfig, Mode};

/// Simulation, exact analysis and drift-theorem checks for the (1+N) EA.
#[derive(Parser)]
#[command(name = "driftlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate batches of runs and print summary CSV.
    Run(Common),
    /// Exact hitting times, drift tables or the transition model.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = OracleOutput::Hitting)]
        output: OracleOutput,
        /// Distance for the drift report (unit, harmonic, upper, piecewise, g).
        #[arg(long, default_value = "unit")]
        distance: String,
        /// Generations covered by the drift report.
        #[arg(long, default_value_t = 50)]
        horizon: u64,
    },
    /// Run a verification suite; exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// theorem1, theorem2, theorem3, theorem4, lemmas, theorem6 or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Distance for the theorem suites (unit, harmonic, upper, piecewise, g).
        #[arg(long, default_value = "unit")]
        distance: String,
    },
    /// Report whether a function is monotonic and linear-like.
    CheckFitness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: bool,
    },
    /// Sweep a grid of (n, N) in simulate, oracle or both modes.
    Scaling(Common),
    /// Estimate the cut-off population size.
    Cutoff {
        #[command(flatten)]
        common: Common,
        /// Slack constant C (default 2).
        #[arg(long = "C", alias = "c")]
        c: Option<f64>,
    },
    /// Check the left/right distribution invariant and the per-bit marginals.
    Invariants {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        horizon: u64,
        /// Use Monte Carlo even when the exact model fits.
        #[arg(long)]
        monte_carlo: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleOutput {
    /// `state,g` CSV.
    Hitting,
    /// Drift report as JSON.
    Drift,
    /// Transition triplets as CSV.
    Model,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// onemax, binval, linear, random_linear or nonlinear.
    #[arg(long, alias = "kind")]
    fitness: Option<String>,
    /// Comma-separated weights for linear functions.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<String>>,
    /// Seed of the random sorted linear weights.
    #[arg(long, default_value_t = 0)]
    fitness_seed: u64,
    /// Problem size; a comma-separated list gives a grid.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Population size; a comma-separated list gives a grid.
    #[arg(long = "N", alias = "population", value_delimiter = ',')]
    population: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_header_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simulate,
    Oracle,
    Both,
}

/// Exit 2: the request itself is malformed.
struct ConfigError(String);

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn fitness_from_flags(c: &Common, kind: &str) -> Result<FitnessSpec, ConfigError> {
    let weights = || -> Result<Vec<serde_json::Number>, ConfigError> {
        let raw = c
            .weights
            .as_ref()
            .ok_or_else(|| ConfigError("linear needs --weights".into()))?;
        raw.iter()
            .map(|w| {
                serde_json::from_str::<serde_json::Number>(w.trim())
                    .map_err(|_| ConfigError(format!("bad weight {w:?}")))
            })
            .collect()
    };
    Ok(match kind {
        "onemax" => FitnessSpec::Onemax { n: None },
        "binval" => FitnessSpec::Binval { n: None },
        "nonlinear" => FitnessSpec::Nonlinear { n: None },
        "linear" => FitnessSpec::Linear {
            n: None,
            weights: weights()?,
        },
        "random_linear" | "random-linear" => FitnessSpec::RandomLinear {
            n: None,
            seed: c.fitness_seed,
            max_weight: 100,
        },
        other => return Err(ConfigError(format!("unknown fitness {other:?}"))),
    })
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => {
                let kind = self
                    .fitness
                    .as_deref()
                    .ok_or_else(|| ConfigError("--fitness or --config is required".into()))?;
                let spec = fitness_from_flags(self, kind)?;
                let n = match (&self.n, spec.declared_n()) {
                    (Some(n), _) => n.clone(),
                    (None, Some(n)) => vec![n],
                    (None, None) => return Err(ConfigError("--n is required".into())),
                };
                ExperimentConfig::new(spec, n, vec![1])
            }
        };
        if self.config.is_some() {
            if let Some(kind) = &self.fitness {
                cfg.fitness = fitness_from_flags(self, kind)?;
            }
            if let Some(n) = &self.n {
                cfg.n_grid = n.clone();
            }
        }
        if let Some(p) = &self.population {
            cfg.population_grid = p.clone();
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Simulate => Mode::Simulate,
                ModeArg::Oracle => Mode::Oracle,
                ModeArg::Both => Mode::Both,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_path(&self, cfg: &ExperimentConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| cfg.output.clone())
    }

    fn header(&self) -> Option<String> {
        if self.no_header_timestamp {
            return None;
        }
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Some(format!("generated unix_time={secs}"))
    }
}

fn emit(path: Option<PathBuf>, text: &str) -> Result<(), ConfigError> {
    match path {
        Some(p) => std::fs::write(&p, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| ConfigError(e.to_string()))
        }
    }
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn describe(report: &PropertyReport, property: &str) -> String {
    if report.holds {
        return property.to_string();
    }
    let witness: Vec<String> = report.witness.iter().map(|x| x.to_string()).collect();
    match report.condition.map(|c| c.number()) {
        Some(c) if c > 0 => format!(
            "not {property}, condition {c}, witness {}",
            witness.join("/")
        ),
        _ => format!("not {property}, witness {}", witness.join("/")),
    }
}

/// Ok(true) on success, Ok(false) when a verification failed.
fn execute(command: Command) -> Result<bool, ConfigError> {
    match command {
        Command::Run(mut common) => {
            common.mode = Some(ModeArg::Simulate);
            let cfg = common.experiment()?;
            let rows = scaling_experiment(&cfg)?;
            emit(
                common.out_path(&cfg),
                &scaling_csv(&rows, common.header().as_deref()),
            )?;
            Ok(true)
        }
        Command::Scaling(common) => {
            let cfg = common.experiment()?;
            let rows = scaling_experiment(&cfg)?;
            emit(
                common.out_path(&cfg),
                &scaling_csv(&rows, common.header().as_deref()),
            )?;
            Ok(true)
        }
        Command::Oracle {
            common,
            output,
            distance,
            horizon,
        } => {
            let cfg = common.experiment()?;
            let distance: DistanceChoice = distance.parse()?;
            let mut text = String::new();
            for &n in &cfg.n_grid {
                let f = cfg.build_fitness(n)?;
                for &population in &cfg.population_grid {
                    let model = model_for(&f, population)?;
                    match output {
                        OracleOutput::Hitting => {
                            let table = exact_hitting_time(&model)?;
                            text.push_str(&format!(
                                "# {} n={n} N={population} g_uniform={}\n",
                                f.name(),
                                table.g_uniform
                            ));
                            text.push_str(&table.to_csv(&model));
                        }
                        OracleOutput::Model => {
                            text.push_str(&format!("# {} n={n} N={population}\n", f.name()));
                            text.push_str(&model.to_csv());
                        }
                        OracleOutput::Drift => {
                            let report = drift_report(&model, &distance.build(&model)?, horizon)?;
                            text.push_str(&json(&serde_json::json!({
                                "fitness": f.name(), "n": n, "N": population, "report": report
                            })));
                        }
                    }
                }
            }
            emit(common.out_path(&cfg), &text)?;
            Ok(true)
        }
        Command::Verify {
            common,
            suite,
            distance,
        } => {
            let cfg = common.experiment()?;
            let suite: Suite = suite.parse()?;
            let distance: DistanceChoice = distance.parse()?;
            let mut reports = Vec::new();
            for &n in &cfg.n_grid {
                let f = cfg.build_fitness(n)?;
                for &population in &cfg.population_grid {
                    reports.push(run_suite(suite, &f, population, distance)?);
                }
            }
            let passed = reports.iter().all(|r| r.passed);
            let text = if reports.len() == 1 {
                json(&reports[0])
            } else {
                json(&reports)
            };
            emit(common.out_path(&cfg), &text)?;
            Ok(passed)
        }
        Command::CheckFitness {
            common,
            json: as_json,
        } => {
            let cfg = common.experiment()?;
            let mut text = String::new();
            let mut all = Vec::new();
            for &n in &cfg.n_grid {
                let f = cfg.build_fitness(n)?;
                let monotonic = check_monotonic(&f)?;
                let linear_like = check_linear_like(&f)?;
                text.push_str(&format!(
                    "{} n={n}: {}; {}\n",
                    f.name(),
                    describe(&monotonic, "monotonic"),
                    describe(&linear_like, "linear-like")
                ));
                all.push(serde_json::json!({
                    "fitness": f.name(), "n": n, "monotonic": monotonic, "linear_like": linear_like
                }));
            }
            let text = if as_json { json(&all) } else { text };
            emit(common.out_path(&cfg), &text)?;
            Ok(true)
        }
        Command::Cutoff { common, c } => {
            let cfg = common.experiment()?;
            let c = c.or(cfg.cutoff_c).unwrap_or(DEFAULT_CUTOFF_C);
            let mut grid = cfg.population_grid.clone();
            if common.population.is_none() && cfg.population_grid == [1] {
                let n_max = *cfg.n_grid.iter().max().expect("validated non-empty");
                grid = std::iter::successors(Some(1usize), |p| Some(p * 2))
                    .take_while(|&p| p <= n_max)
                    .collect();
            }
            let mut estimates = Vec::new();
            for &n in &cfg.n_grid {
                let f = cfg.build_fitness(n)?;
                estimates.push(cutoff_estimate(&f, &grid, c, cfg.replicates, cfg.seed)?);
            }
            let text = if estimates.len() == 1 {
                json(&estimates[0])
            } else {
                json(&estimates)
            };
            emit(common.out_path(&cfg), &text)?;
            Ok(true)
        }
        Command::Invariants {
            common,
            horizon,
            monte_carlo,
        } => {
            let cfg = common.experiment()?;
            let options = InvariantOptions {
                replicates: common.replicates.unwrap_or(MIN_MC_REPLICATES),
                seed: cfg.seed,
                force_monte_carlo: monte_carlo,
            };
            let mut reports = Vec::new();
            for &n in &cfg.n_grid {
                let f = cfg.build_fitness(n)?;
                for &population in &cfg.population_grid {
                    reports.push(invariant_distribution_check(
                        &f, population, horizon, options,
                    )?);
                }
            }
            let passed = reports.iter().all(|r| r.passed);
            let text = if reports.len() == 1 {
                json(&reports[0])
            } else {
                json(&reports)
            };
            emit(common.out_path(&cfg), &text)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(ConfigError(msg)) => {
            eprintln!("driftlab: {msg}");
            ExitCode::from(2)
        }
    }
}
