//! Sweeps, cut-off estimation, invariant checks and verification suites.

mod config;
mod cutoff;
mod invariants;
mod scaling;
mod suites;

pub use config::{model_for, ExperimentConfig, Mode};
pub use cutoff::{cutoff_estimate, CutoffEstimate, CutoffPoint, DEFAULT_CUTOFF_C};
pub use invariants::{
    invariant_distribution_check, InvariantMode, InvariantOptions, InvariantReport, InvariantStep,
    EXACT_TOLERANCE, MIN_MC_REPLICATES,
};
pub use scaling::{
    bound_columns, cell_seed, fit_n_log_n, linear_fit, scaling_csv, scaling_experiment, LinearFit,
    ScalingRow, CSV_COLUMNS,
};
pub use suites::{run_suite, DistanceChoice, EntryStatus, Suite, SuiteEntry, SuiteReport};
