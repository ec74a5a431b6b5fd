//! Runtime analysis of the elitist (1+N) EA on pseudo-Boolean functions:
//! simulation, exact absorbing-chain analysis, drift-theorem checks and
//! scaling experiments.

pub mod bits;
pub mod drift;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fitness;
pub mod oracle;

pub use bits::{BitString, LevelIndex, SideClass};
pub use drift::{make_distance, BoundReport, DistanceFunction, DistanceKind, DriftReport};
pub use engine::{batch_run, run_ea, BatchStats, EaConfig, RunRecord};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, Mode};
pub use fitness::{FitnessFunction, FitnessSpec, FitnessValue};
pub use oracle::{exact_hitting_time, HittingTimeTable, StateDistribution, TransitionModel};
