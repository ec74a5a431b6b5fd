//! Exact analysis of the (1+N) EA as an absorbing Markov chain.

mod analysis;
mod model;

pub use analysis::{
    drift_cdf, evolve_distribution, exact_average_drift, exact_hitting_time, exact_pointwise_drift,
    DriftCdf, DriftTable, HittingTimeTable, PointDrift, StateDistribution,
};
pub use model::{
    binomial_half_pmf, child_distribution, transition_row, ChildLevel, StateSpace, TransitionModel,
    FULL_MODEL_CAP, LUMPED_MODEL_CAP,
};
