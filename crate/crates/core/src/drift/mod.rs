//! Distance functions, drift-theorem verifiers and drift estimation.

mod bounds;
mod distance;
mod formulas;
mod lemmas;
mod mc;
mod report;

pub use bounds::{
    initial_distance_on, linear_like_upper_check, linear_like_upper_constant,
    verify_lower_bound_theorem, verify_upper_bound_theorem, BoundDirection, BoundReport,
    BoundVariant, LinearLikeUpperReport, DEFAULT_HORIZON, MASS_FLOOR,
};
pub use distance::{
    e_to_e, expected_initial_distance, make_distance, piecewise_parameters, DistanceFunction,
    DistanceKind,
};
pub use formulas::{bound_formula, BoundKind};
pub use lemmas::{
    verify_lemma_inequalities, LemmaReport, LEFT_DRIFT_FLOOR, LEFT_NEGATIVE_RATIO,
    PIECEWISE_DRIFT_FLOOR,
};
pub use mc::{estimate_drift_mc, DriftEstimate};
pub use report::{drift_report, DriftReport, GenerationDrift, StateDrift};
