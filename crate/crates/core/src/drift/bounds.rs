use serde::{Deserialize, Serialize};

use super::distance::{make_distance, DistanceFunction, DistanceKind};
use crate::error::{Error, Result};
use crate::fitness::{check_linear_like, FitnessFunction};
use crate::oracle::{exact_hitting_time, DriftTable, StateDistribution, TransitionModel};

/// Generations with less non-optimal mass than this are left out of `inf_t`/`sup_t`.
pub const MASS_FLOOR: f64 = 1e-12;

/// Default cap on the number of generations scanned by the average variants.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

const SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `c` from the drift at every non-optimal state; the bound is checked state by state.
    Pointwise,
    /// `c` from the average drift at every generation; the bound is checked for uniform initialization.
    Average,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub variant: BoundVariant,
    pub direction: BoundDirection,
    pub c: f64,
    /// `d(Phi_0)`; for point-wise reports, `d` at the reported state.
    pub d_init: f64,
    pub bound: f64,
    pub exact_g: f64,
    pub satisfied: bool,
    /// `bound - exact_g` for upper bounds, `exact_g - bound` for lower bounds.
    pub slack: f64,
    /// Point-wise reports: the state with the smallest slack.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub state: Option<String>,
    /// Average reports: generations scanned.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generations_scanned: Option<u64>,
}

impl BoundReport {
    fn finish(mut self) -> Self {
        self.slack = match self.direction {
            BoundDirection::Upper => self.bound - self.exact_g,
            BoundDirection::Lower => self.exact_g - self.bound,
        };
        self.satisfied = self.slack >= -SLACK_TOLERANCE;
        self
    }
}

/// `d(Phi_0)` under uniform initialization over the states of `model`.
pub fn initial_distance_on(model: &TransitionModel, d: &DistanceFunction) -> Result<f64> {
    let dv = d.on_model(model)?;
    Ok(model
        .uniform_weights()
        .iter()
        .zip(&dv)
        .map(|(w, d)| w * d)
        .sum())
}

/// `(inf_t, sup_t)` of the average drift from uniform initialization, over
/// generations whose non-optimal mass is at least `MASS_FLOOR`.
fn average_drift_range(
    model: &TransitionModel,
    table: &DriftTable,
    horizon: u64,
) -> (f64, f64, u64) {
    let mut dist = StateDistribution::uniform(model);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut t = 0;
    while t <= horizon && dist.non_optimal_mass(model) >= MASS_FLOOR {
        let avg = table.average(&dist);
        lo = lo.min(avg);
        hi = hi.max(avg);
        dist = dist.step(model);
        t += 1;
    }
    (lo, hi, t)
}

fn verify(
    model: &TransitionModel,
    d: &DistanceFunction,
    variant: BoundVariant,
    direction: BoundDirection,
    horizon: u64,
) -> Result<BoundReport> {
    let dv = d.check_zero_on_optimum(model)?;
    let table = DriftTable::from_values(model, &dv);
    let g = exact_hitting_time(model)?;
    let blank = BoundReport {
        variant,
        direction,
        c: 0.0,
        d_init: 0.0,
        bound: 0.0,
        exact_g: 0.0,
        satisfied: false,
        slack: 0.0,
        state: None,
        generations_scanned: None,
    };
    match variant {
        BoundVariant::Pointwise => {
            let c = match direction {
                BoundDirection::Upper => table.min_total(),
                BoundDirection::Lower => table.max_total(),
            }
            .ok_or_else(|| Error::InvalidModel("no non-optimal states".into()))?;
            if c <= 0.0 {
                return Err(Error::NonPositiveDrift { c });
            }
            let worst = table
                .non_optimal()
                .map(|(s, _)| {
                    let report = BoundReport {
                        c,
                        d_init: dv[s as usize],
                        bound: dv[s as usize] / c,
                        exact_g: g.g[s as usize],
                        state: Some(model.label(s)),
                        ..blank.clone()
                    };
                    report.finish()
                })
                .min_by(|a, b| a.slack.total_cmp(&b.slack))
                .expect("non-optimal states exist");
            Ok(worst)
        }
        BoundVariant::Average => {
            let (lo, hi, scanned) = average_drift_range(model, &table, horizon);
            let c = match direction {
                BoundDirection::Upper => lo,
                BoundDirection::Lower => hi,
            };
            if c <= 0.0 || !c.is_finite() {
                return Err(Error::NonPositiveDrift { c });
            }
            let d_init = model
                .uniform_weights()
                .iter()
                .zip(&dv)
                .map(|(w, d)| w * d)
                .sum::<f64>();
            Ok(BoundReport {
                c,
                d_init,
                bound: d_init / c,
                exact_g: g.g_uniform,
                generations_scanned: Some(scanned),
                ..blank
            }
            .finish())
        }
    }
}

/// Upper bound `G <= d / c` with `c` the smallest drift.
pub fn verify_upper_bound_theorem(
    model: &TransitionModel,
    d: &DistanceFunction,
    variant: BoundVariant,
    horizon: u64,
) -> Result<BoundReport> {
    verify(model, d, variant, BoundDirection::Upper, horizon)
}

/// Lower bound `G >= d / c` with `c` the largest drift.
pub fn verify_lower_bound_theorem(
    model: &TransitionModel,
    d: &DistanceFunction,
    variant: BoundVariant,
    horizon: u64,
) -> Result<BoundReport> {
    verify(model, d, variant, BoundDirection::Lower, horizon)
}

/// `8 (e + e^2)`.
pub fn linear_like_upper_constant() -> f64 {
    let e = std::f64::consts::E;
    8.0 * (e + e * e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearLikeUpperReport {
    pub fitness: String,
    pub n: usize,
    pub population: usize,
    pub exact_g: f64,
    pub d_init: f64,
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

/// `G(uniform) <= 8 (e + e^2) d(Phi_0)` with the UPPER distance.
pub fn linear_like_upper_check(
    f: &FitnessFunction,
    population: usize,
) -> Result<LinearLikeUpperReport> {
    let linear_like = check_linear_like(f)?;
    if !linear_like.holds {
        return Err(Error::NotLinearLike {
            condition: linear_like.condition.map_or(0, |c| c.number()),
        });
    }
    let model = TransitionModel::build(f, population)?;
    let d = make_distance(DistanceKind::Upper, f.n(), population)?;
    let d_init = initial_distance_on(&model, &d)?;
    let exact_g = exact_hitting_time(&model)?.g_uniform;
    let bound = linear_like_upper_constant() * d_init;
    let slack = bound - exact_g;
    Ok(LinearLikeUpperReport {
        fitness: f.name().to_string(),
        n: f.n(),
        population,
        exact_g,
        d_init,
        bound,
        slack,
        satisfied: slack >= -SLACK_TOLERANCE,
    })
}
