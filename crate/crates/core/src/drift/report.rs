use serde::{Deserialize, Serialize};

use super::bounds::MASS_FLOOR;
use super::distance::DistanceFunction;
use crate::error::Result;
use crate::oracle::{DriftTable, StateDistribution, TransitionModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDrift {
    pub state: String,
    pub level: usize,
    pub distance: f64,
    pub total: f64,
    pub positive: f64,
    pub negative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationDrift {
    pub t: u64,
    pub non_optimal_mass: f64,
    pub average: f64,
    /// Jump points `(δ, F_t(δ))` of the conditional drift distribution.
    pub cdf: Vec<(f64, f64)>,
}

/// Point-wise drift of every non-optimal state, and the average drift and its
/// distribution for generations `0..=horizon` from uniform initialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub states: Vec<StateDrift>,
    pub generations: Vec<GenerationDrift>,
}

/// Stops early once the non-optimal mass drops below `MASS_FLOOR`.
pub fn drift_report(
    model: &TransitionModel,
    d: &DistanceFunction,
    horizon: u64,
) -> Result<DriftReport> {
    let dv = d.check_zero_on_optimum(model)?;
    let table = DriftTable::from_values(model, &dv);
    let states = table
        .non_optimal()
        .map(|(s, pd)| StateDrift {
            state: model.label(s),
            level: model.level(s),
            distance: dv[s as usize],
            total: pd.total,
            positive: pd.positive,
            negative: pd.negative,
        })
        .collect();
    let mut generations = Vec::new();
    let mut dist = StateDistribution::uniform(model);
    for t in 0..=horizon {
        let mass = dist.non_optimal_mass(model);
        if mass < MASS_FLOOR {
            break;
        }
        generations.push(GenerationDrift {
            t,
            non_optimal_mass: mass,
            average: table.average(&dist),
            cdf: table.cdf(&dist).steps,
        });
        dist = dist.step(model);
    }
    Ok(DriftReport {
        states,
        generations,
    })
}
