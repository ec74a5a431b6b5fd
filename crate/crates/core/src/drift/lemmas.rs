use serde::{Deserialize, Serialize};

use super::distance::{make_distance, DistanceKind};
use crate::bits::SideClass;
use crate::error::{Error, Result};
use crate::fitness::{check_linear_like, FitnessFunction, FitnessKind};
use crate::oracle::{DriftTable, TransitionModel};

/// Claimed lower bound on the drift over left-heavy states.
pub const LEFT_DRIFT_FLOOR: f64 = 0.024_734_504_950_361_8;
/// Claimed bound on `-Δ⁻ / Δ⁺` over left-heavy states.
pub const LEFT_NEGATIVE_RATIO: f64 = 0.75;
/// Claimed lower bound on the OneMax drift under the piecewise distance.
pub const PIECEWISE_DRIFT_FLOOR: f64 = 0.367_879_441_171_442_33;

const NEGATIVE_TOLERANCE: f64 = -1e-12;

/// Measured drift inequalities of one `(f, N)` with the UPPER distance.
///
/// Only `nonnegative` and `left_positive` are hard requirements; the
/// constants are measured beside the claimed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub fitness: String,
    pub n: usize,
    pub population: usize,
    /// Smallest drift over all non-optimal states.
    pub min_drift: f64,
    pub min_drift_state: String,
    pub nonnegative: bool,
    /// Smallest drift over left-heavy states; `None` when there are none.
    pub min_drift_left: Option<f64>,
    pub left_positive: bool,
    pub left_drift_floor: f64,
    /// Largest `-Δ⁻ / Δ⁺` over left-heavy states.
    pub max_negative_ratio_left: Option<f64>,
    pub negative_ratio_cap: f64,
    /// OneMax only: smallest drift under the piecewise distance.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub piecewise_min_drift: Option<f64>,
    pub piecewise_drift_floor: f64,
    pub passed: bool,
}

pub fn verify_lemma_inequalities(f: &FitnessFunction, population: usize) -> Result<LemmaReport> {
    let linear_like = check_linear_like(f)?;
    if !linear_like.holds {
        return Err(Error::NotLinearLike {
            condition: linear_like.condition.map_or(0, |c| c.number()),
        });
    }
    let n = f.n();
    let model = TransitionModel::build(f, population)?;
    let table = DriftTable::new(&model, &make_distance(DistanceKind::Upper, n, population)?)?;

    let (min_state, min_drift) = table
        .non_optimal()
        .map(|(s, d)| (s, d.total))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidModel("no non-optimal states".into()))?;

    let left: Vec<_> = table
        .non_optimal()
        .filter(|(s, _)| {
            model
                .bitstring(*s)
                .is_some_and(|x| x.classify_side() == SideClass::LeftHeavy)
        })
        .map(|(_, d)| d)
        .collect();
    let min_drift_left = left.iter().map(|d| d.total).min_by(f64::total_cmp);
    let max_negative_ratio_left = left
        .iter()
        .filter(|d| d.positive > 0.0)
        .map(|d| -d.negative / d.positive)
        .max_by(f64::total_cmp);

    let piecewise_min_drift = match f.kind() {
        FitnessKind::OneMax => DriftTable::new(
            &model,
            &make_distance(DistanceKind::Piecewise, n, population)?,
        )?
        .min_total(),
        _ => None,
    };

    let nonnegative = min_drift >= NEGATIVE_TOLERANCE;
    let left_positive = min_drift_left.is_none_or(|m| m > 0.0);
    Ok(LemmaReport {
        fitness: f.name().to_string(),
        n,
        population,
        min_drift,
        min_drift_state: model.label(min_state),
        nonnegative,
        min_drift_left,
        left_positive,
        left_drift_floor: LEFT_DRIFT_FLOOR,
        max_negative_ratio_left,
        negative_ratio_cap: LEFT_NEGATIVE_RATIO,
        piecewise_min_drift,
        piecewise_drift_floor: PIECEWISE_DRIFT_FLOOR,
        passed: nonnegative && left_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            LEFT_DRIFT_FLOOR,
            1.0 / (4.0 * e + 4.0 * e * e),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(PIECEWISE_DRIFT_FLOOR, 1.0 / e, epsilon = 1e-16);
    }

    #[test]
    fn examples() {
        let r = verify_lemma_inequalities(&FitnessFunction::onemax(4).unwrap(), 1).unwrap();
        assert!(r.passed && r.min_drift >= 0.0);
        // N <= e^e: piecewise equals upper
        assert_eq!(r.piecewise_min_drift, Some(r.min_drift));
        assert_eq!(r.max_negative_ratio_left, Some(0.0));

        let r = verify_lemma_inequalities(&FitnessFunction::binval(6).unwrap(), 2).unwrap();
        assert!(r.nonnegative && r.min_drift_left.unwrap() > 0.0 && r.passed);
        assert!(r.piecewise_min_drift.is_none());
    }

    #[test]
    fn rejects_non_linear_like() {
        let f = FitnessFunction::linear(vec![1, 2, 3]).unwrap();
        assert!(matches!(
            verify_lemma_inequalities(&f, 1),
            Err(Error::NotLinearLike { condition: 2 })
        ));
    }
}
