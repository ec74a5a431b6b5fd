use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::model_for;
use crate::drift::{
    linear_like_upper_check, make_distance, verify_lemma_inequalities, verify_lower_bound_theorem,
    verify_upper_bound_theorem, BoundVariant, DistanceFunction, DistanceKind, DEFAULT_HORIZON,
};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::oracle::{exact_hitting_time, TransitionModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Point-wise upper bound.
    Theorem1,
    /// Point-wise lower bound.
    Theorem2,
    /// Average-drift upper bound.
    Theorem3,
    /// Average-drift lower bound.
    Theorem4,
    Lemmas,
    Theorem6,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_ascii_lowercase()))
            .map_err(|_| Error::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => {
                vec![
                    Suite::Theorem1,
                    Suite::Theorem2,
                    Suite::Theorem3,
                    Suite::Theorem4,
                    Suite::Lemmas,
                    Suite::Theorem6,
                ]
            }
            s => vec![s],
        }
    }

    fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    }
}

/// Distance used by the theorem suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceChoice {
    Unit,
    Harmonic,
    Upper,
    Piecewise,
    /// The exact hitting time itself.
    HittingTime,
}

impl std::str::FromStr for DistanceChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" | "hitting_time" | "hitting-time" => Ok(DistanceChoice::HittingTime),
            other => Ok(match other.parse::<DistanceKind>()? {
                DistanceKind::Unit => DistanceChoice::Unit,
                DistanceKind::Harmonic => DistanceChoice::Harmonic,
                DistanceKind::Upper => DistanceChoice::Upper,
                DistanceKind::Piecewise => DistanceChoice::Piecewise,
                DistanceKind::Custom => unreachable!("custom is never parsed"),
            }),
        }
    }
}

impl DistanceChoice {
    pub fn build(self, model: &TransitionModel) -> Result<DistanceFunction> {
        let (n, pop) = (model.n(), model.population());
        let kind = match self {
            DistanceChoice::Unit => DistanceKind::Unit,
            DistanceChoice::Harmonic => DistanceKind::Harmonic,
            DistanceChoice::Upper => DistanceKind::Upper,
            DistanceChoice::Piecewise => DistanceKind::Piecewise,
            DistanceChoice::HittingTime => {
                return DistanceFunction::from_states(exact_hitting_time(model)?.g)
            }
        };
        make_distance(kind, n, pop)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Passed,
    Failed,
    /// The check does not apply (non-positive drift, not linear-like).
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub suite: String,
    pub status: EntryStatus,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub fitness: String,
    pub n: usize,
    pub population: usize,
    pub distance: DistanceChoice,
    pub entries: Vec<SuiteEntry>,
    /// No entry failed.
    pub passed: bool,
}

fn entry(suite: Suite, status: EntryStatus, detail: Value) -> SuiteEntry {
    SuiteEntry {
        suite: suite.name(),
        status,
        detail,
    }
}

fn inapplicable(suite: Suite, err: &Error) -> SuiteEntry {
    entry(
        suite,
        EntryStatus::Inapplicable,
        json!({ "reason": err.to_string() }),
    )
}

fn status(ok: bool) -> EntryStatus {
    if ok {
        EntryStatus::Passed
    } else {
        EntryStatus::Failed
    }
}

/// Runs `suite` on `f` with population `population`. Inapplicable checks are
/// recorded as such; other errors abort.
pub fn run_suite(
    suite: Suite,
    f: &FitnessFunction,
    population: usize,
    distance: DistanceChoice,
) -> Result<SuiteReport> {
    let members = suite.members();
    let needs_model = members.iter().any(|s| {
        matches!(
            s,
            Suite::Theorem1 | Suite::Theorem2 | Suite::Theorem3 | Suite::Theorem4
        )
    });
    let model = if needs_model {
        Some(model_for(f, population)?)
    } else {
        None
    };
    let d = match &model {
        Some(m) => Some(distance.build(m)?),
        None => None,
    };
    let mut entries = Vec::new();
    for s in members {
        let bound = |variant, upper: bool| {
            let (m, d) = (
                model.as_ref().expect("model built"),
                d.as_ref().expect("distance built"),
            );
            if upper {
                verify_upper_bound_theorem(m, d, variant, DEFAULT_HORIZON)
            } else {
                verify_lower_bound_theorem(m, d, variant, DEFAULT_HORIZON)
            }
        };
        let result = match s {
            Suite::Theorem1 => bound(BoundVariant::Pointwise, true),
            Suite::Theorem2 => bound(BoundVariant::Pointwise, false),
            Suite::Theorem3 => bound(BoundVariant::Average, true),
            Suite::Theorem4 => bound(BoundVariant::Average, false),
            Suite::Lemmas => {
                entries.push(match verify_lemma_inequalities(f, population) {
                    Ok(r) => entry(
                        s,
                        status(r.passed),
                        serde_json::to_value(&r).expect("report serializes"),
                    ),
                    Err(e @ Error::NotLinearLike { .. }) => inapplicable(s, &e),
                    Err(e) => return Err(e),
                });
                continue;
            }
            Suite::Theorem6 => {
                entries.push(match linear_like_upper_check(f, population) {
                    Ok(r) => entry(
                        s,
                        status(r.satisfied),
                        serde_json::to_value(&r).expect("report serializes"),
                    ),
                    Err(e @ Error::NotLinearLike { .. }) => inapplicable(s, &e),
                    Err(e) => return Err(e),
                });
                continue;
            }
            Suite::All => unreachable!("expanded above"),
        };
        entries.push(match result {
            Ok(r) => entry(
                s,
                status(r.satisfied),
                serde_json::to_value(&r).expect("report serializes"),
            ),
            Err(e @ Error::NonPositiveDrift { .. }) => inapplicable(s, &e),
            Err(e) => return Err(e),
        });
    }
    let passed = entries.iter().all(|e| e.status != EntryStatus::Failed);
    Ok(SuiteReport {
        suite: suite.name(),
        fitness: f.name().to_string(),
        n: f.n(),
        population,
        distance,
        entries,
        passed,
    })
}
