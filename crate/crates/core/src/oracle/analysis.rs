use serde::{Deserialize, Serialize};

use super::model::TransitionModel;
use crate::drift::DistanceFunction;
use crate::error::{Error, Result};

/// Expected generations to absorption from each state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingTimeTable {
    pub g: Vec<f64>,
    /// Average of `g` under uniform initialization.
    pub g_uniform: f64,
}

impl HittingTimeTable {
    /// CSV `state,g`.
    pub fn to_csv(&self, model: &TransitionModel) -> String {
        let mut out = String::from("state,g\n");
        for (s, g) in self.g.iter().enumerate() {
            out.push_str(&format!("{},{}\n", model.label(s as u32), g));
        }
        out
    }
}

/// Solves `g(x) = 1 + sum_y P(y|x) g(y)` on non-optimal states, `g = 0` on
/// optimal ones, by back-substitution in fitness order: every non-optimal row
/// only reaches itself and fitter states, so
/// `g(x) = (1 + sum_{y != x} P(y|x) g(y)) / (1 - P(x|x))`.
pub fn exact_hitting_time(model: &TransitionModel) -> Result<HittingTimeTable> {
    let mut g = vec![0.0; model.num_states()];
    for &s in model.solve_order() {
        if model.is_optimal(s) {
            continue;
        }
        let moves = model.moves(s);
        let escape: f64 = moves.iter().map(|m| m.1).sum();
        if escape <= 0.0 {
            return Err(Error::SingularSystem {
                state: model.label(s),
            });
        }
        let ahead: f64 = moves.iter().map(|&(t, p)| p * g[t as usize]).sum();
        g[s as usize] = (1.0 + ahead) / escape;
    }
    let g_uniform = model
        .uniform_weights()
        .iter()
        .zip(&g)
        .map(|(w, g)| w * g)
        .sum();
    Ok(HittingTimeTable { g, g_uniform })
}

/// Distribution of the parent at generation `generation`, indexed by state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    pub probs: Vec<f64>,
    pub generation: u64,
}

impl StateDistribution {
    pub fn uniform(model: &TransitionModel) -> Self {
        StateDistribution {
            probs: model.uniform_weights(),
            generation: 0,
        }
    }

    pub fn point_mass(model: &TransitionModel, state: u32) -> Self {
        let mut probs = vec![0.0; model.num_states()];
        probs[state as usize] = 1.0;
        StateDistribution {
            probs,
            generation: 0,
        }
    }

    pub fn non_optimal_mass(&self, model: &TransitionModel) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(s, _)| !model.is_optimal(*s as u32))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// One generation forward.
    pub fn step(&self, model: &TransitionModel) -> Self {
        let mut next = vec![0.0; self.probs.len()];
        for (s, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[s] += p * model.stay(s as u32);
            for &(t, q) in model.moves(s as u32) {
                next[t as usize] += p * q;
            }
        }
        StateDistribution {
            probs: next,
            generation: self.generation + 1,
        }
    }
}

pub fn evolve_distribution(
    model: &TransitionModel,
    init: &StateDistribution,
    t: u64,
) -> StateDistribution {
    let mut dist = init.clone();
    for _ in 0..t {
        dist = dist.step(model);
    }
    dist
}

/// `Δ`, `Δ⁺`, `Δ⁻` at one state; `total == positive + negative`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDrift {
    pub total: f64,
    pub positive: f64,
    pub negative: f64,
}

fn drift_at(model: &TransitionModel, d: &[f64], s: u32) -> PointDrift {
    let here = d[s as usize];
    let (mut positive, mut negative) = (0.0, 0.0);
    for &(t, p) in model.moves(s) {
        let gain = here - d[t as usize];
        if gain > 0.0 {
            positive += gain * p;
        } else if gain < 0.0 {
            negative += gain * p;
        }
    }
    PointDrift {
        total: positive + negative,
        positive,
        negative,
    }
}

pub fn exact_pointwise_drift(
    model: &TransitionModel,
    state: u32,
    d: &DistanceFunction,
) -> Result<PointDrift> {
    if model.is_optimal(state) {
        return Err(Error::OptimalState {
            state: model.label(state),
        });
    }
    Ok(drift_at(model, &d.on_model(model)?, state))
}

/// Point-wise drift at every state; optimal states get `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftTable {
    pub drift: Vec<Option<PointDrift>>,
}

impl DriftTable {
    pub fn new(model: &TransitionModel, d: &DistanceFunction) -> Result<Self> {
        Ok(Self::from_values(model, &d.on_model(model)?))
    }

    pub fn from_values(model: &TransitionModel, d: &[f64]) -> Self {
        let drift = (0..model.num_states() as u32)
            .map(|s| (!model.is_optimal(s)).then(|| drift_at(model, d, s)))
            .collect();
        DriftTable { drift }
    }

    pub fn non_optimal(&self) -> impl Iterator<Item = (u32, PointDrift)> + '_ {
        self.drift
            .iter()
            .enumerate()
            .filter_map(|(s, d)| d.map(|d| (s as u32, d)))
    }

    pub fn min_total(&self) -> Option<f64> {
        self.non_optimal()
            .map(|(_, d)| d.total)
            .min_by(f64::total_cmp)
    }

    pub fn max_total(&self) -> Option<f64> {
        self.non_optimal()
            .map(|(_, d)| d.total)
            .max_by(f64::total_cmp)
    }

    /// `Δ̄` under `dist`; zero when no mass is non-optimal.
    pub fn average(&self, dist: &StateDistribution) -> f64 {
        let (mut mass, mut weighted) = (0.0, 0.0);
        for (s, d) in self.non_optimal() {
            let p = dist.probs[s as usize];
            mass += p;
            weighted += p * d.total;
        }
        if mass > 0.0 {
            weighted / mass
        } else {
            0.0
        }
    }

    pub fn cdf(&self, dist: &StateDistribution) -> DriftCdf {
        let mut points: Vec<(f64, f64)> = self
            .non_optimal()
            .map(|(s, d)| (d.total, dist.probs[s as usize]))
            .filter(|p| p.1 > 0.0)
            .collect();
        let mass: f64 = points.iter().map(|p| p.1).sum();
        if mass <= 0.0 {
            return DriftCdf {
                steps: vec![(0.0, 1.0)],
            };
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut steps: Vec<(f64, f64)> = Vec::new();
        let mut acc = 0.0;
        for (delta, p) in points {
            acc += p / mass;
            match steps.last_mut() {
                Some(last) if last.0 == delta => last.1 = acc,
                _ => steps.push((delta, acc)),
            }
        }
        if let Some(last) = steps.last_mut() {
            last.1 = 1.0;
        }
        DriftCdf { steps }
    }
}

pub fn exact_average_drift(
    model: &TransitionModel,
    dist: &StateDistribution,
    d: &DistanceFunction,
) -> Result<f64> {
    Ok(DriftTable::new(model, d)?.average(dist))
}

/// `F_t(δ)`: conditional probability, given non-optimality, that the current
/// state has drift at most `δ`. With no non-optimal mass it is the step at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftCdf {
    /// `(δ_i, F(δ_i))` at the jump points, ascending.
    pub steps: Vec<(f64, f64)>,
}

impl DriftCdf {
    pub fn eval(&self, delta: f64) -> f64 {
        match self.steps.partition_point(|s| s.0 <= delta) {
            0 => 0.0,
            i => self.steps[i - 1].1,
        }
    }

    pub fn jump_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.0)
    }
}

pub fn drift_cdf(
    model: &TransitionModel,
    dist: &StateDistribution,
    d: &DistanceFunction,
) -> Result<DriftCdf> {
    Ok(DriftTable::new(model, d)?.cdf(dist))
}
