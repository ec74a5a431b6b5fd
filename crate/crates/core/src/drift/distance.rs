use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::TransitionModel;

/// `e^e`; populations above this switch the piecewise distance to its second regime.
pub fn e_to_e() -> f64 {
    std::f64::consts::E.exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// `d_k = k`.
    Unit,
    /// `d_k = (n/N) (1 + 1/2 + ... + 1/k)`.
    Harmonic,
    /// `d_k = d_{k-1} + n/(kN) + 1`.
    Upper,
    /// Upper increments up to `K`, then `ln ln N / ln N` per level.
    Piecewise,
    Custom,
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unit" => Ok(DistanceKind::Unit),
            "harmonic" => Ok(DistanceKind::Harmonic),
            "upper" => Ok(DistanceKind::Upper),
            "piecewise" => Ok(DistanceKind::Piecewise),
            other => Err(Error::InvalidDistance(format!(
                "unknown distance kind {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Values {
    /// `d_0..d_n`, applied through the level index.
    Levels(Vec<f64>),
    /// One value per model state.
    States(Vec<f64>),
}

/// A non-negative potential on states, usually level-based.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceFunction {
    kind: DistanceKind,
    values: Values,
}

/// `L` and `K` of the piecewise construction.
pub fn piecewise_parameters(n: usize, population: usize) -> (f64, f64) {
    let big_n = population as f64;
    if big_n <= e_to_e() {
        (1.0, n as f64)
    } else {
        let l = big_n.ln() / big_n.ln().ln();
        (l, n as f64 / l)
    }
}

pub fn make_distance(kind: DistanceKind, n: usize, population: usize) -> Result<DistanceFunction> {
    if n == 0 || population == 0 {
        return Err(Error::InvalidDistance("n and N must be at least 1".into()));
    }
    let (nf, big_n) = (n as f64, population as f64);
    let upper_step = |k: usize| nf / (k as f64 * big_n) + 1.0;
    let step: Box<dyn Fn(usize) -> f64> = match kind {
        DistanceKind::Unit => Box::new(|_| 1.0),
        DistanceKind::Harmonic => Box::new(|k| nf / big_n / k as f64),
        DistanceKind::Upper => Box::new(upper_step),
        DistanceKind::Piecewise => {
            let (_, cutoff) = piecewise_parameters(n, population);
            let flat = if big_n > e_to_e() {
                big_n.ln().ln() / big_n.ln()
            } else {
                0.0
            };
            Box::new(move |k| {
                if (k as f64) <= cutoff {
                    upper_step(k)
                } else {
                    flat
                }
            })
        }
        DistanceKind::Custom => {
            return Err(Error::InvalidDistance(
                "custom distances are built from tables".into(),
            ))
        }
    };
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    for k in 1..=n {
        values.push(values[k - 1] + step(k));
    }
    Ok(DistanceFunction {
        kind,
        values: Values::Levels(values),
    })
}

impl DistanceFunction {
    /// Level table `d_0..d_n`.
    pub fn from_levels(values: Vec<f64>) -> Result<Self> {
        validate(&values)?;
        Ok(DistanceFunction {
            kind: DistanceKind::Custom,
            values: Values::Levels(values),
        })
    }

    /// One value per state of the model it will be used with.
    pub fn from_states(values: Vec<f64>) -> Result<Self> {
        validate(&values)?;
        Ok(DistanceFunction {
            kind: DistanceKind::Custom,
            values: Values::States(values),
        })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn level_values(&self) -> Option<&[f64]> {
        match &self.values {
            Values::Levels(v) => Some(v),
            Values::States(_) => None,
        }
    }

    pub fn at_level(&self, k: usize) -> Option<f64> {
        self.level_values().and_then(|v| v.get(k).copied())
    }

    /// Value of every state of `model`.
    pub fn on_model(&self, model: &TransitionModel) -> Result<Vec<f64>> {
        match &self.values {
            Values::Levels(v) => {
                if v.len() != model.n() + 1 {
                    return Err(Error::InvalidDistance(format!(
                        "level table has {} entries, model needs {}",
                        v.len(),
                        model.n() + 1
                    )));
                }
                Ok((0..model.num_states() as u32)
                    .map(|s| v[model.level(s)])
                    .collect())
            }
            Values::States(v) => {
                if v.len() != model.num_states() {
                    return Err(Error::InvalidDistance(format!(
                        "state table has {} entries, model has {} states",
                        v.len(),
                        model.num_states()
                    )));
                }
                Ok(v.clone())
            }
        }
    }

    pub fn eval(&self, x: &BitString) -> Result<f64> {
        match &self.values {
            Values::Levels(v) => v
                .get(x.zeros_count())
                .copied()
                .filter(|_| v.len() == x.len() + 1)
                .ok_or_else(|| Error::InvalidDistance(format!("no value for length {}", x.len()))),
            Values::States(v) => {
                if x.len() <= 32 && v.len() == 1usize << x.len() {
                    Ok(v[x.to_index() as usize])
                } else {
                    Err(Error::InvalidDistance(format!(
                        "state table does not cover length {}",
                        x.len()
                    )))
                }
            }
        }
    }

    /// Fails unless the distance vanishes on every optimal state of `model`.
    pub fn check_zero_on_optimum(&self, model: &TransitionModel) -> Result<Vec<f64>> {
        let d = self.on_model(model)?;
        for s in 0..model.num_states() as u32 {
            if model.is_optimal(s) && d[s as usize] != 0.0 {
                return Err(Error::InvalidDistance(format!(
                    "d({}) = {} on an optimal state",
                    model.label(s),
                    d[s as usize]
                )));
            }
        }
        Ok(d)
    }
}

fn validate(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidDistance("empty table".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidDistance(
            "values must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// `d(Phi_0)` under uniform initialization: `sum_k d_k C(n,k) / 2^n` for
/// level tables, the plain average for state tables.
pub fn expected_initial_distance(d: &DistanceFunction, n: usize) -> Result<f64> {
    match &d.values {
        Values::Levels(v) => {
            if v.len() != n + 1 {
                return Err(Error::InvalidDistance(format!(
                    "level table has {} entries for n = {n}",
                    v.len()
                )));
            }
            Ok(crate::oracle::binomial_half_pmf(n)
                .iter()
                .zip(v)
                .map(|(w, d)| w * d)
                .sum())
        }
        Values::States(v) => {
            if n >= 64 || v.len() as u64 != 1u64 << n {
                return Err(Error::InvalidDistance(
                    "state table must cover all 2^n strings".into(),
                ));
            }
            Ok(v.iter().sum::<f64>() / v.len() as f64)
        }
    }
}
