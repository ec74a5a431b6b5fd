use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distance::DistanceFunction;
use crate::bits::BitString;
use crate::engine::Generation;
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Averages `d(x) - d(next)` over `samples` independent generations from `x`.
pub fn estimate_drift_mc(
    x: &BitString,
    d: &DistanceFunction,
    f: &FitnessFunction,
    population: usize,
    samples: u64,
    seed: u64,
) -> Result<DriftEstimate> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    if population == 0 {
        return Err(Error::InvalidConfig(
            "population size must be at least 1".into(),
        ));
    }
    let start_value = f.evaluate(x)?;
    let here = d.eval(x)?;
    let levels = d.level_values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut generation = Generation::new(f, population);
    let mut parent = x.clone();
    // Welford's running mean and sum of squared deviations
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 1..=samples {
        let mut value = start_value;
        parent.clone_from(x);
        let gain = if generation.step(&mut parent, &mut value, &mut rng) {
            here - match levels {
                Some(v) => v[parent.zeros_count()],
                None => d.eval(&parent)?,
            }
        } else {
            0.0
        };
        let delta = gain - mean;
        mean += delta / i as f64;
        m2 += delta * (gain - mean);
    }
    let stderr = if samples > 1 {
        (m2 / (samples - 1) as f64 / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(DriftEstimate {
        mean,
        stderr,
        samples,
    })
}
