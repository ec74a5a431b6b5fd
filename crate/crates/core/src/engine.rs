//! Stochastic simulator for the (1+N) EA with bitwise mutation rate `1/n`
//! and strict elitist selection.
//!
//! Seeding: a run seeded with `s` uses `ChaCha8Rng::seed_from_u64(s)`. Replicate
//! `i` of a batch with master seed `m` is seeded with [`run_seed`]`(m, i)`, a
//! SplitMix64 finalizer applied to `m + (i + 1) * 0x9E3779B97F4A7C15`, so the
//! outcome of every replicate depends only on `(m, i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::fitness::{FitnessFunction, FitnessValue};

#[derive(Clone, Debug)]
pub struct EaConfig {
    pub fitness: FitnessFunction,
    /// Children per generation, `N >= 1`.
    pub population: usize,
    pub max_generations: u64,
    pub record_trajectory: bool,
}

impl EaConfig {
    pub fn new(fitness: FitnessFunction, population: usize) -> Result<Self> {
        if population == 0 {
            return Err(Error::InvalidConfig(
                "population size must be at least 1".into(),
            ));
        }
        let max_generations = default_max_generations(fitness.n());
        Ok(EaConfig {
            fitness,
            population,
            max_generations,
            record_trajectory: false,
        })
    }

    pub fn with_max_generations(mut self, max_generations: u64) -> Self {
        self.max_generations = max_generations;
        self
    }

    pub fn with_trajectory(mut self, record: bool) -> Self {
        self.record_trajectory = record;
        self
    }
}

/// `ceil(1000 * n * (ln n + 1))`.
pub fn default_max_generations(n: usize) -> u64 {
    let n = n as f64;
    (1000.0 * n * (n.ln() + 1.0)).ceil() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Selection steps executed before the parent became optimal.
    pub generations: u64,
    /// `generations * N`.
    pub evaluations: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<BitString>>,
    pub hit_optimum: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub runs: usize,
    pub population: usize,
    pub mean_generations: f64,
    pub mean_evaluations: f64,
    /// Standard error of the mean generations over completed runs.
    pub std_error: f64,
    pub std_error_evaluations: f64,
    pub timeout_count: usize,
}

/// Independent bitwise mutation, each bit flipped with probability `1/n`.
pub struct Mutator {
    n: usize,
    gap: Geometric,
}

impl Mutator {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Mutator {
            n,
            gap: Geometric::new(1.0 / n as f64).expect("1/n is a valid probability"),
        }
    }

    /// Overwrites `child` with a mutant of `parent`. The gaps between flipped
    /// positions are geometric, which is the same law as `n` Bernoulli draws.
    pub fn mutate_into<R: Rng + ?Sized>(
        &self,
        parent: &BitString,
        child: &mut BitString,
        rng: &mut R,
    ) {
        child.clone_from(parent);
        let mut pos = 0u64;
        loop {
            pos = pos.saturating_add(self.gap.sample(rng));
            if pos >= self.n as u64 {
                break;
            }
            child.flip(pos as usize);
            pos += 1;
        }
    }

    pub fn mutate<R: Rng + ?Sized>(&self, parent: &BitString, rng: &mut R) -> BitString {
        let mut child = parent.clone();
        self.mutate_into(parent, &mut child, rng);
        child
    }
}

pub fn mutate<R: Rng + ?Sized>(x: &BitString, rng: &mut R) -> BitString {
    Mutator::new(x.len()).mutate(x, rng)
}

/// Index of a fittest child, ties broken uniformly at random.
fn fittest<R: Rng + ?Sized>(values: &[FitnessValue], rng: &mut R) -> usize {
    let mut best = 0;
    let mut ties = 1u32;
    for (i, v) in values.iter().enumerate().skip(1) {
        match v.cmp(&values[best]) {
            std::cmp::Ordering::Greater => {
                best = i;
                ties = 1;
            }
            std::cmp::Ordering::Equal => {
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best = i;
                }
            }
            std::cmp::Ordering::Less => {}
        }
    }
    best
}

/// Strict elitist selection: a fittest child (uniform among ties) replaces
/// the parent only if it is strictly better.
pub fn select<R: Rng + ?Sized>(
    parent: &BitString,
    children: &[BitString],
    f: &FitnessFunction,
    rng: &mut R,
) -> Result<BitString> {
    let parent_value = f.evaluate(parent)?;
    if children.is_empty() {
        return Ok(parent.clone());
    }
    let values = children
        .iter()
        .map(|c| f.evaluate(c))
        .collect::<Result<Vec<_>>>()?;
    let best = fittest(&values, rng);
    Ok(if values[best] > parent_value {
        children[best].clone()
    } else {
        parent.clone()
    })
}

/// One generation of the EA with reusable buffers.
pub struct Generation<'a> {
    f: &'a FitnessFunction,
    mutator: Mutator,
    children: Vec<BitString>,
    values: Vec<FitnessValue>,
}

impl<'a> Generation<'a> {
    pub fn new(f: &'a FitnessFunction, population: usize) -> Self {
        assert!(population >= 1);
        let n = f.n();
        Generation {
            f,
            mutator: Mutator::new(n),
            children: vec![BitString::zeros(n); population],
            values: vec![FitnessValue::Int(0); population],
        }
    }

    /// Runs one mutation/selection step; returns true if the parent was replaced.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        parent: &mut BitString,
        parent_value: &mut FitnessValue,
        rng: &mut R,
    ) -> bool {
        for (child, value) in self.children.iter_mut().zip(self.values.iter_mut()) {
            self.mutator.mutate_into(parent, child, rng);
            *value = self.f.value(child);
        }
        let best = fittest(&self.values, rng);
        if self.values[best] > *parent_value {
            parent.clone_from(&self.children[best]);
            *parent_value = self.values[best];
            true
        } else {
            false
        }
    }
}

pub fn uniform_bitstring<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitString {
    let mut x = BitString::zeros(n);
    for i in 0..n {
        if rng.random::<bool>() {
            x.set(i, true);
        }
    }
    x
}

/// Runs from a uniformly random initial parent.
pub fn run_ea(cfg: &EaConfig, seed: u64) -> RunRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = uniform_bitstring(cfg.fitness.n(), &mut rng);
    run_from(cfg, init, &mut rng, seed)
}

/// Runs from a given initial parent, drawing from `rng`; `seed` is only
/// echoed into the record.
pub fn run_from<R: Rng + ?Sized>(
    cfg: &EaConfig,
    init: BitString,
    rng: &mut R,
    seed: u64,
) -> RunRecord {
    let f = &cfg.fitness;
    assert_eq!(init.len(), f.n(), "initial parent has the wrong length");
    let target = f.max_value();
    let mut parent = init;
    let mut value = f.value(&parent);
    let mut trajectory = cfg.record_trajectory.then(|| vec![parent.clone()]);
    let mut generation = Generation::new(f, cfg.population);
    let mut generations = 0u64;
    while value != target && generations < cfg.max_generations {
        generation.step(&mut parent, &mut value, rng);
        generations += 1;
        if let Some(t) = trajectory.as_mut() {
            t.push(parent.clone());
        }
    }
    RunRecord {
        generations,
        evaluations: generations * cfg.population as u64,
        seed,
        trajectory,
        hit_optimum: value == target,
    }
}

/// Seed of replicate `index` under `master_seed`.
pub fn run_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean and standard error (sample std / sqrt(len)); zero error below two samples.
pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let len = xs.len();
    if len == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / len as f64;
    if len < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1) as f64;
    (mean, (var / len as f64).sqrt())
}

/// `runs` independent replicates; the result does not depend on scheduling.
pub fn batch_run(cfg: &EaConfig, runs: usize, master_seed: u64) -> Result<BatchStats> {
    if runs == 0 {
        return Err(Error::InvalidConfig("batch needs at least one run".into()));
    }
    let cfg = EaConfig {
        record_trajectory: false,
        ..cfg.clone()
    };
    let outcomes: Vec<(u64, bool)> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let r = run_ea(&cfg, run_seed(master_seed, i));
            (r.generations, r.hit_optimum)
        })
        .collect();
    Ok(stats_from(&outcomes, cfg.population))
}

pub(crate) fn stats_from(outcomes: &[(u64, bool)], population: usize) -> BatchStats {
    let gens: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.1)
        .map(|o| o.0 as f64)
        .collect();
    let evals: Vec<f64> = gens.iter().map(|g| g * population as f64).collect();
    let (mean_generations, std_error) = mean_and_stderr(&gens);
    let (mean_evaluations, std_error_evaluations) = mean_and_stderr(&evals);
    BatchStats {
        runs: outcomes.len(),
        population,
        mean_generations,
        mean_evaluations,
        std_error,
        std_error_evaluations,
        timeout_count: outcomes.len() - gens.len(),
    }
}
