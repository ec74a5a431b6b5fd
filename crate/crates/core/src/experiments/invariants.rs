use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, SideClass};
use crate::engine::{run_seed, uniform_bitstring, Generation};
use crate::error::{Error, Result};
use crate::fitness::{check_linear_like, FitnessFunction, FitnessKind, Weights, CHECKER_CAP};
use crate::oracle::{StateDistribution, TransitionModel, FULL_MODEL_CAP};

pub const EXACT_TOLERANCE: f64 = 1e-10;
pub const MIN_MC_REPLICATES: usize = 100_000;
const MC_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvariantOptions {
    /// Trajectories for the Monte Carlo fallback.
    pub replicates: usize,
    pub seed: u64,
    /// Use Monte Carlo even when the exact model fits.
    pub force_monte_carlo: bool,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions {
            replicates: MIN_MC_REPLICATES,
            seed: 0,
            force_monte_carlo: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantStep {
    pub t: u64,
    /// `P(S_L)`: more ones in the left half.
    pub p_left: f64,
    /// `P(S_R)`, the non-optimal complement of `S_L`; includes balanced strings.
    pub p_right: f64,
    /// Strictly more ones in the right half: the mirror image of `S_L`.
    pub p_right_heavy: f64,
    /// `P(bit i = 1)`, leftmost position first.
    pub marginals: Vec<f64>,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub fitness: String,
    pub n: usize,
    pub population: usize,
    pub horizon: u64,
    pub mode: InvariantMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replicates: Option<usize>,
    pub steps: Vec<InvariantStep>,
    /// Steps where `P(S_L)` falls below `P(S_R_heavy)` or the marginals increase.
    pub flagged_steps: Vec<u64>,
    /// Steps where `P(S_L) < P(S_R)` with balanced strings counted in `S_R`;
    /// informational, since balanced strings alone can outweigh `S_L`.
    pub complement_shortfall_steps: Vec<u64>,
    pub passed: bool,
}

impl InvariantReport {
    /// Largest `|P(S_L) - P(S_R_heavy)|` over all steps.
    pub fn max_side_gap(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| (s.p_left - s.p_right_heavy).abs())
            .fold(0.0, f64::max)
    }
}

fn ensure_linear_like(f: &FitnessFunction) -> Result<()> {
    if f.n() <= CHECKER_CAP {
        let report = check_linear_like(f)?;
        return match report.holds {
            true => Ok(()),
            false => Err(Error::NotLinearLike {
                condition: report.condition.map_or(0, |c| c.number()),
            }),
        };
    }
    // beyond the checker: sorted positive weights are linear-like
    match f.kind() {
        FitnessKind::OneMax | FitnessKind::BinVal => Ok(()),
        FitnessKind::Linear(Weights::Int(w))
            if w.windows(2).all(|p| p[0] >= p[1]) && w.iter().all(|&x| x > 0) =>
        {
            Ok(())
        }
        FitnessKind::Linear(Weights::Real(w))
            if w.windows(2).all(|p| p[0] >= p[1]) && w.iter().all(|&x| x > 0.0) =>
        {
            Ok(())
        }
        FitnessKind::Linear(_) => Err(Error::NotLinearLike { condition: 2 }),
        _ => Err(Error::CapExceeded {
            what: "linear-like checker",
            n: f.n(),
            cap: CHECKER_CAP,
        }),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Balanced,
    RightHeavy,
    Optimal,
}

fn side(x: &BitString) -> Side {
    match x.classify_side() {
        SideClass::Optimal => Side::Optimal,
        SideClass::LeftHeavy => Side::Left,
        SideClass::Right => {
            let half = x.left_half_len();
            let left = (0..half).filter(|&i| x.get(i)).count();
            if x.ones_count() - left > left {
                Side::RightHeavy
            } else {
                Side::Balanced
            }
        }
    }
}

/// Tracks `P(S_L) >= P(right-heavy)` and the ordering of the per-bit marginals for
/// `t = 0..=horizon` from uniform initialization.
pub fn invariant_distribution_check(
    f: &FitnessFunction,
    population: usize,
    horizon: u64,
    options: InvariantOptions,
) -> Result<InvariantReport> {
    ensure_linear_like(f)?;
    if population == 0 {
        return Err(Error::InvalidConfig(
            "population size must be at least 1".into(),
        ));
    }
    let (mode, steps) = if f.n() <= FULL_MODEL_CAP && !options.force_monte_carlo {
        (InvariantMode::Exact, exact_steps(f, population, horizon)?)
    } else {
        if options.replicates < MIN_MC_REPLICATES {
            return Err(Error::InvalidConfig(format!(
                "Monte Carlo invariant checks need at least {MIN_MC_REPLICATES} replicates"
            )));
        }
        (
            InvariantMode::MonteCarlo,
            mc_steps(f, population, horizon, options),
        )
    };
    let flagged_steps: Vec<u64> = steps.iter().filter(|s| s.flagged).map(|s| s.t).collect();
    let complement_shortfall_steps = steps
        .iter()
        .filter(|s| s.p_left < s.p_right - EXACT_TOLERANCE)
        .map(|s| s.t)
        .collect();
    Ok(InvariantReport {
        fitness: f.name().to_string(),
        n: f.n(),
        population,
        horizon,
        mode,
        replicates: (mode == InvariantMode::MonteCarlo).then_some(options.replicates),
        passed: flagged_steps.is_empty(),
        flagged_steps,
        complement_shortfall_steps,
        steps,
    })
}

fn exact_steps(f: &FitnessFunction, population: usize, horizon: u64) -> Result<Vec<InvariantStep>> {
    let n = f.n();
    let model = TransitionModel::build(f, population)?;
    let states: Vec<BitString> = (0..model.num_states() as u64)
        .map(|s| BitString::from_index(n, s))
        .collect();
    let sides: Vec<Side> = states.iter().map(side).collect();
    let mut dist = StateDistribution::uniform(&model);
    let mut steps = Vec::with_capacity(horizon as usize + 1);
    for t in 0..=horizon {
        let (mut p_left, mut p_balanced, mut p_right_heavy) = (0.0, 0.0, 0.0);
        let mut marginals = vec![0.0; n];
        for (s, &p) in dist.probs.iter().enumerate() {
            match sides[s] {
                Side::Left => p_left += p,
                Side::Balanced => p_balanced += p,
                Side::RightHeavy => p_right_heavy += p,
                Side::Optimal => {}
            }
            for i in states[s].one_positions() {
                marginals[i] += p;
            }
        }
        let flagged = p_left < p_right_heavy - EXACT_TOLERANCE
            || marginals.windows(2).any(|w| w[1] > w[0] + EXACT_TOLERANCE);
        let p_right = p_balanced + p_right_heavy;
        steps.push(InvariantStep {
            t,
            p_left,
            p_right,
            p_right_heavy,
            marginals,
            flagged,
        });
        dist = dist.step(&model);
    }
    Ok(steps)
}

/// Per-generation counts summed over trajectories.
#[derive(Clone)]
struct Counts {
    n: usize,
    left: Vec<u64>,
    balanced: Vec<u64>,
    right: Vec<u64>,
    /// `ones[t * n + i]`
    ones: Vec<u64>,
    /// `differ[t * (n - 1) + i]`: bits `i` and `i + 1` differ
    differ: Vec<u64>,
}

impl Counts {
    fn new(n: usize, horizon: u64) -> Self {
        let steps = horizon as usize + 1;
        Counts {
            n,
            left: vec![0; steps],
            balanced: vec![0; steps],
            right: vec![0; steps],
            ones: vec![0; steps * n],
            differ: vec![0; steps * n.saturating_sub(1)],
        }
    }

    fn record(&mut self, t: usize, x: &BitString) {
        let n = self.n;
        match side(x) {
            Side::Left => self.left[t] += 1,
            Side::Balanced => self.balanced[t] += 1,
            Side::RightHeavy => self.right[t] += 1,
            Side::Optimal => {}
        }
        for i in 0..n {
            let bit = x.get(i);
            self.ones[t * n + i] += bit as u64;
            if i + 1 < n && bit != x.get(i + 1) {
                self.differ[t * (n - 1) + i] += 1;
            }
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        for (a, b) in [
            (&mut self.left, &other.left),
            (&mut self.balanced, &other.balanced),
            (&mut self.right, &other.right),
            (&mut self.ones, &other.ones),
            (&mut self.differ, &other.differ),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self
    }
}

fn mc_steps(
    f: &FitnessFunction,
    population: usize,
    horizon: u64,
    options: InvariantOptions,
) -> Vec<InvariantStep> {
    let n = f.n();
    let counts = (0..options.replicates as u64)
        .into_par_iter()
        .fold(
            || Counts::new(n, horizon),
            |mut acc, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(run_seed(options.seed, i));
                let mut x = uniform_bitstring(n, &mut rng);
                let mut value = f.value(&x);
                let mut generation = Generation::new(f, population);
                let target = f.max_value();
                for t in 0..=horizon as usize {
                    acc.record(t, &x);
                    if t < horizon as usize && value != target {
                        generation.step(&mut x, &mut value, &mut rng);
                    }
                }
                acc
            },
        )
        .reduce(|| Counts::new(n, horizon), Counts::merge);

    let r = options.replicates as f64;
    (0..=horizon as usize)
        .map(|t| {
            let p_left = counts.left[t] as f64 / r;
            let p_right_heavy = counts.right[t] as f64 / r;
            let p_right = p_right_heavy + counts.balanced[t] as f64 / r;
            let marginals: Vec<f64> = (0..n).map(|i| counts.ones[t * n + i] as f64 / r).collect();
            // one-sided tests on per-trajectory differences
            let side_var = (p_left + p_right_heavy - (p_left - p_right_heavy).powi(2)).max(0.0);
            let mut flagged = p_left - p_right_heavy < -MC_SIGMAS * (side_var / r).sqrt();
            for i in 0..n.saturating_sub(1) {
                let gap = marginals[i + 1] - marginals[i];
                let differ = counts.differ[t * (n - 1) + i] as f64 / r;
                let var = (differ - gap * gap).max(0.0);
                if gap > MC_SIGMAS * (var / r).sqrt() {
                    flagged = true;
                }
            }
            InvariantStep {
                t: t as u64,
                p_left,
                p_right,
                p_right_heavy,
                marginals,
                flagged,
            }
        })
        .collect()
}
