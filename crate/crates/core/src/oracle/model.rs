use rayon::prelude::*;

use crate::bits::{check_enumeration_cap, BitString};
use crate::error::{Error, Result};
use crate::fitness::{FitnessFunction, FitnessValue};

/// Largest `n` for a full-space model.
pub const FULL_MODEL_CAP: usize = 12;

/// Largest `n` for the lumped OneMax chain.
pub const LUMPED_MODEL_CAP: usize = 10_000;

/// Rows off by more than this are rescaled.
const ROW_SUM_TOLERANCE: f64 = 1e-12;
/// Rows off by more than this are rejected. Rounding over thousands of
/// binomial terms reaches a few 1e-12 on large lumped rows.
const ROW_SUM_REJECT: f64 = 1e-9;

/// How states are indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpace {
    /// State `s` is `BitString::from_index(n, s)`.
    Full,
    /// State `k` is the level set `S_k`.
    Lumped,
    /// Built from explicit rows; states carry only their level.
    Custom,
}

/// Exact next-parent law of the (1+N) EA.
///
/// Rows are split into the self-loop probability and the strictly-fitter
/// successors; elitism guarantees nothing else receives mass.
#[derive(Clone, Debug)]
pub struct TransitionModel {
    space: StateSpace,
    n: usize,
    population: usize,
    levels: Vec<usize>,
    optimal: Vec<bool>,
    stay: Vec<f64>,
    moves: Vec<Vec<(u32, f64)>>,
    /// Every state appears after all of its successors.
    solve_order: Vec<u32>,
}

/// Children of one fitness level: total mass and the per-string split.
#[derive(Clone, Debug, PartialEq)]
pub struct ChildLevel {
    pub value: FitnessValue,
    pub mass: f64,
    pub children: Vec<(BitString, f64)>,
}

/// `q(y | x) = (1/n)^H (1 - 1/n)^(n - H)` indexed by Hamming distance `H`.
pub(crate) fn mutation_law(n: usize) -> Vec<f64> {
    let p = 1.0 / n as f64;
    (0..=n)
        .map(|h| p.powi(h as i32) * (1.0 - p).powi((n - h) as i32))
        .collect()
}

/// `sum_{i<N} a^i b^(N-1-i)`, i.e. `(a^N - b^N) / (a - b)` without cancellation.
pub(crate) fn best_of_factor(a: f64, b: f64, population: usize) -> f64 {
    let last = population as i32 - 1;
    (0..=last).map(|i| a.powi(i) * b.powi(last - i)).sum()
}

fn check_full_cap(n: usize) -> Result<()> {
    check_enumeration_cap(n)?;
    if n > FULL_MODEL_CAP {
        return Err(Error::CapExceeded {
            what: "full-space model",
            n,
            cap: FULL_MODEL_CAP,
        });
    }
    Ok(())
}

fn check_population(population: usize) -> Result<()> {
    if population == 0 {
        return Err(Error::InvalidConfig(
            "population size must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Single-child law from `x`, grouped by exact fitness, ascending.
pub fn child_distribution(x: &BitString, f: &FitnessFunction) -> Result<Vec<ChildLevel>> {
    let n = f.n();
    f.evaluate(x)?;
    check_enumeration_cap(n)?;
    let q = mutation_law(n);
    let mut children: Vec<(FitnessValue, BitString, f64)> = (0..(1u64 << n))
        .map(|s| {
            let y = BitString::from_index(n, s);
            let mass = q[x.hamming(&y)];
            (f.value(&y), y, mass)
        })
        .filter(|c| c.2 > 0.0)
        .collect();
    children.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut levels: Vec<ChildLevel> = Vec::new();
    for (value, y, mass) in children {
        match levels.last_mut() {
            Some(level) if level.value == value => {
                level.mass += mass;
                level.children.push((y, mass));
            }
            _ => levels.push(ChildLevel {
                value,
                mass,
                children: vec![(y, mass)],
            }),
        }
    }
    Ok(levels)
}

/// Next-parent distribution from `x` with `population` children; the entry
/// for `x` itself is always present.
pub fn transition_row(
    x: &BitString,
    f: &FitnessFunction,
    population: usize,
) -> Result<Vec<(BitString, f64)>> {
    check_population(population)?;
    let levels = child_distribution(x, f)?;
    let own = f.value(x);
    let mut row = Vec::new();
    let mut below = 0.0;
    let mut stay = 0.0;
    for level in &levels {
        if level.value <= own {
            below += level.mass;
            stay = below;
            continue;
        }
        let factor = best_of_factor(below + level.mass, below, population);
        for (y, q) in &level.children {
            row.push((y.clone(), q * factor));
        }
        below += level.mass;
    }
    let stay = if row.is_empty() {
        1.0
    } else {
        stay.powi(population as i32)
    };
    row.push((x.clone(), stay));
    row.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(row)
}

impl TransitionModel {
    /// Full `2^n`-state model.
    pub fn build(f: &FitnessFunction, population: usize) -> Result<Self> {
        let n = f.n();
        check_full_cap(n)?;
        check_population(population)?;
        let size = 1usize << n;
        let values = f.value_table()?;

        let mut sorted: Vec<u32> = (0..size as u32).collect();
        sorted.sort_by(|&a, &b| values[a as usize].cmp(&values[b as usize]));
        let mut rank = vec![0u32; size];
        let mut ranks = 0u32;
        for (i, &s) in sorted.iter().enumerate() {
            if i > 0 && values[s as usize] != values[sorted[i - 1] as usize] {
                ranks += 1;
            }
            rank[s as usize] = ranks;
        }
        let ranks = ranks as usize + 1;
        let top = ranks as u32 - 1;
        let q = mutation_law(n);

        let rows: Vec<(f64, Vec<(u32, f64)>)> = (0..size)
            .into_par_iter()
            .map(|x| {
                let rx = rank[x] as usize;
                let mut mass = vec![0.0; ranks];
                for y in 0..size {
                    mass[rank[y] as usize] += q[(x ^ y).count_ones() as usize];
                }
                let below_own: f64 = mass[..=rx].iter().sum();
                let mut factor = vec![0.0; ranks];
                let mut below = below_own;
                for r in (rx + 1)..ranks {
                    if mass[r] > 0.0 {
                        factor[r] = best_of_factor(below + mass[r], below, population);
                    }
                    below += mass[r];
                }
                let mut moves = Vec::new();
                for &y in &sorted {
                    let ry = rank[y as usize] as usize;
                    if ry <= rx {
                        continue;
                    }
                    let p = q[(x ^ y as usize).count_ones() as usize] * factor[ry];
                    if p > 0.0 {
                        moves.push((y, p));
                    }
                }
                (below_own.powi(population as i32), moves)
            })
            .collect();

        let levels = (0..size)
            .map(|s| n - (s as u64).count_ones() as usize)
            .collect();
        let optimal: Vec<bool> = rank.iter().map(|&r| r == top).collect();
        let (stay, moves) = rows.into_iter().unzip();
        let mut order = sorted;
        order.reverse();
        Self::assemble(
            StateSpace::Full,
            n,
            population,
            levels,
            optimal,
            stay,
            moves,
            Some(order),
        )
    }

    /// Lumped `(n+1)`-level chain for OneMax; state `k` is `S_k`.
    pub fn build_lumped(f: &FitnessFunction, population: usize) -> Result<Self> {
        if !f.is_symmetric() {
            return Err(Error::InvalidFitness(format!(
                "{} is not lumpable by level",
                f.name()
            )));
        }
        let n = f.n();
        if n > LUMPED_MODEL_CAP {
            return Err(Error::CapExceeded {
                what: "lumped model",
                n,
                cap: LUMPED_MODEL_CAP,
            });
        }
        check_population(population)?;
        let rows: Vec<(f64, Vec<(u32, f64)>)> = (0..=n)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    return (1.0, Vec::new());
                }
                let child = lumped_child_levels(n, k);
                // tail[j] = mass of child levels >= j (fitness <= n - j)
                let mut tail = vec![0.0; n + 2];
                for j in (0..=n).rev() {
                    tail[j] = tail[j + 1] + child[j];
                }
                let moves = (0..k)
                    .filter(|&j| child[j] > 0.0)
                    .map(|j| {
                        (
                            j as u32,
                            child[j] * best_of_factor(tail[j], tail[j + 1], population),
                        )
                    })
                    .collect();
                (tail[k].powi(population as i32), moves)
            })
            .collect();
        let levels = (0..=n).collect();
        let mut optimal = vec![false; n + 1];
        optimal[0] = true;
        let (stay, moves) = rows.into_iter().unzip();
        let order = (0..=n as u32).collect();
        Self::assemble(
            StateSpace::Lumped,
            n,
            population,
            levels,
            optimal,
            stay,
            moves,
            Some(order),
        )
    }

    /// Model from explicit rows `rows[s] = [(t, P(t | s)), ...]`. Mass may go
    /// to `s` itself; the remaining transitions must form a DAG.
    pub fn from_rows(
        levels: Vec<usize>,
        optimal: Vec<bool>,
        rows: Vec<Vec<(u32, f64)>>,
    ) -> Result<Self> {
        let size = rows.len();
        if levels.len() != size || optimal.len() != size {
            return Err(Error::InvalidModel(
                "levels, optimal and rows must have equal length".into(),
            ));
        }
        let mut stay = vec![0.0; size];
        let mut moves = vec![Vec::new(); size];
        for (s, row) in rows.into_iter().enumerate() {
            for (t, p) in row {
                if t as usize >= size || p < 0.0 || p.is_nan() {
                    return Err(Error::InvalidModel(format!("bad entry ({s} -> {t}, {p})")));
                }
                if t as usize == s {
                    stay[s] += p;
                } else {
                    moves[s].push((t, p));
                }
            }
        }
        let n = levels.iter().copied().max().unwrap_or(0);
        Self::assemble(StateSpace::Custom, n, 1, levels, optimal, stay, moves, None)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        space: StateSpace,
        n: usize,
        population: usize,
        levels: Vec<usize>,
        optimal: Vec<bool>,
        stay: Vec<f64>,
        moves: Vec<Vec<(u32, f64)>>,
        order: Option<Vec<u32>>,
    ) -> Result<Self> {
        let mut model = TransitionModel {
            space,
            n,
            population,
            levels,
            optimal,
            stay,
            moves,
            solve_order: Vec::new(),
        };
        for s in 0..model.num_states() {
            if model.optimal[s] {
                model.stay[s] = 1.0;
                model.moves[s].clear();
            }
            let sum = model.stay[s] + model.moves[s].iter().map(|m| m.1).sum::<f64>();
            if (sum - 1.0).abs() > ROW_SUM_REJECT {
                return Err(Error::InvalidModel(format!(
                    "row {} sums to {sum}",
                    model.label(s as u32)
                )));
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                model.stay[s] /= sum;
                model.moves[s].iter_mut().for_each(|m| m.1 /= sum);
            }
        }
        model.solve_order = match order {
            Some(order) => order,
            None => model.topological_order()?,
        };
        Ok(model)
    }

    /// Reverse topological order of the move graph (successors first).
    fn topological_order(&self) -> Result<Vec<u32>> {
        let size = self.num_states();
        let mut pending: Vec<usize> = self.moves.iter().map(|m| m.len()).collect();
        let mut preds = vec![Vec::new(); size];
        for (s, row) in self.moves.iter().enumerate() {
            for &(t, _) in row {
                preds[t as usize].push(s as u32);
            }
        }
        let mut order: Vec<u32> = (0..size as u32)
            .filter(|&s| pending[s as usize] == 0)
            .collect();
        let mut head = 0;
        while head < order.len() {
            let t = order[head];
            head += 1;
            for &s in &preds[t as usize] {
                pending[s as usize] -= 1;
                if pending[s as usize] == 0 {
                    order.push(s);
                }
            }
        }
        if order.len() != size {
            return Err(Error::InvalidModel(
                "transitions other than self-loops form a cycle".into(),
            ));
        }
        Ok(order)
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn num_states(&self) -> usize {
        self.levels.len()
    }

    /// Number of zero bits of the state (its level index).
    pub fn level(&self, s: u32) -> usize {
        self.levels[s as usize]
    }

    pub fn is_optimal(&self, s: u32) -> bool {
        self.optimal[s as usize]
    }

    pub fn stay(&self, s: u32) -> f64 {
        self.stay[s as usize]
    }

    /// Strictly fitter successors with their probabilities.
    pub fn moves(&self, s: u32) -> &[(u32, f64)] {
        &self.moves[s as usize]
    }

    /// Full row including the self-loop, sorted by state.
    pub fn row(&self, s: u32) -> Vec<(u32, f64)> {
        let mut row = self.moves[s as usize].clone();
        row.push((s, self.stay[s as usize]));
        row.sort_by_key(|e| e.0);
        row
    }

    /// States ordered so that every state follows all of its successors.
    pub fn solve_order(&self) -> &[u32] {
        &self.solve_order
    }

    pub fn bitstring(&self, s: u32) -> Option<BitString> {
        (self.space == StateSpace::Full).then(|| BitString::from_index(self.n, s as u64))
    }

    pub fn state_of(&self, x: &BitString) -> Option<u32> {
        match self.space {
            StateSpace::Full if x.len() == self.n => Some(x.to_index() as u32),
            StateSpace::Lumped if x.len() == self.n => Some(x.zeros_count() as u32),
            _ => None,
        }
    }

    /// Bit-string literal for full models, level number otherwise.
    pub fn label(&self, s: u32) -> String {
        match self.bitstring(s) {
            Some(x) => x.to_string(),
            None => self.levels[s as usize].to_string(),
        }
    }

    /// Probability of each state under uniform initialization.
    pub fn uniform_weights(&self) -> Vec<f64> {
        match self.space {
            StateSpace::Full => vec![1.0 / self.num_states() as f64; self.num_states()],
            StateSpace::Lumped => binomial_half_pmf(self.n),
            StateSpace::Custom => vec![1.0 / self.num_states() as f64; self.num_states()],
        }
    }

    /// Sparse triplet CSV `from_state,to_state,prob`, including self-loops.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from_state,to_state,prob\n");
        for s in 0..self.num_states() as u32 {
            for (t, p) in self.row(s) {
                out.push_str(&format!("{},{},{:e}\n", self.label(s), self.label(t), p));
            }
        }
        out
    }
}

/// `C(n, k) / 2^n` for `k = 0..=n`, computed in log space.
pub fn binomial_half_pmf(n: usize) -> Vec<f64> {
    let mut log = -(n as f64) * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        out.push(log.exp());
        if k < n {
            log += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    out
}

/// Binomial(`trials`, `p`) pmf, truncated once terms past the mode drop below
/// `1e-300`.
fn binomial_pmf_truncated(trials: usize, p: f64) -> Vec<f64> {
    if p >= 1.0 {
        let mut v = vec![0.0; trials + 1];
        v[trials] = 1.0;
        return v;
    }
    let mut out = Vec::new();
    let mut term = (1.0 - p).powi(trials as i32);
    let ratio = p / (1.0 - p);
    let mode = (trials as f64 * p).ceil() as usize;
    for a in 0..=trials {
        out.push(term);
        if a >= mode && term < 1e-300 {
            break;
        }
        term *= (trials - a) as f64 / (a + 1) as f64 * ratio;
    }
    out
}

/// Single-child level law from level `k` of an `n`-bit OneMax instance.
fn lumped_child_levels(n: usize, k: usize) -> Vec<f64> {
    let p = 1.0 / n as f64;
    let up = binomial_pmf_truncated(k, p); // zeros flipped to ones
    let down = binomial_pmf_truncated(n - k, p); // ones flipped to zeros
    let mut levels = vec![0.0; n + 1];
    for (a, pa) in up.iter().enumerate() {
        for (b, pb) in down.iter().enumerate() {
            levels[k - a + b] += pa * pb;
        }
    }
    levels
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn lookup(row: &[(BitString, f64)], s: &str) -> f64 {
        row.iter()
            .find(|e| e.0 == bs(s))
            .map(|e| e.1)
            .unwrap_or(0.0)
    }

    /// Independent oracle: enumerate every N-tuple of children, pick a
    /// fittest one uniformly, keep the parent unless strictly improved.
    fn brute_force_row(
        x: &BitString,
        f: &FitnessFunction,
        population: usize,
    ) -> Vec<(BitString, f64)> {
        let n = f.n();
        let size = 1usize << n;
        let p = 1.0 / n as f64;
        let q: Vec<f64> = (0..size)
            .map(|s| {
                let h = x.hamming(&BitString::from_index(n, s as u64));
                p.powi(h as i32) * (1.0 - p).powi((n - h) as i32)
            })
            .collect();
        let mut out = vec![0.0; size];
        let own = f.value(x);
        let mut tuple = vec![0usize; population];
        loop {
            let prob: f64 = tuple.iter().map(|&c| q[c]).product();
            if prob > 0.0 {
                let vals: Vec<FitnessValue> = tuple
                    .iter()
                    .map(|&c| f.value(&BitString::from_index(n, c as u64)))
                    .collect();
                let best = *vals.iter().max().unwrap();
                if best > own {
                    let winners: Vec<usize> = (0..population)
                        .filter(|&i| vals[i] == best)
                        .map(|i| tuple[i])
                        .collect();
                    for w in &winners {
                        out[*w] += prob / winners.len() as f64;
                    }
                } else {
                    out[x.to_index() as usize] += prob;
                }
            }
            // next tuple
            let mut i = 0;
            loop {
                if i == population {
                    return (0..size)
                        .filter(|&s| out[s] > 0.0 || s as u64 == x.to_index())
                        .map(|s| (BitString::from_index(n, s as u64), out[s]))
                        .collect();
                }
                tuple[i] += 1;
                if tuple[i] < size {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn child_distribution_n2() {
        let f = FitnessFunction::onemax(2).unwrap();
        let levels = child_distribution(&bs("00"), &f).unwrap();
        assert_eq!(levels.len(), 3);
        assert_abs_diff_eq!(levels[0].mass, 0.25, epsilon = 1e-15);
        assert_eq!(levels[0].children, vec![(bs("00"), 0.25)]);
        assert_abs_diff_eq!(levels[1].mass, 0.5, epsilon = 1e-15);
        assert_eq!(levels[1].children, vec![(bs("01"), 0.25), (bs("10"), 0.25)]);
        assert_abs_diff_eq!(levels[2].mass, 0.25, epsilon = 1e-15);

        let f1 = FitnessFunction::onemax(1).unwrap();
        let levels = child_distribution(&bs("0"), &f1).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].children, vec![(bs("1"), 1.0)]);
    }

    #[test]
    fn child_law_sums_to_one_and_self_mass() {
        for n in 1..=8 {
            let f = FitnessFunction::binval(n).unwrap();
            let x = BitString::from_index(n, 5 % (1 << n));
            let levels = child_distribution(&x, &f).unwrap();
            let total: f64 = levels.iter().map(|l| l.mass).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            let own: f64 = levels
                .iter()
                .flat_map(|l| l.children.iter())
                .filter(|c| c.0 == x)
                .map(|c| c.1)
                .sum();
            assert_abs_diff_eq!(own, (1.0 - 1.0 / n as f64).powi(n as i32), epsilon = 1e-15);
        }
    }

    #[test]
    fn row_n2_pop2() {
        let f = FitnessFunction::onemax(2).unwrap();
        let row = transition_row(&bs("00"), &f, 2).unwrap();
        assert_abs_diff_eq!(lookup(&row, "11"), 7.0 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lookup(&row, "01"), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(lookup(&row, "10"), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(lookup(&row, "00"), 1.0 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(row.iter().map(|e| e.1).sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn row_pop1_is_single_child_law() {
        let f = FitnessFunction::binval(3).unwrap();
        let x = bs("010");
        let row = transition_row(&x, &f, 1).unwrap();
        let levels = child_distribution(&x, &f).unwrap();
        let own = f.value(&x);
        let mut stay = 0.0;
        for l in &levels {
            for (y, q) in &l.children {
                if l.value > own {
                    assert_abs_diff_eq!(lookup(&row, &y.to_string()), *q, epsilon = 1e-15);
                } else {
                    stay += q;
                }
            }
        }
        assert_abs_diff_eq!(lookup(&row, "010"), stay, epsilon = 1e-15);
    }

    #[test]
    fn optimal_row_is_absorbing() {
        let f = FitnessFunction::onemax(3).unwrap();
        assert_eq!(
            transition_row(&bs("111"), &f, 3).unwrap(),
            vec![(bs("111"), 1.0)]
        );
    }

    #[test]
    fn closed_form_matches_brute_force() {
        let fs = [
            FitnessFunction::onemax(2).unwrap(),
            FitnessFunction::onemax(3).unwrap(),
            FitnessFunction::binval(3).unwrap(),
            FitnessFunction::linear(vec![3, -1, 2]).unwrap(),
            FitnessFunction::nonlinear_example(3).unwrap(),
        ];
        for f in &fs {
            for pop in 1..=3 {
                for s in 0..(1u64 << f.n()) {
                    let x = BitString::from_index(f.n(), s);
                    let got = transition_row(&x, f, pop).unwrap();
                    let want = brute_force_row(&x, f, pop);
                    assert_eq!(got.len(), want.len(), "{} {x} N={pop}", f.name());
                    for (a, b) in got.iter().zip(&want) {
                        assert_eq!(a.0, b.0);
                        assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn model_matches_rows() {
        let f = FitnessFunction::linear(vec![5, 3, 3, 1]).unwrap();
        for pop in [1, 2, 5] {
            let m = TransitionModel::build(&f, pop).unwrap();
            for s in 0..m.num_states() as u32 {
                let x = m.bitstring(s).unwrap();
                let row = transition_row(&x, &f, pop).unwrap();
                let model_row = m.row(s);
                assert_eq!(row.len(), model_row.len());
                for (a, b) in row.iter().zip(&model_row) {
                    assert_eq!(m.state_of(&a.0), Some(b.0));
                    assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn model_invariants() {
        let fs = [
            FitnessFunction::onemax(6).unwrap(),
            FitnessFunction::binval(6).unwrap(),
            FitnessFunction::nonlinear_example(6).unwrap(),
            FitnessFunction::linear(vec![4, -2, 1, 1, 0, 3]).unwrap(),
        ];
        for f in &fs {
            for pop in [1, 3, 8] {
                let m = TransitionModel::build(f, pop).unwrap();
                let vals = f.value_table().unwrap();
                for s in 0..m.num_states() as u32 {
                    let sum: f64 = m.row(s).iter().map(|e| e.1).sum();
                    assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
                    for &(t, _) in m.moves(s) {
                        assert!(vals[t as usize] > vals[s as usize]);
                    }
                    if m.is_optimal(s) {
                        assert_eq!(m.row(s), vec![(s, 1.0)]);
                        assert_eq!(vals[s as usize], f.max_value());
                    }
                }
                let pos: Vec<usize> = {
                    let mut p = vec![0; m.num_states()];
                    for (i, &s) in m.solve_order().iter().enumerate() {
                        p[s as usize] = i;
                    }
                    p
                };
                for s in 0..m.num_states() as u32 {
                    for &(t, _) in m.moves(s) {
                        assert!(pos[t as usize] < pos[s as usize]);
                    }
                }
            }
        }
    }

    #[test]
    fn lumped_n2() {
        let f = FitnessFunction::onemax(2).unwrap();
        let m = TransitionModel::build_lumped(&f, 1).unwrap();
        let get = |s: u32, t: u32| {
            m.row(s)
                .iter()
                .find(|e| e.0 == t)
                .map(|e| e.1)
                .unwrap_or(0.0)
        };
        assert_abs_diff_eq!(get(2, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(get(2, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(get(1, 0), 0.25, epsilon = 1e-15);
        assert!(TransitionModel::build_lumped(&FitnessFunction::binval(3).unwrap(), 1).is_err());
    }

    #[test]
    fn lumped_is_full_summed_over_levels() {
        for n in [3, 5, 7] {
            let f = FitnessFunction::onemax(n).unwrap();
            for pop in [1, 2, 4] {
                let full = TransitionModel::build(&f, pop).unwrap();
                let lumped = TransitionModel::build_lumped(&f, pop).unwrap();
                for s in 0..full.num_states() as u32 {
                    let k = full.level(s);
                    let mut by_level = vec![0.0; n + 1];
                    for (t, p) in full.row(s) {
                        by_level[full.level(t)] += p;
                    }
                    for (j, p) in lumped.row(k as u32) {
                        assert_abs_diff_eq!(by_level[j as usize], p, epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn large_lumped_rows_sum_to_one() {
        let f = FitnessFunction::onemax(2000).unwrap();
        let m = TransitionModel::build_lumped(&f, 16).unwrap();
        assert_eq!(m.num_states(), 2001);
        for k in 0..=2000u32 {
            let sum: f64 = m.row(k).iter().map(|e| e.1).sum();
            assert!((sum - 1.0).abs() <= 1e-12, "level {k}: {sum}");
        }
    }

    #[test]
    fn caps_and_validation() {
        assert!(matches!(
            TransitionModel::build(&FitnessFunction::onemax(13).unwrap(), 1),
            Err(Error::CapExceeded { .. })
        ));
        assert!(TransitionModel::build(&FitnessFunction::onemax(3).unwrap(), 0).is_err());
        assert!(TransitionModel::from_rows(
            vec![1, 0],
            vec![false, true],
            vec![vec![(0, 0.5)], vec![(1, 1.0)]]
        )
        .is_err());
        assert!(TransitionModel::from_rows(
            vec![1, 1],
            vec![false, false],
            vec![vec![(1, 1.0)], vec![(0, 1.0)]]
        )
        .is_err());
    }

    #[test]
    fn csv_export() {
        let f = FitnessFunction::onemax(2).unwrap();
        let m = TransitionModel::build(&f, 1).unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("from_state,to_state,prob\n"));
        assert!(csv.contains("00,11,2.5e-1\n"));
        assert!(csv.contains("11,11,1e0\n"));
        // 01 and 10 only move to 11
        assert_eq!(csv.lines().count(), 1 + 4 + 2 + 2 + 1);
    }

    #[test]
    fn best_of_factor_matches_difference() {
        for &(a, b) in &[(0.9f64, 0.3f64), (1.0, 0.0), (0.5, 0.5), (0.2, 0.0)] {
            for pop in 1..6 {
                let direct = if a != b {
                    (a.powi(pop) - b.powi(pop)) / (a - b)
                } else {
                    pop as f64 * a.powi(pop - 1)
                };
                assert_abs_diff_eq!(best_of_factor(a, b, pop as usize), direct, epsilon = 1e-14);
            }
        }
    }
}
