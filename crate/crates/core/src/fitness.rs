//! Pseudo-Boolean fitness functions and exhaustive property checkers.
//!
//! Fitness values compare exactly. OneMax, BinVal and integer-weight linear
//! functions use `i128` arithmetic (BinVal is therefore capped at
//! [`BINVAL_CAP`] bits). The nonlinear example
//! `exp(sum_{i<=n/2} 2^(n-i) s_i) + ln(sum_{i>n/2} s_i + 1) + sum_i prod_{j<=i} s_j`
//! is stored as its integer exponent plus a small floating-point tail, which
//! orders exactly because consecutive exponents differ by at least
//! `2^ceil(n/2)` while the tail never exceeds `ln(n/2 + 1) + n`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{check_enumeration_cap, BitString};
use crate::error::{Error, Result};

/// Widest BinVal / nonlinear example representable with `i128` weights.
pub const BINVAL_CAP: usize = 126;

/// Largest `n` accepted by the exhaustive checkers.
pub const CHECKER_CAP: usize = 12;

/// An exactly comparable fitness value.
#[derive(Clone, Copy, Debug)]
pub enum FitnessValue {
    Int(i128),
    Real(f64),
    /// `exp(exponent) + tail`, ordered lexicographically.
    ExpTail {
        exponent: i128,
        tail: f64,
    },
}

impl FitnessValue {
    pub fn to_f64(self) -> f64 {
        match self {
            FitnessValue::Int(v) => v as f64,
            FitnessValue::Real(v) => v,
            FitnessValue::ExpTail { exponent, tail } => (exponent as f64).exp() + tail,
        }
    }
}

impl Ord for FitnessValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use FitnessValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (
                ExpTail {
                    exponent: e1,
                    tail: t1,
                },
                ExpTail {
                    exponent: e2,
                    tail: t2,
                },
            ) => e1.cmp(e2).then_with(|| t1.total_cmp(t2)),
            (a, b) => a.to_f64().total_cmp(&b.to_f64()),
        }
    }
}

impl PartialOrd for FitnessValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for FitnessValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FitnessValue {}

impl fmt::Display for FitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessValue::Int(v) => write!(f, "{v}"),
            FitnessValue::Real(v) => write!(f, "{v}"),
            FitnessValue::ExpTail { exponent, tail } => write!(f, "exp({exponent})+{tail}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Int(Vec<i128>),
    Real(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitnessKind {
    OneMax,
    BinVal,
    Linear(Weights),
    NonlinearExample,
    /// Values indexed by [`BitString::to_index`].
    Table(Vec<FitnessValue>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitnessFunction {
    n: usize,
    kind: FitnessKind,
    max_value: FitnessValue,
}

impl FitnessFunction {
    fn with_kind(n: usize, kind: FitnessKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidFitness("n must be at least 1".into()));
        }
        let mut f = FitnessFunction {
            n,
            kind,
            max_value: FitnessValue::Int(0),
        };
        f.max_value = f.compute_max();
        Ok(f)
    }

    pub fn onemax(n: usize) -> Result<Self> {
        Self::with_kind(n, FitnessKind::OneMax)
    }

    pub fn binval(n: usize) -> Result<Self> {
        if n > BINVAL_CAP {
            return Err(Error::CapExceeded {
                what: "BinVal",
                n,
                cap: BINVAL_CAP,
            });
        }
        Self::with_kind(n, FitnessKind::BinVal)
    }

    /// Arbitrary integer weights (no ordering or sign requirement).
    pub fn linear(weights: Vec<i128>) -> Result<Self> {
        Self::with_kind(weights.len(), FitnessKind::Linear(Weights::Int(weights)))
    }

    pub fn linear_real(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidFitness("weights must be finite".into()));
        }
        Self::with_kind(weights.len(), FitnessKind::Linear(Weights::Real(weights)))
    }

    /// Linear function with `w_1 >= w_2 >= ... >= w_n > 0`.
    pub fn linear_sorted(weights: Vec<i128>) -> Result<Self> {
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidFitness(
                "sorted linear needs non-increasing weights".into(),
            ));
        }
        if weights.last().is_some_and(|&w| w <= 0) {
            return Err(Error::InvalidFitness(
                "sorted linear needs positive weights".into(),
            ));
        }
        Self::linear(weights)
    }

    /// Sorted linear function with integer weights drawn uniformly from
    /// `1..=max_weight`.
    pub fn random_sorted_linear(n: usize, max_weight: i128, seed: u64) -> Result<Self> {
        if max_weight < 1 {
            return Err(Error::InvalidFitness("max_weight must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w: Vec<i128> = (0..n).map(|_| rng.random_range(1..=max_weight)).collect();
        w.sort_unstable_by(|a, b| b.cmp(a));
        Self::linear_sorted(w)
    }

    pub fn nonlinear_example(n: usize) -> Result<Self> {
        if n > BINVAL_CAP {
            return Err(Error::CapExceeded {
                what: "nonlinear example",
                n,
                cap: BINVAL_CAP,
            });
        }
        Self::with_kind(n, FitnessKind::NonlinearExample)
    }

    /// Explicit table; every one of the `2^n` strings must be present.
    pub fn table(n: usize, entries: BTreeMap<BitString, FitnessValue>) -> Result<Self> {
        check_enumeration_cap(n)?;
        let mut values = Vec::with_capacity(1 << n);
        for s in 0..(1u64 << n) {
            let x = BitString::from_index(n, s);
            match entries.get(&x) {
                Some(v) => values.push(*v),
                None => return Err(Error::InvalidFitness(format!("table has no value for {x}"))),
            }
        }
        if entries.len() != values.len() {
            return Err(Error::InvalidFitness(format!(
                "table entries must all have length {n}"
            )));
        }
        Self::with_kind(n, FitnessKind::Table(values))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &FitnessKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FitnessKind::OneMax => "onemax",
            FitnessKind::BinVal => "binval",
            FitnessKind::Linear(_) => "linear",
            FitnessKind::NonlinearExample => "nonlinear",
            FitnessKind::Table(_) => "table",
        }
    }

    /// Invariant under permutations of bit positions.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, FitnessKind::OneMax)
    }

    pub fn max_value(&self) -> FitnessValue {
        self.max_value
    }

    pub fn evaluate(&self, x: &BitString) -> Result<FitnessValue> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.value(x))
    }

    pub fn is_optimal(&self, x: &BitString) -> bool {
        self.value(x) == self.max_value
    }

    /// Unchecked evaluation; `x.len()` must equal `self.n()`.
    pub(crate) fn value(&self, x: &BitString) -> FitnessValue {
        debug_assert_eq!(x.len(), self.n);
        match &self.kind {
            FitnessKind::OneMax => FitnessValue::Int(x.ones_count() as i128),
            FitnessKind::BinVal => {
                FitnessValue::Int(x.one_positions().map(|i| 1i128 << (self.n - 1 - i)).sum())
            }
            FitnessKind::Linear(Weights::Int(w)) => {
                FitnessValue::Int(x.one_positions().map(|i| w[i]).sum())
            }
            FitnessKind::Linear(Weights::Real(w)) => {
                FitnessValue::Real(x.one_positions().map(|i| w[i]).sum())
            }
            FitnessKind::NonlinearExample => {
                let half = self.n / 2;
                let exponent = x
                    .one_positions()
                    .take_while(|&i| i < half)
                    .map(|i| 1i128 << (self.n - 1 - i))
                    .sum();
                let right_ones = x.one_positions().filter(|&i| i >= half).count();
                let leading_ones = x.iter().take_while(|&b| b).count();
                let tail = ((right_ones + 1) as f64).ln() + leading_ones as f64;
                FitnessValue::ExpTail { exponent, tail }
            }
            FitnessKind::Table(values) => values[x.to_index() as usize],
        }
    }

    fn compute_max(&self) -> FitnessValue {
        match &self.kind {
            FitnessKind::Linear(Weights::Int(w)) => {
                FitnessValue::Int(w.iter().map(|&v| v.max(0)).sum())
            }
            FitnessKind::Linear(Weights::Real(w)) => {
                FitnessValue::Real(w.iter().map(|&v| v.max(0.0)).sum())
            }
            FitnessKind::Table(values) => *values.iter().max().expect("non-empty table"),
            _ => self.value(&BitString::ones(self.n)),
        }
    }

    /// Values of every string, indexed by [`BitString::to_index`].
    pub fn value_table(&self) -> Result<Vec<FitnessValue>> {
        check_enumeration_cap(self.n)?;
        Ok((0..(1u64 << self.n))
            .map(|s| self.value(&BitString::from_index(self.n, s)))
            .collect())
    }

    pub fn to_spec(&self) -> FitnessSpec {
        match &self.kind {
            FitnessKind::OneMax => FitnessSpec::Onemax { n: Some(self.n) },
            FitnessKind::BinVal => FitnessSpec::Binval { n: Some(self.n) },
            FitnessKind::NonlinearExample => FitnessSpec::Nonlinear { n: Some(self.n) },
            FitnessKind::Linear(w) => FitnessSpec::Linear {
                n: Some(self.n),
                weights: match w {
                    Weights::Int(w) => w
                        .iter()
                        .map(|&v| serde_json::Number::from(v as i64))
                        .collect(),
                    Weights::Real(w) => w
                        .iter()
                        .filter_map(|&v| serde_json::Number::from_f64(v))
                        .collect(),
                },
            },
            FitnessKind::Table(values) => FitnessSpec::Table {
                n: Some(self.n),
                values: values
                    .iter()
                    .enumerate()
                    .map(|(s, v)| {
                        let num = match v {
                            FitnessValue::Int(i) => serde_json::Number::from(*i as i64),
                            other => serde_json::Number::from_f64(other.to_f64())
                                .unwrap_or_else(|| serde_json::Number::from(0)),
                        };
                        (BitString::from_index(self.n, s as u64).to_string(), num)
                    })
                    .collect(),
            },
        }
    }
}

pub fn evaluate(f: &FitnessFunction, x: &BitString) -> Result<FitnessValue> {
    f.evaluate(x)
}

/// JSON description of a fitness function, tagged by `kind`.
///
/// `n` may be omitted when the caller supplies it (e.g. from a grid); for
/// `linear` it defaults to the number of weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitnessSpec {
    Onemax {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Binval {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Linear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        weights: Vec<serde_json::Number>,
    },
    /// Sorted linear function with seeded random integer weights.
    RandomLinear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_max_weight")]
        max_weight: i64,
    },
    Nonlinear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        values: BTreeMap<String, serde_json::Number>,
    },
}

fn default_max_weight() -> i64 {
    100
}

impl FitnessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            FitnessSpec::Onemax { .. } => "onemax",
            FitnessSpec::Binval { .. } => "binval",
            FitnessSpec::Linear { .. } => "linear",
            FitnessSpec::RandomLinear { .. } => "random_linear",
            FitnessSpec::Nonlinear { .. } => "nonlinear",
            FitnessSpec::Table { .. } => "table",
        }
    }

    pub fn declared_n(&self) -> Option<usize> {
        match self {
            FitnessSpec::Onemax { n }
            | FitnessSpec::Binval { n }
            | FitnessSpec::RandomLinear { n, .. }
            | FitnessSpec::Nonlinear { n }
            | FitnessSpec::Table { n, .. } => *n,
            FitnessSpec::Linear { n, weights } => n.or(Some(weights.len())),
        }
    }

    /// Whether [`FitnessSpec::build`] accepts any `n` (fixed-shape kinds don't).
    pub fn is_scalable(&self) -> bool {
        !matches!(self, FitnessSpec::Linear { .. } | FitnessSpec::Table { .. })
    }

    /// Builds the function; `n` overrides the declared length when given.
    pub fn build(&self, n: Option<usize>) -> Result<FitnessFunction> {
        let n = n
            .or_else(|| self.declared_n())
            .ok_or_else(|| Error::InvalidFitness(format!("{}: n is required", self.name())))?;
        match self {
            FitnessSpec::Onemax { .. } => FitnessFunction::onemax(n),
            FitnessSpec::Binval { .. } => FitnessFunction::binval(n),
            FitnessSpec::Nonlinear { .. } => FitnessFunction::nonlinear_example(n),
            FitnessSpec::RandomLinear {
                seed, max_weight, ..
            } => FitnessFunction::random_sorted_linear(n, *max_weight as i128, *seed),
            FitnessSpec::Linear { weights, .. } => {
                if weights.len() != n {
                    return Err(Error::InvalidFitness(format!(
                        "linear: {} weights given for n = {n}",
                        weights.len()
                    )));
                }
                if weights.iter().all(|w| w.as_i64().is_some()) {
                    FitnessFunction::linear(
                        weights
                            .iter()
                            .map(|w| w.as_i64().unwrap() as i128)
                            .collect(),
                    )
                } else {
                    FitnessFunction::linear_real(
                        weights
                            .iter()
                            .map(|w| w.as_f64().unwrap_or(f64::NAN))
                            .collect(),
                    )
                }
            }
            FitnessSpec::Table { values, .. } => {
                let integral = values.values().all(|v| v.as_i64().is_some());
                let mut entries = BTreeMap::new();
                for (literal, v) in values {
                    let x: BitString = literal.parse()?;
                    let value = if integral {
                        FitnessValue::Int(v.as_i64().unwrap() as i128)
                    } else {
                        FitnessValue::Real(v.as_f64().unwrap_or(f64::NAN))
                    };
                    entries.insert(x, value);
                }
                FitnessFunction::table(n, entries)
            }
        }
    }
}

/// Which property failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Monotonic,
    /// `f(A0B) < f(A1B)`.
    Condition1,
    /// `f(A0B1C) <= f(A1B0C)`.
    Condition2,
    /// `f(D0E1F) < f(A0B1C)` implies `f(D1E0F) < f(A1B0C)`.
    Condition3,
}

impl Condition {
    pub fn number(self) -> u8 {
        match self {
            Condition::Monotonic => 0,
            Condition::Condition1 => 1,
            Condition::Condition2 => 2,
            Condition::Condition3 => 3,
        }
    }
}

/// Outcome of an exhaustive property check.
///
/// Witness layouts: monotonic and condition 1 give `[dominating, dominated]`
/// with `f(dominating) <= f(dominated)`; condition 2 gives `[A0B1C, A1B0C]`
/// with the first strictly fitter; condition 3 gives
/// `[D0E1F, D1E0F, A0B1C, A1B0C]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub holds: bool,
    pub condition: Option<Condition>,
    pub witness: Vec<BitString>,
}

impl PropertyReport {
    fn pass() -> Self {
        PropertyReport {
            holds: true,
            condition: None,
            witness: Vec::new(),
        }
    }

    fn fail(condition: Condition, witness: Vec<BitString>) -> Self {
        PropertyReport {
            holds: false,
            condition: Some(condition),
            witness,
        }
    }

    /// Re-evaluates the witness against `f`; true iff it is a genuine violation.
    pub fn witness_reproduces(&self, f: &FitnessFunction) -> bool {
        let Some(cond) = self.condition else {
            return false;
        };
        let v: Vec<FitnessValue> = match self.witness.iter().map(|x| f.evaluate(x)).collect() {
            Ok(v) => v,
            Err(_) => return false,
        };
        let w = &self.witness;
        match cond {
            Condition::Monotonic | Condition::Condition1 => {
                v.len() == 2 && dominates(&w[0], &w[1]) && v[0] <= v[1]
            }
            Condition::Condition2 => v.len() == 2 && is_left_shift(&w[0], &w[1]) && v[0] > v[1],
            Condition::Condition3 => {
                v.len() == 4
                    && is_left_shift(&w[0], &w[1])
                    && is_left_shift(&w[2], &w[3])
                    && shift_positions(&w[0], &w[1]) == shift_positions(&w[2], &w[3])
                    && v[0] < v[2]
                    && v[1] >= v[3]
            }
        }
    }
}

fn dominates(x: &BitString, y: &BitString) -> bool {
    x.len() == y.len() && x != y && (0..x.len()).all(|i| x.get(i) >= y.get(i))
}

/// `(p, q)` such that `from = A0B1C` and `to = A1B0C` with the swapped
/// bits at positions `p < q`.
fn shift_positions(from: &BitString, to: &BitString) -> Option<(usize, usize)> {
    if from.len() != to.len() || from.hamming(to) != 2 {
        return None;
    }
    let diff: Vec<usize> = (0..from.len())
        .filter(|&i| from.get(i) != to.get(i))
        .collect();
    let (p, q) = (diff[0], diff[1]);
    (!from.get(p) && from.get(q)).then_some((p, q))
}

fn is_left_shift(from: &BitString, to: &BitString) -> bool {
    shift_positions(from, to).is_some()
}

fn check_cap(f: &FitnessFunction) -> Result<Vec<FitnessValue>> {
    if f.n > CHECKER_CAP {
        return Err(Error::CapExceeded {
            what: "exhaustive checker",
            n: f.n,
            cap: CHECKER_CAP,
        });
    }
    f.value_table()
}

/// Scans `A0B -> A1B` for a non-increase; returns `(A1B, A0B)` indices.
fn first_non_increase(n: usize, values: &[FitnessValue]) -> Option<(u64, u64)> {
    for s in 0..(1u64 << n) {
        for bit in 0..n {
            let mask = 1u64 << bit;
            if s & mask == 0 {
                let t = s | mask;
                if values[t as usize] <= values[s as usize] {
                    return Some((t, s));
                }
            }
        }
    }
    None
}

pub fn check_monotonic(f: &FitnessFunction) -> Result<PropertyReport> {
    let values = check_cap(f)?;
    // Strict increase along every single-bit 0->1 step is equivalent to strict
    // increase along every domination chain.
    Ok(match first_non_increase(f.n, &values) {
        Some((t, s)) => PropertyReport::fail(
            Condition::Monotonic,
            vec![BitString::from_index(f.n, t), BitString::from_index(f.n, s)],
        ),
        None => PropertyReport::pass(),
    })
}

/// Strings `A0B1C` for the position pair `(p, q)`, `p < q` (0-based from the
/// left), as `(from, to)` index pairs.
fn shift_moves(n: usize, p: usize, q: usize) -> impl Iterator<Item = (u64, u64)> {
    let mp = 1u64 << (n - 1 - p);
    let mq = 1u64 << (n - 1 - q);
    (0..(1u64 << n))
        .filter(move |s| s & mp == 0 && s & mq != 0)
        .map(move |s| (s, s ^ mp ^ mq))
}

pub fn check_linear_like(f: &FitnessFunction) -> Result<PropertyReport> {
    let n = f.n;
    let values = check_cap(f)?;
    let x = |s: u64| BitString::from_index(n, s);

    if let Some((t, s)) = first_non_increase(n, &values) {
        return Ok(PropertyReport::fail(
            Condition::Condition1,
            vec![x(t), x(s)],
        ));
    }

    for p in 0..n {
        for q in (p + 1)..n {
            for (s, t) in shift_moves(n, p, q) {
                if values[s as usize] > values[t as usize] {
                    return Ok(PropertyReport::fail(
                        Condition::Condition2,
                        vec![x(s), x(t)],
                    ));
                }
            }
        }
    }

    // For a fixed position pair the shift must be order-preserving: sort the
    // moves by f(before) and require every group's f(after) to beat the best
    // f(after) among strictly smaller f(before).
    for p in 0..n {
        for q in (p + 1)..n {
            let mut moves: Vec<(u64, u64)> = shift_moves(n, p, q).collect();
            moves.sort_by(|a, b| values[a.0 as usize].cmp(&values[b.0 as usize]));
            let mut best_prev: Option<(u64, u64)> = None;
            let mut i = 0;
            while i < moves.len() {
                let pre = values[moves[i].0 as usize];
                let mut j = i;
                while j < moves.len() && values[moves[j].0 as usize] == pre {
                    j += 1;
                }
                if let Some((ys, yt)) = best_prev {
                    for &(xs, xt) in &moves[i..j] {
                        if values[yt as usize] >= values[xt as usize] {
                            return Ok(PropertyReport::fail(
                                Condition::Condition3,
                                vec![x(ys), x(yt), x(xs), x(xt)],
                            ));
                        }
                    }
                }
                for &m in &moves[i..j] {
                    if best_prev.is_none_or(|(_, bt)| values[m.1 as usize] > values[bt as usize]) {
                        best_prev = Some(m);
                    }
                }
                i = j;
            }
        }
    }
    Ok(PropertyReport::pass())
}
