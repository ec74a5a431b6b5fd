//! Bit strings, level sets `S_0..S_n` and the left/right-heavy split.
//!
//! Positions are numbered `1..=n` in the text format and `0..n` in the API;
//! position 0 is the leftmost character of the literal `"1010"`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `n` for which whole-space enumeration is allowed.
pub const ENUMERATION_CAP: usize = 20;

const WORD: usize = 64;

/// A fixed-length binary vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

/// Number of zero-valued bits; `x` lies in `S_k` with `k = n - ||x||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelIndex(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SideClass {
    /// Non-optimal, strictly more ones in the left half than in the right half.
    LeftHeavy,
    /// Non-optimal and not left-heavy.
    Right,
    /// The all-ones string.
    Optimal,
}

/// Shorter strings first, then lexicographic on the literal.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n.cmp(&other.n).then_with(|| {
            (0..self.n)
                .map(|i| self.get(i))
                .cmp((0..other.n).map(|i| other.get(i)))
        })
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl BitString {
    /// All-zeros string of length `n`. Panics if `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "bit strings have length at least 1");
        BitString {
            n,
            words: vec![0; n.div_ceil(WORD)],
        }
    }

    pub fn ones(n: usize) -> Self {
        let mut x = Self::zeros(n);
        for w in x.words.iter_mut() {
            *w = u64::MAX;
        }
        x.clear_tail();
        x
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidBitString("empty".into()));
        }
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                x.set(i, true);
            }
        }
        Ok(x)
    }

    /// The string whose literal, read as a binary number, equals `index`.
    /// This makes numeric order of indices coincide with lexicographic order
    /// of literals.
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n <= 64, "index form needs n <= 64");
        let mut x = Self::zeros(n);
        for i in 0..n {
            if (index >> (n - 1 - i)) & 1 == 1 {
                x.set(i, true);
            }
        }
        x
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.n <= 64, "index form needs n <= 64");
        (0..self.n).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; bit strings have length at least one.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.n);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    /// Positions holding a one, in increasing order.
    pub fn one_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn ones_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn zeros_count(&self) -> usize {
        self.n - self.ones_count()
    }

    pub fn level_index(&self) -> LevelIndex {
        LevelIndex(self.zeros_count())
    }

    pub fn is_all_ones(&self) -> bool {
        self.ones_count() == self.n
    }

    /// Left half is positions `1..=floor(n/2)` (1-based).
    pub fn left_half_len(&self) -> usize {
        self.n / 2
    }

    pub fn classify_side(&self) -> SideClass {
        if self.is_all_ones() {
            return SideClass::Optimal;
        }
        let half = self.left_half_len();
        let left = (0..half).filter(|&i| self.get(i)).count();
        let right = self.ones_count() - left;
        if left > right {
            SideClass::LeftHeavy
        } else {
            SideClass::Right
        }
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.n, other.n, "hamming distance needs equal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    fn clear_tail(&mut self) {
        let used = self.n % WORD;
        if used != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << used) - 1;
        }
    }
}

pub fn ones_count(x: &BitString) -> usize {
    x.ones_count()
}

pub fn level_index(x: &BitString) -> LevelIndex {
    x.level_index()
}

pub fn classify_side(x: &BitString) -> SideClass {
    x.classify_side()
}

pub fn hamming(x: &BitString, y: &BitString) -> usize {
    x.hamming(y)
}

/// All strings of length `n` with exactly `k` zeros, in lexicographic order
/// of their literals.
pub fn enumerate_level(n: usize, k: LevelIndex) -> Result<Vec<BitString>> {
    Ok(level_indices(n, k)?
        .into_iter()
        .map(|s| BitString::from_index(n, s))
        .collect())
}

/// Index form of [`enumerate_level`], ascending.
pub fn level_indices(n: usize, k: LevelIndex) -> Result<Vec<u64>> {
    check_enumeration_cap(n)?;
    if k.0 > n {
        return Err(Error::InvalidBitString(format!(
            "level {} out of range for n = {n}",
            k.0
        )));
    }
    let ones = n - k.0;
    if ones == 0 {
        return Ok(vec![0]);
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    // Gosper's hack: next larger integer with the same popcount.
    let mut v: u64 = (1u64 << ones) - 1;
    while v < limit {
        out.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    Ok(out)
}

pub fn check_enumeration_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidBitString("length must be at least 1".into()));
    }
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "enumeration",
            n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidBitString(format!(
                    "unexpected character {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitString::from_bits(&bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(ones_count(&bs("111")), 3);
        assert_eq!(ones_count(&bs("00")), 0);
        assert_eq!(ones_count(&bs("1010")), 2);
    }

    #[test]
    fn levels() {
        assert_eq!(level_index(&bs("11")), LevelIndex(0));
        assert_eq!(level_index(&bs("00")), LevelIndex(2));
        assert_eq!(level_index(&bs("100")), LevelIndex(2));
    }

    #[test]
    fn sides() {
        assert_eq!(classify_side(&bs("1100")), SideClass::LeftHeavy);
        assert_eq!(classify_side(&bs("0011")), SideClass::Right);
        assert_eq!(classify_side(&bs("1111")), SideClass::Optimal);
        // odd n: left half is position 1 only
        assert_eq!(classify_side(&bs("100")), SideClass::LeftHeavy);
        assert_eq!(classify_side(&bs("110")), SideClass::Right);
        assert_eq!(classify_side(&bs("0")), SideClass::Right);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            enumerate_level(2, LevelIndex(1)).unwrap(),
            vec![bs("01"), bs("10")]
        );
        assert_eq!(enumerate_level(3, LevelIndex(0)).unwrap(), vec![bs("111")]);
        assert_eq!(enumerate_level(3, LevelIndex(3)).unwrap(), vec![bs("000")]);
        assert!(matches!(
            enumerate_level(21, LevelIndex(1)),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn levels_partition_the_space() {
        for n in 1..=10usize {
            let mut seen = std::collections::HashSet::new();
            for k in 0..=n {
                let level = level_indices(n, LevelIndex(k)).unwrap();
                assert!(level.windows(2).all(|w| w[0] < w[1]));
                for s in level {
                    assert_eq!(BitString::from_index(n, s).level_index(), LevelIndex(k));
                    assert!(seen.insert(s));
                }
            }
            assert_eq!(seen.len(), 1 << n);
        }
    }

    #[test]
    fn sides_partition_and_recount() {
        for n in 1..=10usize {
            let half = n / 2;
            for s in 0..(1u64 << n) {
                let x = BitString::from_index(n, s);
                let class = x.classify_side();
                assert_eq!(class == SideClass::Optimal, x.is_all_ones());
                let left_all_ones = (0..half).all(|i| x.get(i));
                let right_has_zero = (half..n).any(|i| !x.get(i));
                if left_all_ones && right_has_zero {
                    let right_ones = (half..n).filter(|&i| x.get(i)).count();
                    assert_eq!(class == SideClass::LeftHeavy, half > right_ones, "{x}");
                }
            }
        }
    }

    #[test]
    fn wide_strings() {
        let mut x = BitString::zeros(130);
        x.set(0, true);
        x.set(64, true);
        x.set(129, true);
        assert_eq!(x.ones_count(), 3);
        assert_eq!(x.one_positions().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(BitString::ones(130).ones_count(), 130);
        assert_eq!(x.to_string().len(), 130);
    }

    #[test]
    fn json_literal() {
        let x = bs("1010");
        assert_eq!(serde_json::to_string(&x).unwrap(), "\"1010\"");
        let y: BitString = serde_json::from_str("\"0110\"").unwrap();
        assert_eq!(y, bs("0110"));
        assert!("10a".parse::<BitString>().is_err());
        assert!("".parse::<BitString>().is_err());
    }

    proptest! {
        #[test]
        fn hamming_axioms(n in 1usize..40, a in any::<u64>(), b in any::<u64>()) {
            let n = n.min(64);
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let x = BitString::from_index(n, a & mask);
            let y = BitString::from_index(n, b & mask);
            prop_assert_eq!(x.hamming(&x), 0);
            prop_assert_eq!(x.hamming(&y), y.hamming(&x));
            prop_assert!(x.hamming(&y) <= n);
            prop_assert_eq!(x.ones_count() + x.zeros_count(), n);
            prop_assert_eq!(BitString::from_index(n, x.to_index()), x.clone());
            prop_assert_eq!(x.to_string().parse::<BitString>().unwrap(), x);
        }
    }
}
