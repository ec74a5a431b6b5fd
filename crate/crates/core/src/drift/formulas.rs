use serde::{Deserialize, Serialize};

use super::distance::e_to_e;
use crate::error::{Error, Result};

/// Asymptotic running-time expressions, evaluated with implied constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundKind {
    /// `n ln n`, any monotonic function.
    MonotoneLower,
    /// `n N ln ln N / ln N`, monotonic functions with `N > e^e`.
    MonotoneLowerLargeN,
    /// `n ln n`, plus `n N ln ln N / ln N` when `N > e^e`.
    #[serde(rename = "ONEMAX_LOWER")]
    OneMaxLower,
    /// Same expression as the lower bound.
    #[serde(rename = "ONEMAX_UPPER")]
    OneMaxUpper,
    /// `n N + n ln n`.
    #[serde(rename = "LINEARLIKE_UPPER")]
    LinearLikeUpper,
    /// `n N`.
    #[serde(rename = "BINVAL_LOWER")]
    BinValLower,
    /// `ln n ln ln n / ln ln ln n`.
    #[serde(rename = "ONEMAX_CUTOFF")]
    OneMaxCutoff,
    /// `ln n`.
    #[serde(rename = "BINVAL_CUTOFF")]
    BinValCutoff,
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(
            s.to_ascii_uppercase().replace('-', "_"),
        ))
        .map_err(|_| Error::InvalidConfig(format!("unknown bound kind {s:?}")))
    }
}

fn large_n_term(n: f64, big_n: f64) -> f64 {
    n * big_n * big_n.ln().ln() / big_n.ln()
}

pub fn bound_formula(kind: BoundKind, n: usize, population: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::DomainError(format!("n = {n}; formulas need n >= 2")));
    }
    if population == 0 {
        return Err(Error::DomainError("N must be at least 1".into()));
    }
    let (nf, big_n) = (n as f64, population as f64);
    let n_ln_n = nf * nf.ln();
    let large = big_n > e_to_e();
    Ok(match kind {
        BoundKind::MonotoneLower => n_ln_n,
        BoundKind::MonotoneLowerLargeN => {
            if !large {
                return Err(Error::DomainError(format!(
                    "N = {population} is not above e^e"
                )));
            }
            large_n_term(nf, big_n)
        }
        BoundKind::OneMaxLower | BoundKind::OneMaxUpper => {
            if large {
                n_ln_n + large_n_term(nf, big_n)
            } else {
                n_ln_n
            }
        }
        BoundKind::LinearLikeUpper => nf * big_n + n_ln_n,
        BoundKind::BinValLower => nf * big_n,
        BoundKind::OneMaxCutoff => {
            if nf <= e_to_e() {
                return Err(Error::DomainError(format!("n = {n} is not above e^e")));
            }
            let (l1, l2) = (nf.ln(), nf.ln().ln());
            l1 * l2 / l2.ln()
        }
        BoundKind::BinValCutoff => nf.ln(),
    })
}
