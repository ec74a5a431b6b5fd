use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{FitnessFunction, FitnessKind, FitnessSpec};
use crate::oracle::{TransitionModel, FULL_MODEL_CAP, LUMPED_MODEL_CAP};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Simulate,
    Oracle,
    Both,
}

impl Mode {
    pub fn simulates(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Both)
    }

    pub fn uses_oracle(self) -> bool {
        matches!(self, Mode::Oracle | Mode::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Oracle => "oracle",
            Mode::Both => "both",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "oracle" => Ok(Mode::Oracle),
            "both" => Ok(Mode::Both),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

fn default_replicates() -> usize {
    1000
}

/// A scaling or cut-off sweep, usually read from JSON:
///
/// ```json
/// {"fitness": {"kind": "onemax"}, "n": [8, 16], "population": [1, 4],
///  "replicates": 1000, "seed": 7, "mode": "both"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fitness: FitnessSpec,
    #[serde(rename = "n")]
    pub n_grid: Vec<usize>,
    #[serde(rename = "population", alias = "N")]
    pub population_grid: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Per-run generation cap; defaults to `default_max_generations(n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<u64>,
    /// Slack constant of the cut-off criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_c: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(fitness: FitnessSpec, n_grid: Vec<usize>, population_grid: Vec<usize>) -> Self {
        ExperimentConfig {
            fitness,
            n_grid,
            population_grid,
            replicates: default_replicates(),
            seed: 0,
            mode: Mode::Simulate,
            output: None,
            max_generations: None,
            cutoff_c: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.population_grid.is_empty() {
            return Err(Error::InvalidConfig(
                "n and population grids must be non-empty".into(),
            ));
        }
        if self.population_grid.contains(&0) {
            return Err(Error::InvalidConfig(
                "population sizes must be at least 1".into(),
            ));
        }
        if self.mode.simulates() && self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.max_generations == Some(0) {
            return Err(Error::InvalidConfig(
                "max_generations must be at least 1".into(),
            ));
        }
        if let Some(c) = self.cutoff_c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "cutoff_c = {c} must be positive"
                )));
            }
        }
        for &n in &self.n_grid {
            let f = self.build_fitness(n)?;
            if self.mode.uses_oracle() {
                check_oracle_cap(&f)?;
            }
        }
        Ok(())
    }

    pub fn build_fitness(&self, n: usize) -> Result<FitnessFunction> {
        self.fitness
            .build(Some(n))
            .map_err(|e| Error::InvalidConfig(format!("n = {n}: {e}")))
    }
}

fn check_oracle_cap(f: &FitnessFunction) -> Result<()> {
    let (cap, what) = match f.kind() {
        FitnessKind::OneMax => (LUMPED_MODEL_CAP, "lumped oracle"),
        _ => (FULL_MODEL_CAP, "oracle"),
    };
    if f.n() > cap {
        return Err(Error::InvalidConfig(format!(
            "{what} supports n <= {cap}, got n = {}",
            f.n()
        )));
    }
    Ok(())
}

/// The full model when it fits, the lumped chain for larger OneMax instances.
pub fn model_for(f: &FitnessFunction, population: usize) -> Result<TransitionModel> {
    match f.kind() {
        FitnessKind::OneMax if f.n() > FULL_MODEL_CAP => {
            TransitionModel::build_lumped(f, population)
        }
        _ => TransitionModel::build(f, population),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_json(
            r#"{"fitness": {"kind": "onemax"}, "n": [4, 8], "N": [1, 2], "replicates": 10, "seed": 3, "mode": "both"}"#,
        )
        .unwrap();
        assert_eq!(cfg.population_grid, vec![1, 2]);
        assert_eq!(cfg.mode, Mode::Both);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"fitness": {"kind": "onemax"}, "n": [], "population": [1]}"#,
            r#"{"fitness": {"kind": "onemax"}, "n": [4], "population": [0]}"#,
            r#"{"fitness": {"kind": "binval"}, "n": [13], "population": [1], "mode": "oracle"}"#,
            r#"{"fitness": {"kind": "linear", "weights": [1, 2]}, "n": [3], "population": [1]}"#,
            r#"{"fitness": {"kind": "onemax"}, "n": [4], "population": [1], "bogus": 1}"#,
            r#"{"fitness": {"kind": "onemax"}, "n": [4], "population": [1], "replicates": 0}"#,
            r#"not json"#,
        ] {
            assert!(
                matches!(
                    ExperimentConfig::from_json(text),
                    Err(Error::InvalidConfig(_))
                ),
                "{text}"
            );
        }
        // OneMax goes through the lumped chain, so large n is fine
        ExperimentConfig::from_json(
            r#"{"fitness": {"kind": "onemax"}, "n": [500], "population": [1], "mode": "oracle"}"#,
        )
        .unwrap();
    }

    #[test]
    fn missing_file_is_a_config_error() {
        assert!(matches!(
            ExperimentConfig::from_file(Path::new("/nonexistent/driftlab.json")),
            Err(Error::InvalidConfig(_))
        ));
    }
}
