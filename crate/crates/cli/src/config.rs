//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use mbt_core::priors::{PriorSpec, DEFAULT_RADIUS, DEFAULT_SIGMA};
use mbt_core::{Family, Prior};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_TRIALS: u64 = 1_000_000;
/// Cells with at least this many agents per side run [`DEFAULT_LARGE_N_TRIALS`]
/// unless `--full` is given.
pub const LARGE_N: usize = 10_000;
pub const DEFAULT_LARGE_N_TRIALS: u64 = 100_000;

/// Mean pairs of the experiment grid.
pub const TABLE1_PAIRS: [(f64, f64); 3] = [(0.6, 0.4), (0.55, 0.45), (0.51, 0.49)];
pub const TABLE1_N: [usize; 3] = [5, 100, 10_000];

/// One or several distribution families; `"all"` selects every family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Families {
    One(String),
    Many(Vec<Family>),
}

impl Families {
    pub fn resolve(&self) -> Result<Vec<Family>> {
        match self {
            Families::One(s) if s == "all" => Ok(Family::ALL.to_vec()),
            Families::One(s) => Ok(vec![s.parse().map_err(|e| CliError::Config(format!("{e}")))?]),
            Families::Many(v) if v.is_empty() => Err(CliError::Config("empty distribution list".into())),
            Families::Many(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardnessConfig {
    pub n_list: Vec<u64>,
    /// Trials of the Monte Carlo first-best cross-check.
    pub trials: u64,
    /// Random separable profiles checked against the 1/8 bound per row.
    pub random_profiles: usize,
}

impl Default for HardnessConfig {
    fn default() -> Self {
        Self { n_list: vec![2, 10, 100, 1000, 4000], trials: 20_000, random_profiles: 20 }
    }
}

/// A value prior and a cost prior compared in a scaling probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCase {
    pub label: String,
    pub values: PriorSpec,
    pub costs: PriorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub cases: Vec<ScalingCase>,
}

fn uniform_spec(mu: f64, radius: f64) -> PriorSpec {
    Prior::uniform(mu, radius).expect("valid default prior").to_spec()
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n_list: vec![100, 400, 1600],
            trials: 20_000,
            cases: vec![
                ScalingCase {
                    label: "uniform".into(),
                    values: uniform_spec(0.5, 0.5),
                    costs: uniform_spec(0.5, 0.5),
                },
                ScalingCase {
                    label: "uniform".into(),
                    values: uniform_spec(0.55, 0.4),
                    costs: uniform_spec(0.45, 0.4),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Agents per side of the exhaustive suite.
    pub n: usize,
    /// Grid resolution of the exhaustive suite.
    pub k: usize,
    pub taus: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { n: 2, k: 4, taus: vec![0.25, 0.5, 0.75] }
    }
}

/// The declarative description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub distribution: Families,
    /// Single mean pair; takes precedence over `mu_pairs` when both set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_g: Option<f64>,
    pub mu_pairs: Vec<(f64, f64)>,
    pub sigma: f64,
    pub radius: f64,
    pub n_list: Vec<usize>,
    pub trials: u64,
    /// Trial count of cells with `n >= 10000` unless running in full mode.
    pub large_n_trials: u64,
    pub full: bool,
    pub seed: u64,
    /// Output directory.
    pub outputs: PathBuf,
    pub hardness: HardnessConfig,
    pub scaling: ScalingConfig,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            distribution: Families::One("all".into()),
            mu_f: None,
            mu_g: None,
            mu_pairs: TABLE1_PAIRS.to_vec(),
            sigma: DEFAULT_SIGMA,
            radius: DEFAULT_RADIUS,
            n_list: TABLE1_N.to_vec(),
            trials: DEFAULT_TRIALS,
            large_n_trials: DEFAULT_LARGE_N_TRIALS,
            full: false,
            seed: 0,
            outputs: PathBuf::from("out"),
            hardness: HardnessConfig::default(),
            scaling: ScalingConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// One (family, n, mean pair) entry of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub family: Family,
    pub n: usize,
    pub mu_f: f64,
    pub mu_g: f64,
    pub trials: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.large_n_trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if self.mu_f.is_some() != self.mu_g.is_some() {
            return Err(CliError::Config("mu_f and mu_g must be given together".into()));
        }
        if self.n_list.contains(&0) {
            return Err(CliError::Config("market sizes must be at least 1".into()));
        }
        self.distribution.resolve()?;
        for (mu_f, mu_g) in self.pairs() {
            for fam in self.distribution.resolve()? {
                fam.prior(mu_f, self.sigma, self.radius)?;
                fam.prior(mu_g, self.sigma, self.radius)?;
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        match (self.mu_f, self.mu_g) {
            (Some(f), Some(g)) => vec![(f, g)],
            _ => self.mu_pairs.clone(),
        }
    }

    pub fn trials_for(&self, n: usize) -> u64 {
        if n >= LARGE_N && !self.full {
            self.trials.min(self.large_n_trials)
        } else {
            self.trials
        }
    }

    /// Cross product in (family, n, pair) order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut cells = Vec::new();
        for family in self.distribution.resolve()? {
            for &n in &self.n_list {
                for (mu_f, mu_g) in self.pairs() {
                    cells.push(Cell { family, n, mu_f, mu_g, trials: self.trials_for(n) });
                }
            }
        }
        Ok(cells)
    }

    /// Pretty JSON echo of the effective configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the echo with the output directory left out, hex encoded.
    /// Runs differing only in where they write carry the same hash.
    pub fn hash(&self) -> String {
        let content = Self { outputs: PathBuf::new(), ..self.clone() };
        hex::encode(Sha256::digest(content.echo().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_full_grid() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.cells().unwrap().len(), 36);
        assert_eq!(cfg.trials_for(100), 1_000_000);
        assert_eq!(cfg.trials_for(10_000), 100_000);
        let full = ExperimentConfig { full: true, ..cfg };
        assert_eq!(full.trials_for(10_000), 1_000_000);
    }

    #[test]
    fn single_cell_config() {
        let cfg =
            ExperimentConfig::from_json(r#"{"distribution": "bernoulli", "mu_f": 0.6, "mu_g": 0.4, "n_list": [5]}"#)
                .unwrap();
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!((cells[0].family, cells[0].n, cells[0].mu_f), (Family::Bernoulli, 5, 0.6));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"trials": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"distribution": "cauchy"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"mu_f": 0.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"distribution": "uniform", "mu_pairs": [[0.9, 0.4]]}"#).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { seed: 1, ..a.clone() };
        assert_eq!(a.hash(), ExperimentConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let moved = ExperimentConfig { outputs: "elsewhere".into(), ..a.clone() };
        assert_eq!(a.hash(), moved.hash());
    }
}
