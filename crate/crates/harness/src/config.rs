//! Experiment configuration, read from TOML.
//!
//! ```toml
//! problem = "forrester"          # forrester | park | fluidized_bed
//! strategy = "if_ucr"            # mf_ucr | if_ucr | if_ucr_bel | single_us
//! cost_ratio = "5:1"             # C_H:C_L
//! iterations = 10                # default: 10 for forrester, 15 otherwise
//! replications = 10
//! n_init_low = 4
//! n_init_high = 2
//! pool_size = 100
//! holdout_size = 100             # default: 100, or 8 for fluidized_bed
//! seed = 0
//! design = "uniform"             # uniform | latin_hypercube
//! # rmse_threshold = 0.1         # optional early stop
//! # data_file = "bed.csv"        # fluidized_bed only; synthetic table when absent
//!
//! [chain]
//! length = 2000
//! burn_in = 0.5
//! step_scale = 0.3
//! adapt_steps = 500
//!
//! [prior]                        # [location, scale] of each log-parameter
//! log_amplitude = [0.0, 1.0]
//! log_inv_length_scale = [0.0, 1.5]
//! log_nugget = [-3.0, 1.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mfgp_core::{ChainConfig, CostModel, LogPrior, PriorSpec, Strategy};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Forrester,
    Park,
    FluidizedBed,
}

impl ProblemKind {
    pub fn default_iterations(self) -> usize {
        match self {
            ProblemKind::Forrester => 10,
            ProblemKind::Park | ProblemKind::FluidizedBed => 15,
        }
    }

    pub fn default_holdout(self) -> usize {
        match self {
            ProblemKind::FluidizedBed => 8,
            _ => 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    #[default]
    Uniform,
    LatinHypercube,
}

/// `C_H:C_L`, written as e.g. `"5:1"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRatio {
    pub high: f64,
    pub low: f64,
}

impl CostRatio {
    pub fn new(high: f64, low: f64) -> Self {
        CostRatio { high, low }
    }

    pub fn cost_model(&self) -> Result<CostModel, HarnessError> {
        Ok(CostModel::new(self.low, self.high)?)
    }
}

impl fmt::Display for CostRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.high, self.low)
    }
}

impl FromStr for CostRatio {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("cost ratio `{s}` is not of the form H:L"));
        let (h, l) = s.split_once(':').ok_or_else(bad)?;
        let high: f64 = h.trim().parse().map_err(|_| bad())?;
        let low: f64 = l.trim().parse().map_err(|_| bad())?;
        Ok(CostRatio { high, low })
    }
}

impl Serialize for CostRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CostRatio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod strategy_name {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Strategy, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Strategy, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSettings {
    pub length: usize,
    pub burn_in: f64,
    pub step_scale: f64,
    pub adapt_steps: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        let c = ChainConfig::default();
        ChainSettings {
            length: c.length,
            burn_in: c.burn_in,
            step_scale: c.step_scale,
            adapt_steps: c.adapt_steps,
        }
    }
}

impl ChainSettings {
    pub fn to_chain_config(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            length: self.length,
            burn_in: self.burn_in,
            step_scale: self.step_scale,
            adapt_steps: self.adapt_steps,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSettings {
    pub log_amplitude: [f64; 2],
    pub log_inv_length_scale: [f64; 2],
    pub log_nugget: [f64; 2],
}

impl Default for PriorSettings {
    fn default() -> Self {
        PriorSettings {
            log_amplitude: [0.0, 1.0],
            log_inv_length_scale: [0.0, 1.5],
            log_nugget: [-3.0, 1.0],
        }
    }
}

impl PriorSettings {
    pub fn to_prior(&self, dim: usize) -> Result<PriorSpec, HarnessError> {
        let p = |v: [f64; 2]| LogPrior::normal(v[0], v[1]);
        Ok(PriorSpec::uniform_dims(
            p(self.log_amplitude)?,
            p(self.log_inv_length_scale)?,
            p(self.log_nugget)?,
            dim,
        ))
    }
}

fn default_replications() -> usize {
    10
}
fn default_n_init_low() -> usize {
    4
}
fn default_n_init_high() -> usize {
    2
}
fn default_pool_size() -> usize {
    100
}
fn default_strategy() -> Strategy {
    Strategy::IfUcr
}
fn default_cost_ratio() -> CostRatio {
    CostRatio::new(5.0, 1.0)
}
fn default_synthetic_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(with = "strategy_name", default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_cost_ratio")]
    pub cost_ratio: CostRatio,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_n_init_low")]
    pub n_init_low: usize,
    #[serde(default = "default_n_init_high")]
    pub n_init_high: usize,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default)]
    pub holdout_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub design: DesignKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    #[serde(default = "default_synthetic_seed")]
    pub synthetic_data_seed: u64,
    #[serde(default)]
    pub chain: ChainSettings,
    #[serde(default)]
    pub prior: PriorSettings,
}

impl ExperimentConfig {
    /// Defaults for everything but the problem.
    pub fn new(problem: ProblemKind) -> Self {
        ExperimentConfig {
            problem,
            strategy: default_strategy(),
            cost_ratio: default_cost_ratio(),
            iterations: None,
            replications: default_replications(),
            n_init_low: default_n_init_low(),
            n_init_high: default_n_init_high(),
            pool_size: default_pool_size(),
            holdout_size: None,
            seed: 0,
            design: DesignKind::Uniform,
            rmse_threshold: None,
            data_file: None,
            synthetic_data_seed: default_synthetic_seed(),
            chain: ChainSettings::default(),
            prior: PriorSettings::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn iterations(&self) -> usize {
        self.iterations.unwrap_or(self.problem.default_iterations())
    }

    pub fn holdout_size(&self) -> usize {
        self.holdout_size.unwrap_or(self.problem.default_holdout())
    }

    /// Fills every defaulted optional so the echo in `run.json` is complete.
    pub fn resolved(&self) -> Self {
        ExperimentConfig {
            iterations: Some(self.iterations()),
            holdout_size: Some(self.holdout_size()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.iterations() < 1 {
            return fail("iterations must be at least 1");
        }
        if self.replications < 1 {
            return fail("replications must be at least 1");
        }
        if self.n_init_low < 2 {
            return fail("n_init_low must be at least 2");
        }
        if self.n_init_high < 1 {
            return fail("n_init_high must be at least 1");
        }
        if self.holdout_size() < 1 {
            return fail("holdout_size must be at least 1");
        }
        if self.problem != ProblemKind::FluidizedBed && self.pool_size < self.iterations() {
            return fail("pool_size must be at least the number of iterations");
        }
        if let Some(t) = self.rmse_threshold {
            if t.is_nan() || t < 0.0 {
                return fail("rmse_threshold must be non-negative");
            }
        }
        self.cost_ratio.cost_model()?;
        self.chain.to_chain_config(0).validate()?;
        self.prior.to_prior(1)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full() {
        let c = ExperimentConfig::from_toml("problem = \"park\"").unwrap();
        assert_eq!(c.iterations(), 15);
        assert_eq!(c.n_init_low, 4);
        let c = ExperimentConfig::from_toml(
            r#"
            problem = "forrester"
            strategy = "if-ucr-bel"
            cost_ratio = "10:1"
            iterations = 3
            replications = 2
            seed = 9
            design = "latin_hypercube"
            [chain]
            length = 300
            [prior]
            log_nugget = [-4.0, 0.5]
            "#,
        )
        .unwrap();
        assert_eq!(c.strategy, Strategy::IfUcrBel);
        assert_eq!(c.cost_ratio, CostRatio::new(10.0, 1.0));
        assert_eq!(c.chain.length, 300);
        assert_eq!(c.chain.burn_in, 0.5);
        assert_eq!(c.prior.log_nugget, [-4.0, 0.5]);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let c = ExperimentConfig::from_toml("problem = \"forrester\"\niterations = 0").unwrap();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("problem = \"forrester\"\ncost_ratio = \"5\"").is_err());
        assert!(ExperimentConfig::from_toml("problem = \"forrester\"\nbogus = 1").is_err());
        let c = ExperimentConfig::from_toml("problem = \"forrester\"\ncost_ratio = \"1:2\"").unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_toml("problem = \"forrester\"\npool_size = 5").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::new(ProblemKind::FluidizedBed).resolved();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
        assert_eq!(c.holdout_size, Some(8));
    }
}
