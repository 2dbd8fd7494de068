//! Declarative run configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! dataset = "data/knee.csv"
//! output_dir = "runs/knee"
//! paper_faithful = false
//!
//! [mapping]
//! exercise_col = "exercise"
//! participant_col = "participant"
//! pattern_col = "pattern"
//! label_col = "affectation"
//! feature_cols = ["z_10000", "z_20000"]
//! include_participant_as_feature = true
//!
//! [train]
//! epochs = 40
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::acqsim::SimulationConfig;
use crate::dataio::ColumnMapping;
use crate::nncore::ModelConfig;
use crate::trainer::{Monitor, TrainConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Floating-point width used for training and inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Optional overrides of the reference architecture. Sequence length and
/// class count always come from the data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    pub conv1_filters: Option<usize>,
    pub conv1_kernel: Option<usize>,
    pub conv2_filters: Option<usize>,
    pub conv2_kernel: Option<usize>,
    pub pool_size: Option<usize>,
    pub drop1: Option<f64>,
    pub drop2: Option<f64>,
    pub drop3: Option<f64>,
    pub dense_units: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub patience: Option<usize>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub eps: Option<f64>,
    pub monitor: Option<Monitor>,
    pub validation_frac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Root seed for every random stream.
    pub seed: u64,
    pub dataset: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Fit the scaler on all rows before splitting (reference behaviour,
    /// leaks test statistics) instead of on the training split only.
    pub paper_faithful: bool,
    pub test_frac: f64,
    pub precision: Precision,
    /// Defaults to the simulator's schema.
    pub mapping: Option<ColumnMapping>,
    pub model: ModelOverrides,
    pub train: TrainOverrides,
    pub simulate: SimulationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dataset: None,
            output_dir: PathBuf::from("koa-out"),
            paper_faithful: false,
            test_frac: 0.1,
            precision: Precision::F64,
            mapping: None,
            model: ModelOverrides::default(),
            train: TrainOverrides::default(),
            simulate: SimulationConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config is always representable as TOML")
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        if !(self.test_frac > 0.0 && self.test_frac < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "test_frac {} must lie strictly between 0 and 1",
                self.test_frac
            )));
        }
        if let Some(m) = &self.mapping {
            m.validate().map_err(|e| invalid(&e))?;
        }
        self.train_config().validate().map_err(|e| invalid(&e))?;
        self.simulate.validate().map_err(|e| invalid(&e))
    }

    pub fn column_mapping(&self) -> ColumnMapping {
        self.mapping
            .clone()
            .unwrap_or_else(|| self.simulate.column_mapping())
    }

    /// Reference architecture for `input_len` values and `num_classes` outputs, with overrides applied.
    pub fn model_config(&self, input_len: usize, num_classes: usize) -> ModelConfig {
        let o = &self.model;
        let p = ModelConfig::paper(input_len);
        ModelConfig {
            input_len,
            input_channels: 1,
            conv1_filters: o.conv1_filters.unwrap_or(p.conv1_filters),
            conv1_kernel: o.conv1_kernel.unwrap_or(p.conv1_kernel),
            conv2_filters: o.conv2_filters.unwrap_or(p.conv2_filters),
            conv2_kernel: o.conv2_kernel.unwrap_or(p.conv2_kernel),
            pool_size: o.pool_size.unwrap_or(p.pool_size),
            drop1: o.drop1.unwrap_or(p.drop1),
            drop2: o.drop2.unwrap_or(p.drop2),
            drop3: o.drop3.unwrap_or(p.drop3),
            dense_units: o.dense_units.unwrap_or(p.dense_units),
            num_classes,
        }
    }

    /// Reference optimiser settings with overrides applied; the seed is the run seed.
    pub fn train_config(&self) -> TrainConfig {
        let o = &self.train;
        let d = TrainConfig::default();
        TrainConfig {
            learning_rate: o.learning_rate.unwrap_or(d.learning_rate),
            epochs: o.epochs.unwrap_or(d.epochs),
            batch_size: o.batch_size.unwrap_or(d.batch_size),
            patience: o.patience.unwrap_or(d.patience),
            beta1: o.beta1.unwrap_or(d.beta1),
            beta2: o.beta2.unwrap_or(d.beta2),
            eps: o.eps.unwrap_or(d.eps),
            seed: self.seed,
            monitor: o.monitor.unwrap_or(d.monitor),
            validation_frac: o.validation_frac.unwrap_or(d.validation_frac),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml_str("seeed = 3"),
            Err(ConfigError::Parse(_))
        ));
        assert!(RunConfig::from_toml_str("[train]\nlr = 0.1").is_err());
        assert!(RunConfig::from_toml_str("[simulate.sweep]\nbits = 10").is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::from_toml_str(
            "seed = 11\n[train]\nepochs = 5\nmonitor = \"validation_loss\"\n[model]\ndense_units = 8\n",
        )
        .unwrap();
        let t = cfg.train_config();
        assert_eq!(
            (t.epochs, t.seed, t.monitor),
            (5, 11, Monitor::ValidationLoss)
        );
        assert_eq!(t.learning_rate, 6.5e-5);
        let m = cfg.model_config(13, 4);
        assert_eq!((m.dense_units, m.conv1_filters, m.input_len), (8, 64, 13));
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml_str("test_frac = 1.5"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(RunConfig::from_toml_str("[simulate]\ngrades = 7").is_err());
        assert!(RunConfig::from_toml_str("[train]\nbatch_size = 0").is_err());
    }

    #[test]
    fn toml_round_trip_and_hash() {
        let mut cfg = RunConfig {
            seed: 42,
            dataset: Some("x.csv".into()),
            ..RunConfig::default()
        };
        let back = RunConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 64);
        cfg.seed = 43;
        assert_ne!(back.hash(), cfg.hash());
    }
}
