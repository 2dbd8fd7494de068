//! Optimisation: Adam updates, the epoch loop, early stopping with
//! best-weight restoration, history export and checkpoint files.

mod adam;
mod checkpoint;
mod early_stop;
mod fit;
mod history;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{
    checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint, Checkpoint,
    CheckpointError, FORMAT_VERSION, MAGIC,
};
pub use early_stop::{EarlyStopState, StopDecision};
pub use fit::{batch_sizes, fit, run_epoch, train_loop, EpochMode, EpochStats, FitOutcome};
pub use history::{EpochRecord, TrainHistory};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::DataError;
use crate::nncore::NnError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite gradient in layer `{layer}` (step {step})")]
    NonFiniteGradient { layer: String, step: u64 },
    #[error("non-finite loss at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("gradient layout does not match the parameters")]
    LayoutMismatch,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Quantity watched by early stopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    /// Mean training loss of the epoch (the reference behaviour).
    TrainLoss,
    /// Inference-mode loss on a held-out slice of the training split.
    ValidationLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub monitor: Monitor,
    /// Fraction of the training split held out when monitoring validation loss.
    pub validation_frac: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 6.5e-5,
            epochs: 40,
            batch_size: 32,
            patience: 10,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            monitor: Monitor::TrainLoss,
            validation_frac: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.patience < 1 {
            return bad("patience must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if self.monitor == Monitor::ValidationLoss
            && !(self.validation_frac > 0.0 && self.validation_frac < 1.0)
        {
            return bad("validation_frac must lie strictly between 0 and 1");
        }
        Ok(())
    }
}
