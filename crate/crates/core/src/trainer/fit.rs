use rand::seq::SliceRandom;

use super::{
    AdamState, EarlyStopState, EpochRecord, Monitor, StopDecision, TrainConfig, TrainError,
    TrainHistory,
};
use crate::dataio::{stratified_split, EncodedDataset};
use crate::nncore::{
    init_params, model_backward, model_forward, Mode, ModelConfig, ParamStore, Tensor,
};
use crate::rng::{SeedStreams, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochMode {
    /// Shuffled mini-batches with dropout and an Adam step per batch.
    Train,
    /// Inference-mode pass in row order; parameters untouched.
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// Sample-weighted mean cross-entropy.
    pub loss: f64,
    pub accuracy: f64,
}

/// Sizes of the mini-batches covering `n` rows; the last one may be partial.
pub fn batch_sizes(n: usize, batch: usize) -> Vec<usize> {
    (0..n).step_by(batch).map(|s| batch.min(n - s)).collect()
}

fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn gather<T: Scalar>(
    cfg: &ModelConfig,
    data: &EncodedDataset<T>,
    rows: &[usize],
) -> Result<(Tensor<T>, Tensor<T>), TrainError> {
    let sub = data.subset(rows);
    let x = Tensor::new(
        vec![rows.len(), cfg.input_len, cfg.input_channels],
        sub.features.data,
    )?;
    let y = Tensor::new(vec![rows.len(), sub.one_hot.cols], sub.one_hot.data)?;
    Ok((x, y))
}

/// One pass over `data`. `epoch` is 1-based and selects the shuffle and dropout streams.
pub fn run_epoch<T: Scalar>(
    cfg: &ModelConfig,
    params: &mut ParamStore<T>,
    adam: &mut AdamState<T>,
    data: &EncodedDataset<T>,
    tcfg: &TrainConfig,
    epoch: usize,
    mode: EpochMode,
) -> Result<EpochStats, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let streams = SeedStreams::new(tcfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    if mode == EpochMode::Train {
        order.shuffle(&mut streams.rng(Stream::Shuffle, epoch as u64));
    }
    let mut dropout_rng = streams.rng(Stream::Dropout, epoch as u64);
    let nn_mode = match mode {
        EpochMode::Train => Mode::Train,
        EpochMode::Eval => Mode::Infer,
    };
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for rows in order.chunks(tcfg.batch_size) {
        let (x, y) = gather(cfg, data, rows)?;
        let (probs, cache) = model_forward(cfg, params, &x, nn_mode, &mut dropout_rng)?;
        let k = probs.dim(1);
        for (p, &label) in probs
            .data()
            .chunks(k)
            .zip(rows.iter().map(|&r| &data.labels[r]))
        {
            correct += usize::from(argmax(p) == label);
        }
        let loss = match mode {
            EpochMode::Train => {
                let (loss, grads) = model_backward(params, &cache, &y)?;
                super::adam_step(params, &grads, adam, tcfg)?;
                loss
            }
            EpochMode::Eval => crate::nncore::cross_entropy(&probs, &y)?.0,
        };
        loss_sum += loss.as_f64() * rows.len() as f64;
    }
    let n = data.len() as f64;
    Ok(EpochStats {
        loss: loss_sum / n,
        accuracy: correct as f64 / n,
    })
}

/// Result of a training run, holding the restored best-epoch weights.
#[derive(Debug, Clone)]
pub struct FitOutcome<T> {
    pub params: ParamStore<T>,
    pub best_epoch: usize,
    pub best_loss: f64,
    /// Last epoch that ran.
    pub stopped_epoch: usize,
    pub early_stopped: bool,
    pub history: TrainHistory,
}

/// Epoch loop with early stopping. `epoch_fn` runs one epoch (1-based) on the
/// weights and reports its metrics; the loop decides when to stop and
/// restores the best snapshot.
pub fn train_loop<T, F>(
    mut params: ParamStore<T>,
    tcfg: &TrainConfig,
    mut epoch_fn: F,
) -> Result<FitOutcome<T>, TrainError>
where
    T: Scalar,
    F: FnMut(usize, &mut ParamStore<T>) -> Result<EpochRecord, TrainError>,
{
    tcfg.validate()?;
    let mut es = EarlyStopState::new(tcfg.patience);
    let mut history = TrainHistory::default();
    let mut early_stopped = false;
    for epoch in 1..=tcfg.epochs {
        let rec = epoch_fn(epoch, &mut params)?;
        let monitored = match tcfg.monitor {
            Monitor::TrainLoss => rec.loss,
            Monitor::ValidationLoss => rec.val_loss.unwrap_or(rec.loss),
        };
        if !monitored.is_finite() {
            return Err(TrainError::NonFiniteLoss(epoch));
        }
        history.push(rec);
        if es.observe(epoch, monitored, &params) == StopDecision::Stop {
            early_stopped = true;
            break;
        }
    }
    let stopped_epoch = history.len();
    Ok(FitOutcome {
        params: es.best_params.unwrap_or(params),
        best_epoch: es.best_epoch,
        best_loss: es.best_loss,
        stopped_epoch,
        early_stopped,
        history,
    })
}

/// Trains a freshly initialised network on `train`.
pub fn fit<T: Scalar>(
    cfg: &ModelConfig,
    tcfg: &TrainConfig,
    train: &EncodedDataset<T>,
) -> Result<FitOutcome<T>, TrainError> {
    tcfg.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if train.seq_len() != cfg.input_len * cfg.input_channels {
        return Err(TrainError::InvalidConfig(format!(
            "dataset rows have {} values, model expects {}x{}",
            train.seq_len(),
            cfg.input_len,
            cfg.input_channels
        )));
    }
    let (fit_set, val_set) = match tcfg.monitor {
        Monitor::TrainLoss => (train.clone(), None),
        Monitor::ValidationLoss => {
            let s = stratified_split(
                &train.labels,
                train.num_classes(),
                tcfg.validation_frac,
                tcfg.seed,
            )?;
            (train.subset(&s.train_idx), Some(train.subset(&s.test_idx)))
        }
    };
    let params = init_params::<T>(cfg, tcfg.seed)?;
    let mut adam = AdamState::new(&params);
    train_loop(params, tcfg, |epoch, params| {
        let stats = run_epoch(
            cfg,
            params,
            &mut adam,
            &fit_set,
            tcfg,
            epoch,
            EpochMode::Train,
        )?;
        let val_loss = match &val_set {
            Some(v) => {
                Some(run_epoch(cfg, params, &mut adam, v, tcfg, epoch, EpochMode::Eval)?.loss)
            }
            None => None,
        };
        Ok(EpochRecord {
            epoch,
            loss: stats.loss,
            accuracy: stats.accuracy,
            val_loss,
        })
    })
}
