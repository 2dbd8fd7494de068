use crate::nncore::ParamStore;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

/// Tracks the best monitored loss and a snapshot of the weights that produced it.
/// Improvement is strict; there is no minimum delta.
#[derive(Debug, Clone)]
pub struct EarlyStopState<T> {
    pub patience: usize,
    pub best_loss: f64,
    /// 1-based epoch of the best loss; 0 before the first observation.
    pub best_epoch: usize,
    pub best_params: Option<ParamStore<T>>,
    pub epochs_since_improvement: usize,
}

impl<T: Scalar> EarlyStopState<T> {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            best_params: None,
            epochs_since_improvement: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, loss: f64, params: &ParamStore<T>) -> StopDecision {
        if loss < self.best_loss {
            self.best_loss = loss;
            self.best_epoch = epoch;
            self.best_params = Some(params.clone());
            self.epochs_since_improvement = 0;
        } else {
            self.epochs_since_improvement += 1;
        }
        if self.epochs_since_improvement >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_non_improving_epochs() {
        let p = ParamStore::<f64> { layers: vec![] };
        let mut es = EarlyStopState::new(2);
        assert_eq!(es.observe(1, 1.0, &p), StopDecision::Continue);
        assert_eq!(es.observe(2, 1.0, &p), StopDecision::Continue);
        assert_eq!(es.observe(3, 0.5, &p), StopDecision::Continue);
        assert_eq!(es.best_epoch, 3);
        assert_eq!(es.observe(4, 0.7, &p), StopDecision::Continue);
        assert_eq!(es.observe(5, 0.5, &p), StopDecision::Stop);
    }
}
