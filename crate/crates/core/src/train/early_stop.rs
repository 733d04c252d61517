/// Patience-based early stopping on a lower-is-better metric.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopState {
    pub best_metric: f64,
    pub best_epoch: Option<usize>,
    pub epochs_since_best: usize,
    pub patience: usize,
    pub monitored: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopDecision {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopState {
    pub fn new(patience: usize) -> Self {
        Self::monitoring("val_acer", patience)
    }

    pub fn monitoring(metric: impl Into<String>, patience: usize) -> Self {
        Self {
            best_metric: f64::INFINITY,
            best_epoch: None,
            epochs_since_best: 0,
            patience,
            monitored: metric.into(),
        }
    }

    /// Records one epoch. Only a strict decrease counts as improvement; a
    /// NaN metric never does.
    pub fn observe(&mut self, epoch: usize, metric: f64) -> StopDecision {
        let improved = self.best_epoch.is_none() && !metric.is_nan() || metric < self.best_metric;
        if improved {
            self.best_metric = metric;
            self.best_epoch = Some(epoch);
            self.epochs_since_best = 0;
        } else {
            self.epochs_since_best += 1;
        }
        StopDecision {
            improved,
            stop: self.epochs_since_best >= self.patience,
        }
    }
}
