//! Fine-tuning engine: losses, freeze policies, optimizers, cosine
//! schedule, early stopping and the epoch loop.

mod early_stop;
mod fit;
mod freeze;
mod loss;
mod optim;
mod plan;
mod schedule;

pub use early_stop::{EarlyStopState, StopDecision};
pub use fit::{fit, fit_with_log, predict_dataset, FitOutcome, LogRecord, Phase};
pub use freeze::{apply_freeze, BlockSet, FreezePolicy, Partition, ResolvedFreeze};
pub use loss::{cross_entropy, focal_loss, loss_and_grad, LossKind, PROB_EPS};
pub use optim::{adamw_update, nesterov_update, GroupLr, Optimizer, OptimizerKind};
pub use plan::TrainPlan;
pub use schedule::{cosine_lr, LrSchedule};
