use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::freeze::ResolvedFreeze;
use super::loss::loss_and_grad;
use super::optim::{GroupLr, Optimizer};
use super::plan::TrainPlan;
use super::schedule::LrSchedule;
use super::EarlyStopState;
use crate::augment::{augment_sample, AugPolicy};
use crate::data::{normalize, Dataset, NormalizationStats};
use crate::error::{Error, Result};
use crate::metrics::{acer, apcer, auc, bpcer, Prediction, PredictionSet};
use crate::rng::{stream, Purpose};
use crate::vit::{live_probability, VisionTransformer, VitParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Warmup,
    Main,
}

/// One line of the training log. Train records are per optimizer step;
/// validation records close each epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub epoch: usize,
    pub step: usize,
    pub split: String,
    pub phase: Phase,
    pub loss: f64,
    pub lr_head: f64,
    pub lr_backbone: f64,
    pub acer: Option<f64>,
    pub auc: Option<f64>,
    /// Seconds since the Unix epoch.
    pub timestamp: Option<f64>,
}

pub struct FitOutcome {
    /// Weights from the best monitored epoch.
    pub best: VisionTransformer,
    pub last: VisionTransformer,
    pub best_epoch: usize,
    pub best_metric: f64,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub log: Vec<LogRecord>,
}

fn now(enabled: bool) -> Option<f64> {
    enabled.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0)
    })
}

/// Live-probability predictions for a dataset. Ids are `source_id#index`.
pub fn predict_dataset(model: &VisionTransformer, data: &Dataset, stats: &NormalizationStats) -> Result<PredictionSet> {
    let mut records = Vec::with_capacity(data.len());
    for (i, s) in data.samples.iter().enumerate() {
        let out = model.forward(&normalize(&s.image, stats), false)?;
        records.push(Prediction {
            id: format!("{}#{i}", s.source_id),
            score: live_probability(&out.logits),
            label: s.label,
            attack_type: (!s.attack_type.is_empty()).then(|| s.attack_type.clone()),
        });
    }
    PredictionSet::new(records)
}

struct Validation {
    loss: f64,
    acer: f64,
    auc: f64,
}

fn validate(
    model: &VisionTransformer,
    data: &Dataset,
    stats: &NormalizationStats,
    plan: &TrainPlan,
) -> Result<Validation> {
    let mut records = Vec::with_capacity(data.len());
    let mut loss = 0.0;
    for s in &data.samples {
        let out = model.forward(&normalize(&s.image, stats), false)?;
        loss += loss_and_grad(&plan.loss, &out.logits, s.label).0;
        records.push(Prediction::new(live_probability(&out.logits), s.label));
    }
    let preds = PredictionSet::new(records)?;
    Ok(Validation {
        loss: loss / data.len() as f64,
        acer: acer(apcer(&preds, plan.threshold)?, bpcer(&preds, plan.threshold)?),
        auc: auc(&preds)?,
    })
}

/// Trains `model` and returns the checkpoint of the best validation epoch.
pub fn fit(
    model: VisionTransformer,
    train: &Dataset,
    val: &Dataset,
    stats: &NormalizationStats,
    plan: &TrainPlan,
    aug: &AugPolicy,
) -> Result<FitOutcome> {
    fit_with_log(model, train, val, stats, plan, aug, &mut |_| Ok(()))
}

/// As [`fit`], handing every log record to `sink` as soon as it is produced.
pub fn fit_with_log(
    mut model: VisionTransformer,
    train: &Dataset,
    val: &Dataset,
    stats: &NormalizationStats,
    plan: &TrainPlan,
    aug: &AugPolicy,
    sink: &mut dyn FnMut(&LogRecord) -> Result<()>,
) -> Result<FitOutcome> {
    plan.validate()?;
    aug.validate()?;
    if train.is_empty() {
        return Err(Error::config("data.train_manifest", "training set is empty"));
    }
    if val.is_empty() {
        return Err(Error::config("data.val_manifest", "validation set is empty"));
    }
    let depth = model.config.depth;
    let main_freeze = plan.freeze.resolve(depth)?;
    let warm_freeze = ResolvedFreeze::everything(depth);

    let steps_per_epoch = train.len().div_ceil(plan.batch_size);
    let total = plan.max_epochs * steps_per_epoch;
    let head_sched = LrSchedule::new(plan.lr_head, plan.eta_min, total)?;
    let backbone_sched = LrSchedule::new(plan.lr_backbone, plan.eta_min, total)?;
    let mut optimizer = Optimizer::new(plan.optimizer.clone(), &model.params);
    let mut early = EarlyStopState::new(plan.patience);
    let mut best: Option<VitParams> = None;
    let mut log = Vec::new();
    let mut emit = |r: LogRecord, log: &mut Vec<LogRecord>| -> Result<()> {
        sink(&r)?;
        log.push(r);
        Ok(())
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut step = 0;
    let mut epochs_run = 0;
    let mut stopped_early = false;
    for epoch in 1..=plan.max_epochs {
        epochs_run = epoch;
        let phase = if epoch <= plan.warmup_epochs {
            Phase::Warmup
        } else {
            Phase::Main
        };
        let freeze = match phase {
            Phase::Warmup => &warm_freeze,
            Phase::Main => &main_freeze,
        };
        let trainable = |g| freeze.is_trainable(g);
        order.sort_unstable();
        order.shuffle(&mut stream(plan.seed, Purpose::Shuffle, epoch as u64, 0));

        for batch in order.chunks(plan.batch_size) {
            let lr = GroupLr {
                head: head_sched.at(step)?,
                backbone: backbone_sched.at(step)?,
            };
            let mut grads = VitParams::zeros(&model.config);
            let mut loss_sum = 0.0;
            let inv = 1.0 / batch.len() as f64;
            for &idx in batch {
                let mut aug_rng = stream(aug.seed, Purpose::Augment, epoch as u64, idx as u64);
                let sample = augment_sample(train.samples[idx].clone(), aug, &mut aug_rng);
                let mut drop_rng = stream(plan.seed, Purpose::Dropout, epoch as u64, idx as u64);
                let (logits, trace) = model.forward_train(&normalize(&sample.image, stats), Some(&mut drop_rng))?;
                let (loss, dlogits) = loss_and_grad(&plan.loss, &logits, sample.label);
                loss_sum += loss;
                model.backward(&trace, [dlogits[0] * inv, dlogits[1] * inv], &trainable, &mut grads);
            }
            optimizer.step(&mut model.params, &grads, freeze, lr)?;
            step += 1;
            emit(
                LogRecord {
                    epoch,
                    step,
                    split: "train".into(),
                    phase,
                    loss: loss_sum * inv,
                    lr_head: lr.head,
                    lr_backbone: lr.backbone,
                    acer: None,
                    auc: None,
                    timestamp: now(plan.log_timestamps),
                },
                &mut log,
            )?;
        }

        let v = validate(&model, val, stats, plan)?;
        emit(
            LogRecord {
                epoch,
                step,
                split: "val".into(),
                phase,
                loss: v.loss,
                lr_head: head_sched.at(step)?,
                lr_backbone: backbone_sched.at(step)?,
                acer: Some(v.acer),
                auc: Some(v.auc),
                timestamp: now(plan.log_timestamps),
            },
            &mut log,
        )?;
        log::info!(
            "epoch {epoch}: val loss {:.5} acer {:.4} auc {:.4}",
            v.loss,
            v.acer,
            v.auc
        );
        if phase == Phase::Warmup {
            continue;
        }
        let decision = early.observe(epoch, v.acer);
        if decision.improved {
            best = Some(model.params.clone());
        }
        if decision.stop {
            stopped_early = epoch < plan.max_epochs;
            break;
        }
    }

    let best_params = best.unwrap_or_else(|| model.params.clone());
    Ok(FitOutcome {
        best: VisionTransformer::new(model.config.clone(), best_params)?,
        best_epoch: early.best_epoch.unwrap_or(epochs_run),
        best_metric: early.best_metric,
        last: model,
        epochs_run,
        stopped_early,
        log,
    })
}
