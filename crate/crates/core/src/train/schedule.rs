use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cosine annealing from `eta_max` at step 0 to `eta_min` at `total_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrSchedule {
    pub eta_max: f64,
    pub eta_min: f64,
    pub total_steps: usize,
}

impl LrSchedule {
    pub fn new(eta_max: f64, eta_min: f64, total_steps: usize) -> Result<Self> {
        if !(eta_min >= 0.0 && eta_min <= eta_max && eta_max.is_finite()) {
            return Err(Error::config(
                "train.eta_min",
                format!("need 0 <= eta_min ({eta_min}) <= eta_max ({eta_max})"),
            ));
        }
        Ok(Self {
            eta_max,
            eta_min,
            total_steps,
        })
    }

    pub fn at(&self, step: usize) -> Result<f64> {
        cosine_lr(step, self)
    }
}

/// `eta_min + (eta_max - eta_min) * (1 + cos(pi * t / T)) / 2`, exact at both ends.
pub fn cosine_lr(step: usize, schedule: &LrSchedule) -> Result<f64> {
    let total = schedule.total_steps;
    if step > total {
        return Err(Error::Schedule { step, total });
    }
    if step == 0 {
        return Ok(schedule.eta_max);
    }
    if step == total {
        return Ok(schedule.eta_min);
    }
    let w = 0.5 * (1.0 + (PI * step as f64 / total as f64).cos());
    let lr = schedule.eta_min + w * (schedule.eta_max - schedule.eta_min);
    Ok(lr.clamp(schedule.eta_min, schedule.eta_max))
}
