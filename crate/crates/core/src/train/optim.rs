use serde::{Deserialize, Serialize};

use super::freeze::ResolvedFreeze;
use crate::error::{Error, Result};
use crate::vit::{ParamGroup, VitParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerKind {
    /// Adam with decoupled weight decay.
    Adamw {
        #[serde(default = "default_weight_decay")]
        weight_decay: f64,
        #[serde(default = "default_betas")]
        betas: [f64; 2],
        #[serde(default = "default_eps")]
        eps: f64,
    },
    /// SGD with Nesterov momentum; weight decay is added to the gradient.
    NesterovSgd {
        #[serde(default = "default_momentum")]
        momentum: f64,
        #[serde(default)]
        weight_decay: f64,
    },
}

fn default_weight_decay() -> f64 {
    0.01
}

fn default_betas() -> [f64; 2] {
    [0.9, 0.999]
}

fn default_eps() -> f64 {
    1e-8
}

fn default_momentum() -> f64 {
    0.9
}

impl Default for OptimizerKind {
    fn default() -> Self {
        Self::adamw()
    }
}

impl OptimizerKind {
    pub fn adamw() -> Self {
        OptimizerKind::Adamw {
            weight_decay: default_weight_decay(),
            betas: default_betas(),
            eps: default_eps(),
        }
    }

    pub fn nesterov() -> Self {
        OptimizerKind::NesterovSgd {
            momentum: default_momentum(),
            weight_decay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OptimizerKind::Adamw {
                weight_decay,
                betas,
                eps,
            } => {
                if !(0.0..).contains(&weight_decay) {
                    return Err(Error::config("train.optimizer.weight_decay", "must be >= 0"));
                }
                if !betas.iter().all(|b| (0.0..1.0).contains(b)) {
                    return Err(Error::config("train.optimizer.betas", "each beta must lie in [0, 1)"));
                }
                if eps.is_nan() || eps <= 0.0 {
                    return Err(Error::config("train.optimizer.eps", "must be > 0"));
                }
            }
            OptimizerKind::NesterovSgd { momentum, weight_decay } => {
                if !(0.0..1.0).contains(&momentum) {
                    return Err(Error::config("train.optimizer.momentum", "must lie in [0, 1)"));
                }
                if !(0.0..).contains(&weight_decay) {
                    return Err(Error::config("train.optimizer.weight_decay", "must be >= 0"));
                }
            }
        }
        Ok(())
    }
}

/// One AdamW update on a flat tensor. `t` is the 1-based step count.
#[allow(clippy::too_many_arguments)]
pub fn adamw_update(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    t: u64,
    betas: [f64; 2],
    eps: f64,
    weight_decay: f64,
) {
    let [b1, b2] = betas;
    let c1 = 1.0 - b1.powi(t as i32);
    let c2 = 1.0 - b2.powi(t as i32);
    let decay = 1.0 - lr * weight_decay;
    for i in 0..p.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        p[i] = p[i] * decay - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// One Nesterov SGD update. On the first step the buffer is the gradient.
pub fn nesterov_update(
    p: &mut [f64],
    g: &[f64],
    buf: &mut [f64],
    first: bool,
    lr: f64,
    momentum: f64,
    weight_decay: f64,
) {
    for i in 0..p.len() {
        let gi = g[i] + weight_decay * p[i];
        buf[i] = if first { gi } else { momentum * buf[i] + gi };
        p[i] -= lr * (gi + momentum * buf[i]);
    }
}

/// Learning rates for the head and for every other trainable group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupLr {
    pub head: f64,
    pub backbone: f64,
}

impl GroupLr {
    pub fn for_group(&self, group: ParamGroup) -> f64 {
        match group {
            ParamGroup::Head => self.head,
            _ => self.backbone,
        }
    }
}

/// Optimizer state for a whole model. Frozen tensors are never touched and
/// their state never advances.
pub struct Optimizer {
    kind: OptimizerKind,
    first: Vec<f64>,
    second: Vec<f64>,
    offsets: Vec<usize>,
    steps: Vec<u64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, params: &VitParams) -> Self {
        let mut offsets = vec![0];
        for t in params.tensors() {
            offsets.push(offsets.last().unwrap() + t.data.len());
        }
        let total = *offsets.last().unwrap();
        let second = match kind {
            OptimizerKind::Adamw { .. } => vec![0.0; total],
            OptimizerKind::NesterovSgd { .. } => Vec::new(),
        };
        let n = offsets.len() - 1;
        Self {
            kind,
            first: vec![0.0; total],
            second,
            offsets,
            steps: vec![0; n],
        }
    }

    pub fn kind(&self) -> &OptimizerKind {
        &self.kind
    }

    /// Applies one update to every trainable tensor. All trainable gradients
    /// are checked for finiteness before anything is modified.
    pub fn step(
        &mut self,
        params: &mut VitParams,
        grads: &VitParams,
        freeze: &ResolvedFreeze,
        lr: GroupLr,
    ) -> Result<()> {
        let grad_tensors = grads.tensors();
        for g in &grad_tensors {
            if freeze.is_trainable(g.group) && !g.data.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteGradient { tensor: g.name.clone() });
            }
        }
        for (i, (p, g)) in params.tensors_mut().into_iter().zip(&grad_tensors).enumerate() {
            if !freeze.is_trainable(p.group) {
                continue;
            }
            let range = self.offsets[i]..self.offsets[i + 1];
            self.steps[i] += 1;
            let rate = lr.for_group(p.group);
            match self.kind {
                OptimizerKind::Adamw {
                    weight_decay,
                    betas,
                    eps,
                } => adamw_update(
                    p.data,
                    g.data,
                    &mut self.first[range.clone()],
                    &mut self.second[range],
                    rate,
                    self.steps[i],
                    betas,
                    eps,
                    weight_decay,
                ),
                OptimizerKind::NesterovSgd { momentum, weight_decay } => nesterov_update(
                    p.data,
                    g.data,
                    &mut self.first[range],
                    self.steps[i] == 1,
                    rate,
                    momentum,
                    weight_decay,
                ),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::FreezePolicy;
    use crate::vit::ModelConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sgd_scalar_step() {
        let mut p = [1.0];
        let mut buf = [0.0];
        nesterov_update(&mut p, &[1.0], &mut buf, true, 0.1, 0.0, 0.0);
        assert!((p[0] - 0.9).abs() < 1e-15);
        // with momentum 0.9: first update is g + 0.9 g, second uses buf = 0.9 * g + g
        let mut p = [0.0];
        let mut buf = [0.0];
        nesterov_update(&mut p, &[1.0], &mut buf, true, 0.1, 0.9, 0.0);
        assert!((p[0] + 0.19).abs() < 1e-15);
        nesterov_update(&mut p, &[1.0], &mut buf, false, 0.1, 0.9, 0.0);
        assert!((p[0] + 0.19 + 0.1 * (1.0 + 0.9 * 1.9)).abs() < 1e-15);
    }

    #[test]
    fn adamw_first_step_is_lr_sized() {
        let mut p = [0.5, -0.5];
        let (mut m, mut v) = ([0.0; 2], [0.0; 2]);
        adamw_update(&mut p, &[2.0, -3.0], &mut m, &mut v, 0.01, 1, [0.9, 0.999], 1e-8, 0.0);
        assert!((p[0] - 0.49).abs() < 1e-9);
        assert!((p[1] + 0.49).abs() < 1e-9);
        let mut q = [0.5];
        let (mut m, mut v) = ([0.0], [0.0]);
        adamw_update(&mut q, &[0.0], &mut m, &mut v, 0.01, 1, [0.9, 0.999], 1e-8, 0.0);
        assert_eq!(q[0], 0.5);
        adamw_update(&mut q, &[0.0], &mut m, &mut v, 0.1, 2, [0.9, 0.999], 1e-8, 0.5);
        assert!((q[0] - 0.5 * 0.95).abs() < 1e-15);
    }

    fn random_like(p: &VitParams, seed: u64) -> VitParams {
        let mut g = p.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in g.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        }
        g
    }

    #[test]
    fn frozen_tensors_stay_bitwise_equal() {
        let cfg = ModelConfig {
            depth: 3,
            embed_dim: 8,
            num_heads: 2,
            ..ModelConfig::toy()
        };
        let init = VitParams::init(&cfg, &mut ChaCha8Rng::seed_from_u64(0));
        let freeze = FreezePolicy::last_block().resolve(3).unwrap();
        for kind in [OptimizerKind::adamw(), OptimizerKind::nesterov()] {
            let mut p = init.clone();
            let mut opt = Optimizer::new(kind, &p);
            for s in 0..5 {
                let g = random_like(&p, s);
                opt.step(
                    &mut p,
                    &g,
                    &freeze,
                    GroupLr {
                        head: 1e-2,
                        backbone: 1e-3,
                    },
                )
                .unwrap();
            }
            for (a, b) in p.tensors().iter().zip(init.tensors()) {
                if freeze.is_trainable(a.group) {
                    assert_ne!(a.data, b.data, "{}", a.name);
                } else {
                    assert_eq!(a.data, b.data, "{}", a.name);
                }
            }
        }
    }

    #[test]
    fn nan_gradient_aborts_without_update() {
        let cfg = ModelConfig {
            depth: 1,
            embed_dim: 8,
            num_heads: 2,
            ..ModelConfig::toy()
        };
        let init = VitParams::init(&cfg, &mut ChaCha8Rng::seed_from_u64(0));
        let mut p = init.clone();
        let mut g = random_like(&p, 1);
        g.head.bias[1] = f64::NAN;
        let mut opt = Optimizer::new(OptimizerKind::adamw(), &p);
        let freeze = ResolvedFreeze::everything(1);
        match opt.step(
            &mut p,
            &g,
            &freeze,
            GroupLr {
                head: 0.1,
                backbone: 0.1,
            },
        ) {
            Err(Error::NonFiniteGradient { tensor }) => assert_eq!(tensor, "head.bias"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(p, init);
    }
}
