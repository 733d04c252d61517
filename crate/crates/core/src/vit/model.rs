//! Forward and backward passes of the register-token transformer.
//!
//! Blocks are pre-norm: `x += attn(LN1(x)); x += mlp(LN2(x))` with a GELU
//! MLP. The classification head reads only the final-normed class token.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::config::{ModelConfig, TokenLayout};
use super::params::{BlockParams, LayerNorm, Linear, ParamGroup, VitParams};
use crate::error::{Error, Result};
use crate::image::Image;

const LN_EPS: f64 = 1e-6;

/// Raw class scores, index 0 = live, index 1 = spoof.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Logits {
    pub values: [f64; 2],
}

impl Logits {
    pub fn live(&self) -> f64 {
        self.values[0]
    }

    pub fn spoof(&self) -> f64 {
        self.values[1]
    }
}

/// Softmax probability of the live class.
pub fn live_probability(logits: &Logits) -> f64 {
    let [live, spoof] = logits.values;
    // 1 / (1 + e^(spoof - live)), evaluated without overflow
    let d = spoof - live;
    if d >= 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

/// Attention probabilities of one head in one layer (query × key).
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionRecord {
    pub layer: usize,
    pub head: usize,
    pub weights: Array2<f64>,
}

#[derive(Clone, Debug)]
pub struct ForwardOutput {
    pub logits: Logits,
    /// One record per (layer, head) when attention capture was requested.
    pub attention: Vec<AttentionRecord>,
    /// Token outputs of the last encoder block, before the final norm.
    pub final_tokens: Array2<f64>,
    pub layout: TokenLayout,
}

/// Splits an `image_size × image_size × 3` image into flattened patches in
/// row-major grid order. Each patch is flattened as `(row, col, channel)`.
pub fn patchify(image: &Image, config: &ModelConfig) -> Result<Array2<f64>> {
    if image.height() != config.image_size || image.width() != config.image_size {
        return Err(Error::config(
            "model.image_size",
            format!(
                "image is {}x{}, model expects {}x{}",
                image.height(),
                image.width(),
                config.image_size,
                config.image_size
            ),
        ));
    }
    let p = config.patch_size;
    let grid = config.grid();
    let mut out = Array2::zeros((grid * grid, config.patch_dim()));
    for gy in 0..grid {
        for gx in 0..grid {
            let mut row = out.row_mut(gy * grid + gx);
            let mut k = 0;
            for py in 0..p {
                for px in 0..p {
                    for c in 0..crate::image::CHANNELS {
                        row[k] = image.get(gy * p + py, gx * p + px, c) as f64;
                        k += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn linear(x: &ArrayView2<f64>, l: &Linear) -> Array2<f64> {
    let mut y = x.dot(&l.weight);
    y += &l.bias;
    y
}

fn linear_backward(
    x: &ArrayView2<f64>,
    dy: &Array2<f64>,
    l: &Linear,
    grad: Option<&mut Linear>,
    need_dx: bool,
) -> Option<Array2<f64>> {
    if let Some(g) = grad {
        g.weight += &x.t().dot(dy);
        g.bias += &dy.sum_axis(Axis(0));
    }
    need_dx.then(|| dy.dot(&l.weight.t()))
}

struct NormTrace {
    xhat: Array2<f64>,
    rstd: Array1<f64>,
}

fn layer_norm(x: &ArrayView2<f64>, ln: &LayerNorm) -> (Array2<f64>, NormTrace) {
    let (rows, dim) = x.dim();
    let mut xhat = Array2::zeros((rows, dim));
    let mut rstd = Array1::zeros(rows);
    for (r, row) in x.outer_iter().enumerate() {
        let mean = row.sum() / dim as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / dim as f64;
        let rs = 1.0 / (var + LN_EPS).sqrt();
        rstd[r] = rs;
        xhat.row_mut(r).zip_mut_with(&row, |h, &v| *h = (v - mean) * rs);
    }
    let mut y = &xhat * &ln.weight;
    y += &ln.bias;
    (y, NormTrace { xhat, rstd })
}

fn layer_norm_backward(
    dy: &Array2<f64>,
    trace: &NormTrace,
    ln: &LayerNorm,
    grad: Option<&mut LayerNorm>,
) -> Array2<f64> {
    if let Some(g) = grad {
        g.weight += &(dy * &trace.xhat).sum_axis(Axis(0));
        g.bias += &dy.sum_axis(Axis(0));
    }
    let dxhat = dy * &ln.weight;
    let dim = dxhat.ncols() as f64;
    let mut dx = Array2::zeros(dxhat.raw_dim());
    for r in 0..dxhat.nrows() {
        let dh = dxhat.row(r);
        let xh = trace.xhat.row(r);
        let mean_dh = dh.sum() / dim;
        let mean_dhx = dh.dot(&xh) / dim;
        let rs = trace.rstd[r];
        dx.row_mut(r)
            .iter_mut()
            .zip(dh.iter().zip(xh.iter()))
            .for_each(|(o, (&a, &b))| *o = rs * (a - mean_dh - b * mean_dhx));
    }
    dx
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_K: f64 = 0.044_715;

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_K * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_K * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_K * x * x)
}

fn softmax_rows(s: &mut Array2<f64>) {
    for mut row in s.outer_iter_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

struct BlockTrace {
    ln1: NormTrace,
    h1: Array2<f64>,
    qkv: Array2<f64>,
    attn: Vec<Array2<f64>>,
    mixed: Array2<f64>,
    ln2: NormTrace,
    h2: Array2<f64>,
    pre_act: Array2<f64>,
    act: Array2<f64>,
}

/// Intermediate values retained by a training forward pass.
pub struct Trace {
    patches: Array2<f64>,
    blocks: Vec<BlockTrace>,
    final_norm: NormTrace,
    feature: Array1<f64>,
    dropout_mask: Option<Array1<f64>>,
}

fn check_finite(x: &Array2<f64>, layer: impl FnOnce() -> String) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericFailure { layer: layer() })
    }
}

fn block_forward(x: &Array2<f64>, b: &BlockParams, config: &ModelConfig) -> (Array2<f64>, BlockTrace) {
    let d = config.embed_dim;
    let dh = config.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();
    let tokens = x.nrows();

    let (h1, ln1) = layer_norm(&x.view(), &b.norm1);
    let qkv = linear(&h1.view(), &b.qkv);
    let mut mixed = Array2::zeros((tokens, d));
    let mut attn = Vec::with_capacity(config.num_heads);
    for h in 0..config.num_heads {
        let q = qkv.slice(s![.., h * dh..(h + 1) * dh]);
        let k = qkv.slice(s![.., d + h * dh..d + (h + 1) * dh]);
        let v = qkv.slice(s![.., 2 * d + h * dh..2 * d + (h + 1) * dh]);
        let mut a = q.dot(&k.t());
        a *= scale;
        softmax_rows(&mut a);
        mixed.slice_mut(s![.., h * dh..(h + 1) * dh]).assign(&a.dot(&v));
        attn.push(a);
    }
    let mut x_mid = linear(&mixed.view(), &b.proj);
    x_mid += x;

    let (h2, ln2) = layer_norm(&x_mid.view(), &b.norm2);
    let pre_act = linear(&h2.view(), &b.fc1);
    let act = pre_act.mapv(gelu);
    let mut x_out = linear(&act.view(), &b.fc2);
    x_out += &x_mid;

    (
        x_out,
        BlockTrace {
            ln1,
            h1,
            qkv,
            attn,
            mixed,
            ln2,
            h2,
            pre_act,
            act,
        },
    )
}

/// Backpropagates through one block. Accumulates into `grad` when given and
/// returns the gradient w.r.t. the block input when `need_dx`.
fn block_backward(
    dx_out: &Array2<f64>,
    t: &BlockTrace,
    b: &BlockParams,
    mut grad: Option<&mut BlockParams>,
    config: &ModelConfig,
    need_dx: bool,
) -> Option<Array2<f64>> {
    let d = config.embed_dim;
    let dh = config.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();

    // MLP branch
    let dact = linear_backward(
        &t.act.view(),
        dx_out,
        &b.fc2,
        grad.as_deref_mut().map(|g| &mut g.fc2),
        true,
    )
    .expect("requested");
    let mut dpre = dact;
    dpre.zip_mut_with(&t.pre_act, |g, &u| *g *= gelu_grad(u));
    let dh2 = linear_backward(
        &t.h2.view(),
        &dpre,
        &b.fc1,
        grad.as_deref_mut().map(|g| &mut g.fc1),
        true,
    )
    .expect("requested");
    let mut dx_mid = layer_norm_backward(&dh2, &t.ln2, &b.norm2, grad.as_deref_mut().map(|g| &mut g.norm2));
    dx_mid += dx_out;

    // attention branch
    let dmixed = linear_backward(
        &t.mixed.view(),
        &dx_mid,
        &b.proj,
        grad.as_deref_mut().map(|g| &mut g.proj),
        true,
    )
    .expect("requested");
    let mut dqkv = Array2::zeros(t.qkv.raw_dim());
    for h in 0..config.num_heads {
        let q = t.qkv.slice(s![.., h * dh..(h + 1) * dh]);
        let k = t.qkv.slice(s![.., d + h * dh..d + (h + 1) * dh]);
        let v = t.qkv.slice(s![.., 2 * d + h * dh..2 * d + (h + 1) * dh]);
        let a = &t.attn[h];
        let dout = dmixed.slice(s![.., h * dh..(h + 1) * dh]);
        let da = dout.dot(&v.t());
        let dv = a.t().dot(&dout);
        let mut ds = da;
        for (mut ds_row, a_row) in ds.outer_iter_mut().zip(a.outer_iter()) {
            let inner = ds_row.dot(&a_row);
            ds_row.zip_mut_with(&a_row, |g, &p| *g = p * (*g - inner) * scale);
        }
        dqkv.slice_mut(s![.., h * dh..(h + 1) * dh]).assign(&ds.dot(&k));
        dqkv.slice_mut(s![.., d + h * dh..d + (h + 1) * dh])
            .assign(&ds.t().dot(&q));
        dqkv.slice_mut(s![.., 2 * d + h * dh..2 * d + (h + 1) * dh]).assign(&dv);
    }
    let dh1 = linear_backward(
        &t.h1.view(),
        &dqkv,
        &b.qkv,
        grad.as_deref_mut().map(|g| &mut g.qkv),
        true,
    )
    .expect("requested");
    if !need_dx && grad.is_none() {
        return None;
    }
    let mut dx_in = layer_norm_backward(&dh1, &t.ln1, &b.norm1, grad.map(|g| &mut g.norm1));
    if !need_dx {
        return None;
    }
    dx_in += &dx_mid;
    Some(dx_in)
}

/// The register-token vision transformer with its classification head.
#[derive(Clone, Debug, PartialEq)]
pub struct VisionTransformer {
    pub config: ModelConfig,
    pub params: VitParams,
}

impl VisionTransformer {
    pub fn new(config: ModelConfig, params: VitParams) -> Result<Self> {
        config.validate()?;
        let expected = VitParams::zeros(&config);
        for (have, want) in params.tensors().iter().zip(expected.tensors()) {
            if have.shape != want.shape {
                return Err(Error::Dimension(format!(
                    "{}: shape {:?}, config requires {:?}",
                    have.name, have.shape, want.shape
                )));
            }
        }
        if params.blocks.len() != config.depth {
            return Err(Error::Dimension(format!(
                "{} blocks, config requires {}",
                params.blocks.len(),
                config.depth
            )));
        }
        Ok(Self { config, params })
    }

    pub fn init<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let params = VitParams::init(&config, rng);
        Ok(Self { config, params })
    }

    /// Embeds patches and assembles `[class, registers, patches]`.
    /// Positional embeddings go to the class and patch tokens only.
    pub fn build_token_sequence(&self, patches: &Array2<f64>) -> Result<(Array2<f64>, TokenLayout)> {
        let layout = self.config.layout();
        if patches.nrows() != layout.n_patch || patches.ncols() != self.config.patch_dim() {
            return Err(Error::Dimension(format!(
                "{}x{} patch matrix, expected {}x{}",
                patches.nrows(),
                patches.ncols(),
                layout.n_patch,
                self.config.patch_dim()
            )));
        }
        let p = &self.params;
        let embedded = linear(&patches.view(), &p.patch_embed);
        let mut seq = Array2::zeros((layout.total, self.config.embed_dim));
        let mut cls = seq.row_mut(0);
        cls.assign(&p.cls_token);
        cls += &p.pos_embed.row(0);
        seq.slice_mut(s![layout.register_range(), ..])
            .assign(&p.register_tokens);
        let mut patch_rows = seq.slice_mut(s![layout.patch_range(), ..]);
        patch_rows.assign(&embedded);
        patch_rows += &p.pos_embed.slice(s![1.., ..]);
        Ok((seq, layout))
    }

    /// Applies the final norm to the class token and the linear head.
    /// Register and patch rows of `final_tokens` are never read.
    pub fn classify_tokens(&self, final_tokens: &Array2<f64>) -> Logits {
        let cls = final_tokens.slice(s![0..1, ..]);
        let (normed, _) = layer_norm(&cls, &self.params.norm);
        let out = linear(&normed.view(), &self.params.head);
        Logits {
            values: [out[[0, 0]], out[[0, 1]]],
        }
    }

    /// Inference pass. `image` must already be normalized.
    pub fn forward(&self, image: &Image, capture_attention: bool) -> Result<ForwardOutput> {
        let patches = patchify(image, &self.config)?;
        let (mut x, layout) = self.build_token_sequence(&patches)?;
        check_finite(&x, || "patch embedding".into())?;
        let mut attention = Vec::new();
        for (i, b) in self.params.blocks.iter().enumerate() {
            let (next, trace) = block_forward(&x, b, &self.config);
            check_finite(&next, || format!("block {}", i + 1))?;
            if capture_attention {
                attention.extend(
                    trace
                        .attn
                        .into_iter()
                        .enumerate()
                        .map(|(head, weights)| AttentionRecord {
                            layer: i,
                            head,
                            weights,
                        }),
                );
            }
            x = next;
        }
        let logits = self.classify_tokens(&x);
        if !logits.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericFailure { layer: "head".into() });
        }
        Ok(ForwardOutput {
            logits,
            attention,
            final_tokens: x,
            layout,
        })
    }

    /// Training pass: retains intermediates and applies head-input dropout
    /// when `drop_rate > 0` and an rng is supplied.
    pub fn forward_train<R: Rng + ?Sized>(&self, image: &Image, rng: Option<&mut R>) -> Result<(Logits, Trace)> {
        let patches = patchify(image, &self.config)?;
        let (mut x, _) = self.build_token_sequence(&patches)?;
        check_finite(&x, || "patch embedding".into())?;
        let mut blocks = Vec::with_capacity(self.config.depth);
        for (i, b) in self.params.blocks.iter().enumerate() {
            let (next, trace) = block_forward(&x, b, &self.config);
            check_finite(&next, || format!("block {}", i + 1))?;
            blocks.push(trace);
            x = next;
        }
        let (normed, final_norm) = layer_norm(&x.slice(s![0..1, ..]), &self.params.norm);
        let mut feature = normed.row(0).to_owned();
        let drop = self.config.drop_rate;
        let dropout_mask = match rng {
            Some(rng) if drop > 0.0 => {
                let keep = 1.0 - drop;
                let mask: Array1<f64> = (0..feature.len())
                    .map(|_| if rng.random::<f64>() < drop { 0.0 } else { 1.0 / keep })
                    .collect();
                feature *= &mask;
                Some(mask)
            }
            _ => None,
        };
        let out = feature.dot(&self.params.head.weight) + &self.params.head.bias;
        let logits = Logits {
            values: [out[0], out[1]],
        };
        if !logits.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericFailure { layer: "head".into() });
        }
        Ok((
            logits,
            Trace {
                patches,
                blocks,
                final_norm,
                feature,
                dropout_mask,
            },
        ))
    }

    /// Accumulates the gradient of a scalar loss into `grads`, given
    /// `dloss/dlogits`. Only groups for which `trainable` returns true receive
    /// gradients; backpropagation stops below the lowest trainable group.
    pub fn backward(
        &self,
        trace: &Trace,
        dlogits: [f64; 2],
        trainable: &dyn Fn(ParamGroup) -> bool,
        grads: &mut VitParams,
    ) {
        let p = &self.params;
        let dl = ndarray::arr1(&dlogits);
        if trainable(ParamGroup::Head) {
            let f = trace.feature.view().insert_axis(Axis(1));
            grads.head.weight += &f.dot(&dl.view().insert_axis(Axis(0)));
            grads.head.bias += &dl;
        }
        let depth = self.config.depth;
        let stem = trainable(ParamGroup::Stem);
        let lowest_block = (0..depth).find(|&i| trainable(ParamGroup::Block(i)));
        let final_norm = trainable(ParamGroup::FinalNorm);
        if !stem && lowest_block.is_none() && !final_norm {
            return;
        }

        let mut dfeature = p.head.weight.dot(&dl);
        if let Some(mask) = &trace.dropout_mask {
            dfeature *= mask;
        }
        let dnormed = dfeature.insert_axis(Axis(0));
        let dcls = layer_norm_backward(
            &dnormed,
            &trace.final_norm,
            &p.norm,
            final_norm.then_some(&mut grads.norm),
        );
        let stop = if stem { 0 } else { lowest_block.unwrap_or(depth) };
        if stop == depth {
            return;
        }
        let tokens = trace.blocks[0].h1.nrows();
        let mut dx = Array2::zeros((tokens, self.config.embed_dim));
        dx.row_mut(0).assign(&dcls.row(0));
        for i in (stop..depth).rev() {
            let grad = trainable(ParamGroup::Block(i)).then(|| &mut grads.blocks[i]);
            let need_dx = i > stop || stem;
            match block_backward(&dx, &trace.blocks[i], &p.blocks[i], grad, &self.config, need_dx) {
                Some(next) => dx = next,
                None => return,
            }
        }
        if !stem {
            return;
        }
        let layout = self.config.layout();
        grads.cls_token += &dx.row(0);
        let mut dpos = grads.pos_embed.slice_mut(s![0..1, ..]);
        dpos += &dx.slice(s![0..1, ..]);
        grads
            .register_tokens
            .scaled_add(1.0, &dx.slice(s![layout.register_range(), ..]));
        let dpatch = dx.slice(s![layout.patch_range(), ..]);
        let mut dpos_patch = grads.pos_embed.slice_mut(s![1.., ..]);
        dpos_patch += &dpatch;
        grads.patch_embed.weight += &trace.patches.t().dot(&dpatch);
        grads.patch_embed.bias += &dpatch.sum_axis(Axis(0));
    }
}
