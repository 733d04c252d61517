//! Parameter tensors of the transformer and their naming scheme.
//!
//! Every tensor has a stable dotted name (`block.{i}.attn.qkv.weight`,
//! `head.weight`, `register_tokens`, ...) with 0-based block indices. Linear
//! weights are stored `in × out`, so a layer computes `x · W + b`.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::ModelConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Array2::zeros((input, output)),
            bias: Array1::zeros(output),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerNorm {
    pub weight: Array1<f64>,
    pub bias: Array1<f64>,
}

impl LayerNorm {
    fn zeros(dim: usize) -> Self {
        Self {
            weight: Array1::zeros(dim),
            bias: Array1::zeros(dim),
        }
    }

    fn identity(dim: usize) -> Self {
        Self {
            weight: Array1::ones(dim),
            bias: Array1::zeros(dim),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockParams {
    pub norm1: LayerNorm,
    pub qkv: Linear,
    pub proj: Linear,
    pub norm2: LayerNorm,
    pub fc1: Linear,
    pub fc2: Linear,
}

/// All learnable tensors of the model. Also used as the gradient and
/// optimizer-moment container, since those share the exact same shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct VitParams {
    pub patch_embed: Linear,
    pub cls_token: Array1<f64>,
    pub register_tokens: Array2<f64>,
    /// One row for the class token followed by one per patch.
    pub pos_embed: Array2<f64>,
    pub blocks: Vec<BlockParams>,
    pub norm: LayerNorm,
    pub head: Linear,
}

/// Which part of the network a tensor belongs to; drives freezing and
/// per-group learning rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamGroup {
    /// Patch embedding, class token, register tokens, positional embeddings.
    Stem,
    /// Encoder block, 0-based.
    Block(usize),
    FinalNorm,
    Head,
}

pub struct TensorRef<'a> {
    pub name: String,
    pub group: ParamGroup,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

pub struct TensorMut<'a> {
    pub name: String,
    pub group: ParamGroup,
    pub data: &'a mut [f64],
}

fn slice1(a: &Array1<f64>) -> &[f64] {
    a.as_slice().expect("parameters are contiguous")
}

fn slice2(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("parameters are contiguous")
}

fn slice1_mut(a: &mut Array1<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are contiguous")
}

fn slice2_mut(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are contiguous")
}

impl VitParams {
    pub fn zeros(config: &ModelConfig) -> Self {
        let d = config.embed_dim;
        let hidden = config.mlp_hidden();
        let blocks = (0..config.depth)
            .map(|_| BlockParams {
                norm1: LayerNorm::zeros(d),
                qkv: Linear::zeros(d, 3 * d),
                proj: Linear::zeros(d, d),
                norm2: LayerNorm::zeros(d),
                fc1: Linear::zeros(d, hidden),
                fc2: Linear::zeros(hidden, d),
            })
            .collect();
        Self {
            patch_embed: Linear::zeros(config.patch_dim(), d),
            cls_token: Array1::zeros(d),
            register_tokens: Array2::zeros((config.num_register_tokens, d)),
            pos_embed: Array2::zeros((1 + config.num_patches(), d)),
            blocks,
            norm: LayerNorm::zeros(d),
            head: Linear::zeros(d, config.num_classes),
        }
    }

    /// Random initialization: normal(0, 0.02) weights and tokens, zero
    /// biases, identity layer norms.
    pub fn init<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Self {
        let mut p = Self::zeros(config);
        let normal = Normal::new(0.0, 0.02).expect("valid std");
        let mut fill = |a: &mut [f64]| a.iter_mut().for_each(|v| *v = normal.sample(rng));
        fill(slice2_mut(&mut p.patch_embed.weight));
        fill(slice1_mut(&mut p.cls_token));
        fill(slice2_mut(&mut p.register_tokens));
        fill(slice2_mut(&mut p.pos_embed));
        let d = config.embed_dim;
        for b in &mut p.blocks {
            b.norm1 = LayerNorm::identity(d);
            b.norm2 = LayerNorm::identity(d);
            fill(slice2_mut(&mut b.qkv.weight));
            fill(slice2_mut(&mut b.proj.weight));
            fill(slice2_mut(&mut b.fc1.weight));
            fill(slice2_mut(&mut b.fc2.weight));
        }
        p.norm = LayerNorm::identity(d);
        fill(slice2_mut(&mut p.head.weight));
        p
    }

    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::with_capacity(7 + 12 * self.blocks.len());
        let mut push = |name: String, group, shape: &[usize], data| {
            out.push(TensorRef {
                name,
                group,
                shape: shape.to_vec(),
                data,
            })
        };
        let pe = &self.patch_embed;
        push(
            "patch_embed.weight".into(),
            ParamGroup::Stem,
            pe.weight.shape(),
            slice2(&pe.weight),
        );
        push(
            "patch_embed.bias".into(),
            ParamGroup::Stem,
            pe.bias.shape(),
            slice1(&pe.bias),
        );
        push(
            "cls_token".into(),
            ParamGroup::Stem,
            self.cls_token.shape(),
            slice1(&self.cls_token),
        );
        push(
            "register_tokens".into(),
            ParamGroup::Stem,
            self.register_tokens.shape(),
            slice2(&self.register_tokens),
        );
        push(
            "pos_embed".into(),
            ParamGroup::Stem,
            self.pos_embed.shape(),
            slice2(&self.pos_embed),
        );
        for (i, b) in self.blocks.iter().enumerate() {
            let g = ParamGroup::Block(i);
            let ln = |name: &str| format!("block.{i}.{name}");
            push(ln("norm1.weight"), g, b.norm1.weight.shape(), slice1(&b.norm1.weight));
            push(ln("norm1.bias"), g, b.norm1.bias.shape(), slice1(&b.norm1.bias));
            push(ln("attn.qkv.weight"), g, b.qkv.weight.shape(), slice2(&b.qkv.weight));
            push(ln("attn.qkv.bias"), g, b.qkv.bias.shape(), slice1(&b.qkv.bias));
            push(ln("attn.proj.weight"), g, b.proj.weight.shape(), slice2(&b.proj.weight));
            push(ln("attn.proj.bias"), g, b.proj.bias.shape(), slice1(&b.proj.bias));
            push(ln("norm2.weight"), g, b.norm2.weight.shape(), slice1(&b.norm2.weight));
            push(ln("norm2.bias"), g, b.norm2.bias.shape(), slice1(&b.norm2.bias));
            push(ln("mlp.fc1.weight"), g, b.fc1.weight.shape(), slice2(&b.fc1.weight));
            push(ln("mlp.fc1.bias"), g, b.fc1.bias.shape(), slice1(&b.fc1.bias));
            push(ln("mlp.fc2.weight"), g, b.fc2.weight.shape(), slice2(&b.fc2.weight));
            push(ln("mlp.fc2.bias"), g, b.fc2.bias.shape(), slice1(&b.fc2.bias));
        }
        push(
            "norm.weight".into(),
            ParamGroup::FinalNorm,
            self.norm.weight.shape(),
            slice1(&self.norm.weight),
        );
        push(
            "norm.bias".into(),
            ParamGroup::FinalNorm,
            self.norm.bias.shape(),
            slice1(&self.norm.bias),
        );
        push(
            "head.weight".into(),
            ParamGroup::Head,
            self.head.weight.shape(),
            slice2(&self.head.weight),
        );
        push(
            "head.bias".into(),
            ParamGroup::Head,
            self.head.bias.shape(),
            slice1(&self.head.bias),
        );
        out
    }

    /// Mutable views in the same order as [`VitParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::with_capacity(7 + 12 * self.blocks.len());
        let mut push = |name: String, group, data| out.push(TensorMut { name, group, data });
        let pe = &mut self.patch_embed;
        push(
            "patch_embed.weight".into(),
            ParamGroup::Stem,
            slice2_mut(&mut pe.weight),
        );
        push("patch_embed.bias".into(), ParamGroup::Stem, slice1_mut(&mut pe.bias));
        push("cls_token".into(), ParamGroup::Stem, slice1_mut(&mut self.cls_token));
        push(
            "register_tokens".into(),
            ParamGroup::Stem,
            slice2_mut(&mut self.register_tokens),
        );
        push("pos_embed".into(), ParamGroup::Stem, slice2_mut(&mut self.pos_embed));
        for (i, b) in self.blocks.iter_mut().enumerate() {
            let g = ParamGroup::Block(i);
            let ln = |name: &str| format!("block.{i}.{name}");
            push(ln("norm1.weight"), g, slice1_mut(&mut b.norm1.weight));
            push(ln("norm1.bias"), g, slice1_mut(&mut b.norm1.bias));
            push(ln("attn.qkv.weight"), g, slice2_mut(&mut b.qkv.weight));
            push(ln("attn.qkv.bias"), g, slice1_mut(&mut b.qkv.bias));
            push(ln("attn.proj.weight"), g, slice2_mut(&mut b.proj.weight));
            push(ln("attn.proj.bias"), g, slice1_mut(&mut b.proj.bias));
            push(ln("norm2.weight"), g, slice1_mut(&mut b.norm2.weight));
            push(ln("norm2.bias"), g, slice1_mut(&mut b.norm2.bias));
            push(ln("mlp.fc1.weight"), g, slice2_mut(&mut b.fc1.weight));
            push(ln("mlp.fc1.bias"), g, slice1_mut(&mut b.fc1.bias));
            push(ln("mlp.fc2.weight"), g, slice2_mut(&mut b.fc2.weight));
            push(ln("mlp.fc2.bias"), g, slice1_mut(&mut b.fc2.bias));
        }
        push(
            "norm.weight".into(),
            ParamGroup::FinalNorm,
            slice1_mut(&mut self.norm.weight),
        );
        push(
            "norm.bias".into(),
            ParamGroup::FinalNorm,
            slice1_mut(&mut self.norm.bias),
        );
        push(
            "head.weight".into(),
            ParamGroup::Head,
            slice2_mut(&mut self.head.weight),
        );
        push("head.bias".into(), ParamGroup::Head, slice1_mut(&mut self.head.bias));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &VitParams) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (a, b) in dst.data.iter_mut().zip(src.data) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn zero_group(&mut self, group: ParamGroup) {
        for t in self.tensors_mut() {
            if t.group == group {
                t.data.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}
