//! Traditional augmentation and the FAS-Aug operator family.

mod ops;
mod params;
mod policy;

pub use ops::{
    bn_halftone, color_distortion, color_diversity, hand_tremble, low_resolution, moire_pattern, motion_kernel,
    sfc_halftone, specular_reflection, AugmentationOp, Highlight, LabelEffect, OpKind, OpParams,
};
pub use params::{
    BnHalftoneRanges, ColorDistortionRanges, ColorDiversityRanges, FasAugParams, HandTrembleRanges,
    LowResolutionRanges, MoireRanges, SfcHalftoneRanges, SpecularRanges,
};
pub use policy::{
    apply_fas_aug, apply_fas_aug_traced, augment_sample, rotate, traditional_augment, AugPolicy, TraditionalAug,
};
