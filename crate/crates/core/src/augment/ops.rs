//! The eight FAS-Aug operators. Each is a pure function of the image and a
//! concrete parameter record; randomness enters only through
//! [`AugmentationOp::sample`].

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::FasAugParams;
use crate::image::{Image, CHANNELS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    HandTremble,
    LowResolution,
    ColorDiversity,
    ColorDistortion,
    SfcHalftone,
    BnHalftone,
    SpecularReflection,
    MoirePattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelEffect {
    /// Photography noise: occurs on live and spoof captures alike.
    Preserve,
    /// Print or display artifact: the result is a spoof.
    ForceSpoof,
}

impl OpKind {
    /// Panel order (a)–(h).
    pub const ALL: [OpKind; 8] = [
        OpKind::HandTremble,
        OpKind::LowResolution,
        OpKind::ColorDiversity,
        OpKind::ColorDistortion,
        OpKind::SfcHalftone,
        OpKind::BnHalftone,
        OpKind::SpecularReflection,
        OpKind::MoirePattern,
    ];

    pub fn label_effect(self) -> LabelEffect {
        match self {
            OpKind::HandTremble | OpKind::LowResolution | OpKind::ColorDiversity => LabelEffect::Preserve,
            _ => LabelEffect::ForceSpoof,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::HandTremble => "hand_tremble",
            OpKind::LowResolution => "low_resolution",
            OpKind::ColorDiversity => "color_diversity",
            OpKind::ColorDistortion => "color_distortion",
            OpKind::SfcHalftone => "sfc_halftone",
            OpKind::BnHalftone => "bn_halftone",
            OpKind::SpecularReflection => "specular_reflection",
            OpKind::MoirePattern => "moire_pattern",
        }
    }

    /// Panel letter `a`..`h`.
    pub fn letter(self) -> char {
        let i = OpKind::ALL.iter().position(|&k| k == self).expect("listed");
        (b'a' + i as u8) as char
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Highlight {
    /// Center as a fraction of height/width.
    pub center: (f64, f64),
    /// Gaussian sigmas as fractions of height/width.
    pub sigma: (f64, f64),
    pub angle: f64,
    pub peak: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OpParams {
    HandTremble {
        length: f64,
        angle: f64,
    },
    LowResolution {
        factor: f64,
    },
    ColorDiversity {
        gains: [f64; 3],
    },
    ColorDistortion {
        saturation: f64,
        gamma: f64,
    },
    SfcHalftone {
        period: f64,
        angles: [f64; 3],
        phase: (f64, f64),
    },
    BnHalftone {
        levels: usize,
        serpentine: bool,
    },
    SpecularReflection {
        highlights: Vec<Highlight>,
    },
    MoirePattern {
        frequencies: (f64, f64),
        angles: (f64, f64),
        phases: (f64, f64),
        contrast: f64,
    },
}

/// One operator with concrete parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentationOp {
    pub kind: OpKind,
    pub params: OpParams,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..=r[1])
    }
}

fn uniform_int<R: Rng + ?Sized>(rng: &mut R, r: [usize; 2]) -> usize {
    rng.random_range(r[0]..=r[1])
}

impl AugmentationOp {
    pub fn label_effect(&self) -> LabelEffect {
        self.kind.label_effect()
    }

    /// Draws concrete parameters for `kind` from the configured ranges.
    pub fn sample<R: Rng + ?Sized>(kind: OpKind, ranges: &FasAugParams, rng: &mut R) -> Self {
        let params = match kind {
            OpKind::HandTremble => OpParams::HandTremble {
                length: uniform(rng, ranges.hand_tremble.length),
                angle: rng.random_range(0.0..PI),
            },
            OpKind::LowResolution => OpParams::LowResolution {
                factor: uniform(rng, ranges.low_resolution.factor),
            },
            OpKind::ColorDiversity => {
                let g = ranges.color_diversity.gain;
                OpParams::ColorDiversity {
                    gains: [uniform(rng, g), uniform(rng, g), uniform(rng, g)],
                }
            }
            OpKind::ColorDistortion => OpParams::ColorDistortion {
                saturation: uniform(rng, ranges.color_distortion.saturation),
                gamma: uniform(rng, ranges.color_distortion.gamma),
            },
            OpKind::SfcHalftone => {
                let period = uniform(rng, ranges.sfc_halftone.period);
                OpParams::SfcHalftone {
                    period,
                    angles: ranges.sfc_halftone.angles.map(f64::to_radians),
                    phase: (rng.random_range(0.0..period), rng.random_range(0.0..period)),
                }
            }
            OpKind::BnHalftone => OpParams::BnHalftone {
                levels: uniform_int(rng, ranges.bn_halftone.levels),
                serpentine: rng.random(),
            },
            OpKind::SpecularReflection => {
                let r = &ranges.specular_reflection;
                let n = uniform_int(rng, r.count);
                let highlights = (0..n)
                    .map(|_| Highlight {
                        center: (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)),
                        sigma: (uniform(rng, r.sigma), uniform(rng, r.sigma)),
                        angle: rng.random_range(0.0..PI),
                        peak: uniform(rng, r.peak),
                    })
                    .collect();
                OpParams::SpecularReflection { highlights }
            }
            OpKind::MoirePattern => {
                let r = &ranges.moire_pattern;
                let f1 = uniform(rng, r.frequency);
                let f2 = (f1 + uniform(rng, r.detune)).min(0.5);
                let a1 = rng.random_range(0.0..PI);
                let a2 = a1 + uniform(rng, r.angle_offset).to_radians();
                OpParams::MoirePattern {
                    frequencies: (f1, f2),
                    angles: (a1, a2),
                    phases: (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)),
                    contrast: uniform(rng, r.contrast),
                }
            }
        };
        Self { kind, params }
    }

    /// Applies the operator; output pixels are clipped to `[0, 1]`.
    pub fn apply(&self, image: &Image) -> Image {
        let out = match &self.params {
            OpParams::HandTremble { length, angle } => hand_tremble(image, *length, *angle),
            OpParams::LowResolution { factor } => low_resolution(image, *factor),
            OpParams::ColorDiversity { gains } => color_diversity(image, *gains),
            OpParams::ColorDistortion { saturation, gamma } => color_distortion(image, *saturation, *gamma),
            OpParams::SfcHalftone { period, angles, phase } => sfc_halftone(image, *period, *angles, *phase),
            OpParams::BnHalftone { levels, serpentine } => bn_halftone(image, *levels, *serpentine),
            OpParams::SpecularReflection { highlights } => specular_reflection(image, highlights),
            OpParams::MoirePattern {
                frequencies,
                angles,
                phases,
                contrast,
            } => moire_pattern(image, *frequencies, *angles, *phases, *contrast),
        };
        out.clamp_unit()
    }
}

/// Normalized linear motion-blur kernel of the given length and angle.
pub fn motion_kernel(length: f64, angle: f64) -> (usize, Vec<f64>) {
    let length = length.max(1.0);
    let mut size = length.ceil() as usize;
    if size.is_multiple_of(2) {
        size += 1;
    }
    let half = (size / 2) as f64;
    let mut k = vec![0.0; size * size];
    let steps = (4.0 * length).ceil() as usize + 1;
    let (dy, dx) = (angle.sin(), angle.cos());
    for s in 0..steps {
        let t = if steps == 1 {
            0.0
        } else {
            -(length - 1.0) / 2.0 + (length - 1.0) * s as f64 / (steps - 1) as f64
        };
        let (y, x) = (half + t * dy, half + t * dx);
        let (y0, x0) = (y.floor(), x.floor());
        let (fy, fx) = (y - y0, x - x0);
        for (oy, wy) in [(0.0, 1.0 - fy), (1.0, fy)] {
            for (ox, wx) in [(0.0, 1.0 - fx), (1.0, fx)] {
                let (yy, xx) = (y0 + oy, x0 + ox);
                if yy >= 0.0 && xx >= 0.0 && (yy as usize) < size && (xx as usize) < size {
                    k[yy as usize * size + xx as usize] += wy * wx;
                }
            }
        }
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    (size, k)
}

/// (a) Linear motion blur with edge replication.
pub fn hand_tremble(image: &Image, length: f64, angle: f64) -> Image {
    let (size, kernel) = motion_kernel(length, angle);
    let half = (size / 2) as isize;
    let (h, w) = (image.height() as isize, image.width() as isize);
    let taps: Vec<(isize, isize, f64)> = kernel
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| ((i / size) as isize - half, (i % size) as isize - half, v))
        .collect();
    Image::from_fn(image.height(), image.width(), |y, x, c| {
        let mut acc = 0.0;
        for &(ky, kx, wgt) in &taps {
            let yy = (y as isize + ky).clamp(0, h - 1) as usize;
            let xx = (x as isize + kx).clamp(0, w - 1) as usize;
            acc += wgt * image.get(yy, xx, c) as f64;
        }
        acc as f32
    })
}

/// (b) Bilinear downscale by `factor` and back.
pub fn low_resolution(image: &Image, factor: f64) -> Image {
    let factor = factor.max(1.0);
    let sh = ((image.height() as f64 / factor).round() as usize).max(1);
    let sw = ((image.width() as f64 / factor).round() as usize).max(1);
    image
        .resize_bilinear(sh, sw)
        .resize_bilinear(image.height(), image.width())
}

/// (c) Per-channel gain (white-balance shift).
pub fn color_diversity(image: &Image, gains: [f64; 3]) -> Image {
    let mut out = image.clone();
    for px in out.data_mut().chunks_exact_mut(CHANNELS) {
        for c in 0..CHANNELS {
            px[c] = (px[c] as f64 * gains[c]) as f32;
        }
    }
    out
}

/// (d) Print-like gamut compression: desaturate toward luma, then gamma.
pub fn color_distortion(image: &Image, saturation: f64, gamma: f64) -> Image {
    let mut out = image.clone();
    for px in out.data_mut().chunks_exact_mut(CHANNELS) {
        let (r, g, b) = (px[0] as f64, px[1] as f64, px[2] as f64);
        let luma = 0.299 * r + 0.587 * g + 0.114 * b;
        for p in px.iter_mut() {
            let v = (luma + saturation * (*p as f64 - luma)).clamp(0.0, 1.0);
            *p = v.powf(gamma) as f32;
        }
    }
    out
}

/// (e) Clustered-dot ordered dither with one rotated screen per channel.
pub fn sfc_halftone(image: &Image, period: f64, angles: [f64; 3], phase: (f64, f64)) -> Image {
    let trig: Vec<(f64, f64)> = angles.iter().map(|a| (a.sin(), a.cos())).collect();
    let omega = 2.0 * PI / period;
    Image::from_fn(image.height(), image.width(), |y, x, c| {
        let (s, co) = trig[c];
        let (yf, xf) = (y as f64 + 0.5 + phase.0, x as f64 + 0.5 + phase.1);
        let u = xf * co + yf * s;
        let v = -xf * s + yf * co;
        // 1 at dot centers, 0 between dots
        let spot = ((omega * u).cos() + (omega * v).cos()) / 4.0 + 0.5;
        if spot > image.get(y, x, c) as f64 {
            0.0
        } else {
            1.0
        }
    })
}

/// (f) Floyd–Steinberg error diffusion to `levels` values per channel.
pub fn bn_halftone(image: &Image, levels: usize, serpentine: bool) -> Image {
    let (h, w) = (image.height(), image.width());
    let steps = (levels.max(2) - 1) as f64;
    let mut out = image.clone();
    let mut buf = vec![0.0f64; h * w];
    for c in 0..CHANNELS {
        for y in 0..h {
            for x in 0..w {
                buf[y * w + x] = image.get(y, x, c) as f64;
            }
        }
        for y in 0..h {
            let reverse = serpentine && y % 2 == 1;
            for i in 0..w {
                let x = if reverse { w - 1 - i } else { i };
                let old = buf[y * w + x];
                let q = (old.clamp(0.0, 1.0) * steps).round() / steps;
                out.set(y, x, c, q as f32);
                let err = old - q;
                let fwd: isize = if reverse { -1 } else { 1 };
                let mut spread = |yy: usize, xx: isize, wgt: f64| {
                    if yy < h && xx >= 0 && (xx as usize) < w {
                        buf[yy * w + xx as usize] += err * wgt;
                    }
                };
                let xi = x as isize;
                spread(y, xi + fwd, 7.0 / 16.0);
                spread(y + 1, xi - fwd, 3.0 / 16.0);
                spread(y + 1, xi, 5.0 / 16.0);
                spread(y + 1, xi + fwd, 1.0 / 16.0);
            }
        }
    }
    out
}

/// (g) Additive elliptical Gaussian highlights.
pub fn specular_reflection(image: &Image, highlights: &[Highlight]) -> Image {
    let (h, w) = (image.height() as f64, image.width() as f64);
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..image.width() {
            let mut add = 0.0;
            for hl in highlights {
                let dy = (y as f64 + 0.5) / h - hl.center.0;
                let dx = (x as f64 + 0.5) / w - hl.center.1;
                let (s, c) = hl.angle.sin_cos();
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                add += hl.peak * (-0.5 * (u * u / (hl.sigma.1 * hl.sigma.1) + v * v / (hl.sigma.0 * hl.sigma.0))).exp();
            }
            for ch in 0..CHANNELS {
                out.set(y, x, ch, (image.get(y, x, ch) as f64 + add) as f32);
            }
        }
    }
    out
}

/// (h) Multiplicative product of two near-frequency gratings.
pub fn moire_pattern(
    image: &Image,
    frequencies: (f64, f64),
    angles: (f64, f64),
    phases: (f64, f64),
    contrast: f64,
) -> Image {
    let (s1, c1) = angles.0.sin_cos();
    let (s2, c2) = angles.1.sin_cos();
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..image.width() {
            let (yf, xf) = (y as f64, x as f64);
            let g1 = 0.5 * (1.0 + (2.0 * PI * frequencies.0 * (xf * c1 + yf * s1) + phases.0).cos());
            let g2 = 0.5 * (1.0 + (2.0 * PI * frequencies.1 * (xf * c2 + yf * s2) + phases.1).cos());
            let factor = 1.0 + contrast * (2.0 * g1 * g2 - 1.0);
            for ch in 0..CHANNELS {
                out.set(y, x, ch, (image.get(y, x, ch) as f64 * factor) as f32);
            }
        }
    }
    out
}
