//! Sampling ranges of the FAS-Aug operators.
//!
//! The same structure is the operator parameter file: a TOML document with
//! one table per operator, every range written as `[low, high]`. Omitted keys
//! keep their defaults. The defaults are provisional and meant to be retuned.
//!
//! ```toml
//! [hand_tremble]
//! length = [3.0, 9.0]        # motion-blur kernel length, px
//!
//! [low_resolution]
//! factor = [2.0, 4.0]        # downscale factor
//!
//! [color_diversity]
//! gain = [0.8, 1.2]          # per-channel gain
//!
//! [color_distortion]
//! saturation = [0.5, 0.9]    # saturation scale
//! gamma = [0.8, 1.3]
//!
//! [sfc_halftone]
//! period = [4.0, 8.0]        # screen cell size, px
//! angles = [15.0, 75.0, 0.0] # screen angle per channel, degrees
//!
//! [bn_halftone]
//! levels = [2, 3]            # output levels per channel
//!
//! [specular_reflection]
//! peak = [0.3, 0.8]
//! sigma = [0.1, 0.35]        # fraction of image size
//! count = [1, 2]
//!
//! [moire_pattern]
//! frequency = [0.05, 0.25]   # cycles/px
//! detune = [0.005, 0.03]     # second grating offset, cycles/px
//! angle_offset = [0.0, 5.0]  # degrees between gratings
//! contrast = [0.05, 0.15]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandTrembleRanges {
    pub length: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowResolutionRanges {
    pub factor: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorDiversityRanges {
    pub gain: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorDistortionRanges {
    pub saturation: [f64; 2],
    pub gamma: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfcHalftoneRanges {
    pub period: [f64; 2],
    pub angles: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnHalftoneRanges {
    pub levels: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecularRanges {
    pub peak: [f64; 2],
    pub sigma: [f64; 2],
    pub count: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoireRanges {
    pub frequency: [f64; 2],
    pub detune: [f64; 2],
    pub angle_offset: [f64; 2],
    pub contrast: [f64; 2],
}

impl Default for HandTrembleRanges {
    fn default() -> Self {
        Self { length: [3.0, 9.0] }
    }
}

impl Default for LowResolutionRanges {
    fn default() -> Self {
        Self { factor: [2.0, 4.0] }
    }
}

impl Default for ColorDiversityRanges {
    fn default() -> Self {
        Self { gain: [0.8, 1.2] }
    }
}

impl Default for ColorDistortionRanges {
    fn default() -> Self {
        Self {
            saturation: [0.5, 0.9],
            gamma: [0.8, 1.3],
        }
    }
}

impl Default for SfcHalftoneRanges {
    fn default() -> Self {
        Self {
            period: [4.0, 8.0],
            angles: [15.0, 75.0, 0.0],
        }
    }
}

impl Default for BnHalftoneRanges {
    fn default() -> Self {
        Self { levels: [2, 3] }
    }
}

impl Default for SpecularRanges {
    fn default() -> Self {
        Self {
            peak: [0.3, 0.8],
            sigma: [0.1, 0.35],
            count: [1, 2],
        }
    }
}

impl Default for MoireRanges {
    fn default() -> Self {
        Self {
            frequency: [0.05, 0.25],
            detune: [0.005, 0.03],
            angle_offset: [0.0, 5.0],
            contrast: [0.05, 0.15],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FasAugParams {
    pub hand_tremble: HandTrembleRanges,
    pub low_resolution: LowResolutionRanges,
    pub color_diversity: ColorDiversityRanges,
    pub color_distortion: ColorDistortionRanges,
    pub sfc_halftone: SfcHalftoneRanges,
    pub bn_halftone: BnHalftoneRanges,
    pub specular_reflection: SpecularRanges,
    pub moire_pattern: MoireRanges,
}

fn check(field: &str, r: [f64; 2], min: f64, max: f64) -> Result<()> {
    if !(r[0] <= r[1] && r[0] >= min && r[1] <= max) {
        return Err(Error::config(
            format!("augment.operators.{field}"),
            format!("range [{}, {}] must be ordered and within [{min}, {max}]", r[0], r[1]),
        ));
    }
    Ok(())
}

impl FasAugParams {
    pub fn validate(&self) -> Result<()> {
        check("hand_tremble.length", self.hand_tremble.length, 1.0, 64.0)?;
        check("low_resolution.factor", self.low_resolution.factor, 1.0, 64.0)?;
        check("color_diversity.gain", self.color_diversity.gain, 0.0, 10.0)?;
        check(
            "color_distortion.saturation",
            self.color_distortion.saturation,
            0.0,
            1.0,
        )?;
        check("color_distortion.gamma", self.color_distortion.gamma, 0.05, 10.0)?;
        check("sfc_halftone.period", self.sfc_halftone.period, 2.0, 256.0)?;
        let levels = self.bn_halftone.levels;
        if !(levels[0] >= 2 && levels[0] <= levels[1] && levels[1] <= 256) {
            return Err(Error::config(
                "augment.operators.bn_halftone.levels",
                "must satisfy 2 <= low <= high <= 256",
            ));
        }
        check("specular_reflection.peak", self.specular_reflection.peak, 0.0, 1.0)?;
        check("specular_reflection.sigma", self.specular_reflection.sigma, 1e-3, 10.0)?;
        let count = self.specular_reflection.count;
        if !(count[0] >= 1 && count[0] <= count[1] && count[1] <= 16) {
            return Err(Error::config(
                "augment.operators.specular_reflection.count",
                "must satisfy 1 <= low <= high <= 16",
            ));
        }
        check("moire_pattern.frequency", self.moire_pattern.frequency, 0.0, 0.5)?;
        check("moire_pattern.detune", self.moire_pattern.detune, 0.0, 0.5)?;
        check("moire_pattern.angle_offset", self.moire_pattern.angle_offset, 0.0, 90.0)?;
        check("moire_pattern.contrast", self.moire_pattern.contrast, 0.0, 1.0)?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params = Self::from_toml_str(&text).map_err(|e| Error::toml(path, &text, e))?;
        params.validate()?;
        Ok(params)
    }
}
