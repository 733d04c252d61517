use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Attack-type tag carried by every bonafide sample.
pub const LIVE_TAG: &str = "Live";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Live,
    Spoof,
}

impl Label {
    /// Class index used by the classifier (live = 0, spoof = 1).
    pub fn index(self) -> usize {
        match self {
            Label::Live => 0,
            Label::Spoof => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Live => "live",
            Label::Spoof => "spoof",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" | "bonafide" => Ok(Label::Live),
            "spoof" | "attack" => Ok(Label::Spoof),
            other => Err(format!("unknown label `{other}` (expected live or spoof)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" | "dev" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Face bounding box in source-pixel units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};{};{}", self.x, self.y, self.w, self.h)
    }
}

impl FromStr for BBox {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(';').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("bbox `{s}` must be x;y;w;h"));
        }
        let mut v = [0.0; 4];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse::<f64>()
                .map_err(|_| format!("bbox component `{part}` is not a number"))?;
        }
        Ok(BBox::new(v[0], v[1], v[2], v[3]))
    }
}

/// Checks that a label and its attack-type tag agree (live iff `Live`).
/// Empty tags are accepted and bucketed as unknown.
pub fn check_label_tag(label: Label, attack_type: &str) -> std::result::Result<(), String> {
    let is_live_tag = attack_type.eq_ignore_ascii_case(LIVE_TAG);
    match label {
        Label::Live if !attack_type.is_empty() && !is_live_tag => {
            Err(format!("live sample tagged with attack type `{attack_type}`"))
        }
        Label::Spoof if is_live_tag => Err("spoof sample tagged `Live`".into()),
        _ => Ok(()),
    }
}

/// One decoded, cropped face image with its metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: Image,
    pub label: Label,
    pub attack_type: String,
    pub source_id: String,
    pub bbox: Option<BBox>,
}

impl Sample {
    pub fn new(
        image: Image,
        label: Label,
        attack_type: impl Into<String>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        let attack_type = attack_type.into();
        check_label_tag(label, &attack_type).map_err(Error::Ingestion)?;
        Ok(Self {
            image,
            label,
            attack_type,
            source_id: source_id.into(),
            bbox: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_labels_and_splits() {
        assert_eq!("Live".parse::<Label>().unwrap(), Label::Live);
        assert_eq!(" spoof ".parse::<Label>().unwrap(), Label::Spoof);
        assert!("maybe".parse::<Label>().is_err());
        assert_eq!("validation".parse::<Split>().unwrap(), Split::Val);
    }

    #[test]
    fn bbox_round_trip() {
        let b: BBox = "400;100;600;600".parse().unwrap();
        assert_eq!(b, BBox::new(400.0, 100.0, 600.0, 600.0));
        assert_eq!(b.to_string().parse::<BBox>().unwrap(), b);
        assert!("1;2;3".parse::<BBox>().is_err());
    }

    #[test]
    fn label_tag_consistency() {
        assert!(check_label_tag(Label::Live, "Live").is_ok());
        assert!(check_label_tag(Label::Live, "").is_ok());
        assert!(check_label_tag(Label::Live, "Print").is_err());
        assert!(check_label_tag(Label::Spoof, "Live").is_err());
        assert!(check_label_tag(Label::Spoof, "Replay").is_ok());
    }
}
