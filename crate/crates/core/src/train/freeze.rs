use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::vit::{ParamGroup, VitParams};

/// Which encoder blocks are trainable. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockSet {
    All,
    Last,
    Indices(BTreeSet<usize>),
}

impl BlockSet {
    pub fn resolve(&self, depth: usize) -> BTreeSet<usize> {
        match self {
            BlockSet::All => (1..=depth).collect(),
            BlockSet::Last => [depth].into_iter().filter(|&d| d > 0).collect(),
            BlockSet::Indices(s) => s.clone(),
        }
    }
}

impl fmt::Display for BlockSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockSet::All => f.write_str("all"),
            BlockSet::Last => f.write_str("last"),
            BlockSet::Indices(s) => {
                let parts: Vec<String> = s.iter().map(|i| i.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl FromStr for BlockSet {
    type Err = String;

    /// `all`, `last`, `none`, or a list such as `10-12` / `3,4`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => return Ok(BlockSet::All),
            "last" => return Ok(BlockSet::Last),
            "none" | "" => return Ok(BlockSet::Indices(BTreeSet::new())),
            _ => {}
        }
        let mut set = BTreeSet::new();
        for part in s.split(',') {
            let part = part.trim();
            let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad block index `{t}`"));
            match part.split_once('-') {
                Some((a, b)) => set.extend(parse(a)?..=parse(b)?),
                None => {
                    set.insert(parse(part)?);
                }
            }
        }
        Ok(BlockSet::Indices(set))
    }
}

impl Serialize for BlockSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BlockSet::Indices(set) => set.serialize(s),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for BlockSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(BTreeSet<usize>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(s) => Ok(BlockSet::Indices(s)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreezePolicy {
    pub trainable_blocks: BlockSet,
    pub head_trainable: bool,
    /// Patch embedding, class/register tokens, positional embeddings and
    /// the final norm.
    pub embeddings_trainable: bool,
}

impl Default for FreezePolicy {
    fn default() -> Self {
        Self::last_block()
    }
}

impl FreezePolicy {
    pub fn last_block() -> Self {
        Self::blocks(BlockSet::Last)
    }

    pub fn blocks(trainable_blocks: BlockSet) -> Self {
        Self {
            trainable_blocks,
            head_trainable: true,
            embeddings_trainable: false,
        }
    }

    pub fn full() -> Self {
        Self {
            trainable_blocks: BlockSet::All,
            head_trainable: true,
            embeddings_trainable: true,
        }
    }

    pub fn resolve(&self, depth: usize) -> Result<ResolvedFreeze> {
        if !self.head_trainable {
            return Err(Error::Policy("the head must be trainable".into()));
        }
        let set = self.trainable_blocks.resolve(depth);
        if let Some(bad) = set.iter().find(|&&i| i == 0 || i > depth) {
            return Err(Error::Policy(format!("block index {bad} outside [1, {depth}]")));
        }
        Ok(ResolvedFreeze {
            blocks: (1..=depth).map(|i| set.contains(&i)).collect(),
            head: true,
            stem: self.embeddings_trainable,
        })
    }
}

/// A freeze policy bound to a model depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedFreeze {
    blocks: Vec<bool>,
    head: bool,
    stem: bool,
}

impl ResolvedFreeze {
    pub fn everything(depth: usize) -> Self {
        Self {
            blocks: vec![true; depth],
            head: true,
            stem: true,
        }
    }

    pub fn is_trainable(&self, group: ParamGroup) -> bool {
        match group {
            ParamGroup::Stem | ParamGroup::FinalNorm => self.stem,
            ParamGroup::Block(i) => self.blocks.get(i).copied().unwrap_or(false),
            ParamGroup::Head => self.head,
        }
    }
}

/// Disjoint trainable and frozen tensor names covering the whole model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub trainable: Vec<String>,
    pub frozen: Vec<String>,
}

pub fn apply_freeze(params: &VitParams, policy: &FreezePolicy) -> Result<Partition> {
    let resolved = policy.resolve(params.blocks.len())?;
    let (mut trainable, mut frozen) = (Vec::new(), Vec::new());
    for t in params.tensors() {
        if resolved.is_trainable(t.group) {
            trainable.push(t.name);
        } else {
            frozen.push(t.name);
        }
    }
    Ok(Partition { trainable, frozen })
}
