use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CorpusError;

/// One of the twelve universal-style part-of-speech labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicTag {
    V,
    N,
    Adj,
    Adv,
    Pr,
    D,
    P,
    C,
    Prt,
    Num,
    Punct,
    X,
}

impl AtomicTag {
    pub const ALL: [AtomicTag; 12] = [
        AtomicTag::V,
        AtomicTag::N,
        AtomicTag::Adj,
        AtomicTag::Adv,
        AtomicTag::Pr,
        AtomicTag::D,
        AtomicTag::P,
        AtomicTag::C,
        AtomicTag::Prt,
        AtomicTag::Num,
        AtomicTag::Punct,
        AtomicTag::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AtomicTag::V => "V",
            AtomicTag::N => "N",
            AtomicTag::Adj => "Adj",
            AtomicTag::Adv => "Adv",
            AtomicTag::Pr => "Pr",
            AtomicTag::D => "D",
            AtomicTag::P => "P",
            AtomicTag::C => "C",
            AtomicTag::Prt => "Prt",
            AtomicTag::Num => "Num",
            AtomicTag::Punct => "PUNCT",
            AtomicTag::X => "X",
        }
    }

    /// Open-class labels: the ones an unseen word may plausibly carry.
    pub fn is_open_class(self) -> bool {
        matches!(
            self,
            AtomicTag::V | AtomicTag::N | AtomicTag::Adj | AtomicTag::Adv | AtomicTag::X
        )
    }
}

impl fmt::Display for AtomicTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AtomicTag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AtomicTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownAtomicTag(s.to_string()))
    }
}

/// A token label: one atomic tag, or a composite such as `P+D` for fused
/// words. Part order is significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(Vec<AtomicTag>);

impl Tag {
    pub fn new(parts: Vec<AtomicTag>) -> Result<Self, CorpusError> {
        if parts.is_empty() {
            return Err(CorpusError::EmptyTag);
        }
        Ok(Tag(parts))
    }

    pub fn atomic(tag: AtomicTag) -> Self {
        Tag(vec![tag])
    }

    pub fn parts(&self) -> &[AtomicTag] {
        &self.0
    }

    pub fn is_atomic(&self) -> bool {
        self.0.len() == 1
    }

    pub fn is_composite(&self) -> bool {
        self.0.len() > 1
    }
}

/// Parses the canonical `+`-joined form, e.g. `"P+D"` or `"Adv+Adv+Prt"`.
pub fn parse_tag(s: &str) -> Result<Tag, CorpusError> {
    if s.is_empty() {
        return Err(CorpusError::EmptyTag);
    }
    let parts = s
        .split('+')
        .map(AtomicTag::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    Tag::new(parts)
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, part) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(part.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for Tag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tag(s)
    }
}

impl From<AtomicTag> for Tag {
    fn from(tag: AtomicTag) -> Self {
        Tag::atomic(tag)
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_tag(&s).map_err(serde::de::Error::custom)
    }
}
