//! Type-level tag dictionaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_tag, CorpusError, Sentence, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Gold,
    Projected,
    Propagated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Gold => "gold",
            Provenance::Projected => "projected",
            Provenance::Propagated => "propagated",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gold" => Ok(Provenance::Gold),
            "projected" => Ok(Provenance::Projected),
            "propagated" => Ok(Provenance::Propagated),
            other => Err(format!("unknown provenance `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictEntry {
    pub tag: Tag,
    pub provenance: Provenance,
    pub votes: u32,
}

/// Word type (norm form) → admissible tags. Entry lists are never empty and
/// hold each tag at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagDictionary {
    entries: BTreeMap<String, Vec<DictEntry>>,
}

impl TagDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Gold entries from tagged sentences; votes count occurrences.
    pub fn from_tagged<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Self {
        let mut d = TagDictionary::new();
        for s in sentences {
            if s.excluded {
                continue;
            }
            let Some(tags) = &s.tags else { continue };
            for (tok, tag) in s.tokens.iter().zip(tags) {
                d.add_vote(&tok.norm, tag, Provenance::Gold);
            }
        }
        d
    }

    /// Inserts `(word, tag)` unless already present. Returns true when added.
    pub fn insert(&mut self, word: &str, tag: Tag, provenance: Provenance, votes: u32) -> bool {
        let list = self.entries.entry(word.to_string()).or_default();
        if list.iter().any(|e| e.tag == tag) {
            return false;
        }
        list.push(DictEntry {
            tag,
            provenance,
            votes,
        });
        true
    }

    fn add_vote(&mut self, word: &str, tag: &Tag, provenance: Provenance) {
        let list = self.entries.entry(word.to_string()).or_default();
        match list.iter_mut().find(|e| &e.tag == tag) {
            Some(e) => e.votes += 1,
            None => list.push(DictEntry {
                tag: tag.clone(),
                provenance,
                votes: 1,
            }),
        }
    }

    pub fn get(&self, word: &str) -> Option<&[DictEntry]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn allows(&self, word: &str, tag: &Tag) -> bool {
        self.get(word)
            .is_some_and(|es| es.iter().any(|e| &e.tag == tag))
    }

    pub fn tags<'a>(&'a self, word: &str) -> impl Iterator<Item = &'a Tag> + 'a {
        self.entries
            .get(word)
            .into_iter()
            .flat_map(|es| es.iter().map(|e| &e.tag))
    }

    /// Number of word types.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of `(type, tag)` pairs.
    pub fn entry_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[DictEntry])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Every tag mentioned anywhere, sorted.
    pub fn all_tags(&self) -> BTreeSet<Tag> {
        self.entries
            .values()
            .flatten()
            .map(|e| e.tag.clone())
            .collect()
    }

    /// Adds the other dictionary's entries; existing `(type, tag)` pairs
    /// keep their own provenance and votes.
    pub fn merge(&mut self, other: &TagDictionary) {
        for (word, list) in &other.entries {
            for e in list {
                self.insert(word, e.tag.clone(), e.provenance, e.votes);
            }
        }
    }

    pub fn union(&self, other: &TagDictionary) -> TagDictionary {
        let mut out = self.clone();
        out.merge(other);
        out
    }

    /// Keeps only entries of the given provenance.
    pub fn filter_provenance(&self, provenance: Provenance) -> TagDictionary {
        let mut out = TagDictionary::new();
        for (w, list) in &self.entries {
            for e in list.iter().filter(|e| e.provenance == provenance) {
                out.insert(w, e.tag.clone(), e.provenance, e.votes);
            }
        }
        out
    }

    /// `type<TAB>tag<TAB>provenance<TAB>votes`, one line per entry.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, list) in &self.entries {
            for e in list {
                out.push_str(&format!("{w}\t{}\t{}\t{}\n", e.tag, e.provenance, e.votes));
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut d = TagDictionary::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| CorpusError::Parse {
                path: "dictionary".into(),
                line: i + 1,
                msg,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            let [word, tag, prov, votes] = cols[..] else {
                return Err(err(format!("expected 4 columns, found {}", cols.len())));
            };
            let tag = parse_tag(tag).map_err(|e| err(e.to_string()))?;
            let prov = prov.parse().map_err(err)?;
            let votes = votes
                .parse()
                .map_err(|e: std::num::ParseIntError| err(e.to_string()))?;
            d.insert(word, tag, prov, votes);
        }
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::from_tsv(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        std::fs::write(path, self.to_tsv()).map_err(|e| CorpusError::io(path, e))
    }
}
