//! Text data model: tags, tokens, sentences, narratives and parallel
//! narratives, plus the on-disk corpus format and corpus statistics.

mod io;
mod stats;
mod tag;
mod text;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{
    load_corpus_dir, load_parallel_dir, parse_narrative, read_narrative_file, write_corpus_dir,
    write_narrative, write_narrative_file, write_parallel_dir, TagMode,
};
pub use stats::{corpus_stats, parallel_stats, SideStats, StatsReport};
pub use tag::{parse_tag, AtomicTag, Tag};
pub use text::{
    normalize, normalize_with, tokenize, tokenize_with, NormalizeConfig, TokenizerConfig,
    PUNCTUATION,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty tag")]
    EmptyTag,
    #[error("unknown atomic tag `{0}`")]
    UnknownAtomicTag(String),
    #[error("unmapped source tag `{0}`")]
    UnmappedTag(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("sentence has {tokens} tokens but {tags} tags")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error("duplicate narrative id `{0}`")]
    DuplicateNarrative(String),
    #[error("narrative `{id}`: {griko} Griko sentences vs {italian} Italian sentences")]
    ParallelMismatch {
        id: String,
        griko: usize,
        italian: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Normalized form; the word-type key everywhere downstream.
    pub norm: String,
}

impl Token {
    pub fn new(surface: &str) -> Self {
        Token::with_config(surface, &NormalizeConfig::default())
    }

    pub fn with_config(surface: &str, cfg: &NormalizeConfig) -> Self {
        Token {
            surface: surface.to_string(),
            norm: normalize_with(surface, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub tags: Option<Vec<Tag>>,
    /// Set for sentences entirely in another language (Salentino); such
    /// sentences never reach training or evaluation streams.
    #[serde(default)]
    pub excluded: bool,
}

impl Sentence {
    pub fn untagged(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            tags: None,
            excluded: false,
        }
    }

    pub fn tagged(tokens: Vec<Token>, tags: Vec<Tag>) -> Result<Self, CorpusError> {
        if tokens.len() != tags.len() {
            return Err(CorpusError::LengthMismatch {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        Ok(Sentence {
            tokens,
            tags: Some(tags),
            excluded: false,
        })
    }

    /// Builds a tagged sentence from `(surface, tag)` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, Tag)]) -> Self {
        Sentence {
            tokens: pairs.iter().map(|(w, _)| Token::new(w.as_ref())).collect(),
            tags: Some(pairs.iter().map(|(_, t)| t.clone()).collect()),
            excluded: false,
        }
    }

    /// Builds an untagged sentence from whitespace-separated surfaces.
    pub fn from_words(line: &str) -> Self {
        Sentence::untagged(line.split_whitespace().map(Token::new).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn norms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.norm.as_str())
    }

    pub fn is_tagged(&self) -> bool {
        self.tags.is_some()
    }

    /// Same tokens, tags replaced.
    pub fn with_tags(&self, tags: Vec<Tag>) -> Result<Self, CorpusError> {
        let mut s = Sentence::tagged(self.tokens.clone(), tags)?;
        s.excluded = self.excluded;
        Ok(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub source_url: Option<String>,
    pub title_griko: Option<String>,
    pub title_italian: Option<String>,
    pub location: Option<String>,
    pub date: Option<String>,
    pub narrator: Option<String>,
}

impl Metadata {
    pub const KEYS: [&'static str; 6] = [
        "source_url",
        "title_griko",
        "title_italian",
        "location",
        "date",
        "narrator",
    ];

    pub fn get(&self, key: &str) -> Option<&str> {
        match key {
            "source_url" => self.source_url.as_deref(),
            "title_griko" => self.title_griko.as_deref(),
            "title_italian" => self.title_italian.as_deref(),
            "location" => self.location.as_deref(),
            "date" => self.date.as_deref(),
            "narrator" => self.narrator.as_deref(),
            _ => None,
        }
    }

    /// Returns false for keys outside the known set.
    pub fn set(&mut self, key: &str, value: String) -> bool {
        let slot = match key {
            "source_url" => &mut self.source_url,
            "title_griko" => &mut self.title_griko,
            "title_italian" => &mut self.title_italian,
            "location" => &mut self.location,
            "date" => &mut self.date,
            "narrator" => &mut self.narrator,
            _ => return false,
        };
        *slot = Some(value);
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    pub id: String,
    pub sentences: Vec<Sentence>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl Narrative {
    pub fn new(id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Narrative {
            id: id.into(),
            sentences,
            metadata: Metadata::default(),
        }
    }

    /// Sentences that take part in training and evaluation.
    pub fn active_sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter().filter(|s| !s.excluded)
    }

    /// Number of tokens over non-excluded sentences.
    pub fn token_length(&self) -> usize {
        self.active_sentences().map(Sentence::len).sum()
    }

    pub fn is_fully_tagged(&self) -> bool {
        self.active_sentences().all(Sentence::is_tagged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelNarrative {
    pub griko: Narrative,
    pub italian: Narrative,
    /// Italian tags already mapped to the universal-style tagset, one
    /// sequence per Italian sentence.
    pub italian_tags: Option<Vec<Vec<Tag>>>,
}

impl ParallelNarrative {
    pub fn new(griko: Narrative, italian: Narrative) -> Result<Self, CorpusError> {
        if griko.sentences.len() != italian.sentences.len() {
            return Err(CorpusError::ParallelMismatch {
                id: griko.id.clone(),
                griko: griko.sentences.len(),
                italian: italian.sentences.len(),
            });
        }
        Ok(ParallelNarrative {
            griko,
            italian,
            italian_tags: None,
        })
    }

    pub fn with_italian_tags(mut self, tags: Vec<Vec<Tag>>) -> Result<Self, CorpusError> {
        if tags.len() != self.italian.sentences.len() {
            return Err(CorpusError::ParallelMismatch {
                id: self.griko.id.clone(),
                griko: self.italian.sentences.len(),
                italian: tags.len(),
            });
        }
        for (s, t) in self.italian.sentences.iter().zip(&tags) {
            if s.len() != t.len() {
                return Err(CorpusError::LengthMismatch {
                    tokens: s.len(),
                    tags: t.len(),
                });
            }
        }
        self.italian_tags = Some(tags);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.griko.id
    }

    /// Sentence pairs whose Griko side is not excluded.
    pub fn sentence_pairs(&self) -> impl Iterator<Item = (usize, &Sentence, &Sentence)> {
        self.griko
            .sentences
            .iter()
            .zip(&self.italian.sentences)
            .enumerate()
            .filter(|(_, (g, _))| !g.excluded)
            .map(|(i, (g, it))| (i, g, it))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub narratives: Vec<Narrative>,
}

impl Corpus {
    pub fn new(narratives: Vec<Narrative>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for n in &narratives {
            if !seen.insert(n.id.as_str()) {
                return Err(CorpusError::DuplicateNarrative(n.id.clone()));
            }
        }
        Ok(Corpus { narratives })
    }

    pub fn get(&self, id: &str) -> Option<&Narrative> {
        self.narratives.iter().find(|n| n.id == id)
    }

    /// Every non-excluded sentence, in narrative order.
    pub fn active_sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.narratives.iter().flat_map(Narrative::active_sentences)
    }

    /// Non-excluded, fully tagged sentences.
    pub fn training_sentences(&self) -> Vec<Sentence> {
        self.active_sentences()
            .filter(|s| s.is_tagged())
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.narratives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.narratives.is_empty()
    }

    /// Checks every structural invariant; an empty list means the corpus is
    /// valid.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let mut seen = HashSet::new();
        for n in &self.narratives {
            if !seen.insert(n.id.as_str()) {
                issues.push(format!("duplicate narrative id `{}`", n.id));
            }
            for (i, s) in n.sentences.iter().enumerate() {
                check_sentence(&n.id, i, s, &mut issues);
            }
        }
        issues
    }
}

fn check_sentence(id: &str, i: usize, s: &Sentence, issues: &mut Vec<String>) {
    if let Some(tags) = &s.tags {
        if tags.len() != s.tokens.len() {
            issues.push(format!(
                "{id}: sentence {}: {} tokens but {} tags",
                i + 1,
                s.tokens.len(),
                tags.len()
            ));
        }
    }
    for t in &s.tokens {
        if t.norm.is_empty() {
            issues.push(format!("{id}: sentence {}: empty token", i + 1));
        } else if normalize(&t.norm) != t.norm {
            issues.push(format!(
                "{id}: sentence {}: token `{}` is not normalized",
                i + 1,
                t.norm
            ));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub pairs: Vec<ParallelNarrative>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<ParallelNarrative>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert(p.id()) {
                return Err(CorpusError::DuplicateNarrative(p.id().to_string()));
            }
        }
        Ok(ParallelCorpus { pairs })
    }

    pub fn griko(&self) -> Corpus {
        Corpus {
            narratives: self.pairs.iter().map(|p| p.griko.clone()).collect(),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut issues = self.griko().validate();
        for p in &self.pairs {
            if p.griko.sentences.len() != p.italian.sentences.len() {
                issues.push(format!(
                    "{}: {} Griko vs {} Italian sentences",
                    p.id(),
                    p.griko.sentences.len(),
                    p.italian.sentences.len()
                ));
            }
            for (i, s) in p.italian.sentences.iter().enumerate() {
                check_sentence(&format!("{}.ita", p.id()), i, s, &mut issues);
            }
            if let Some(tags) = &p.italian_tags {
                for (i, (s, t)) in p.italian.sentences.iter().zip(tags).enumerate() {
                    if s.len() != t.len() {
                        issues.push(format!(
                            "{}.ita: sentence {}: {} tokens but {} tags",
                            p.id(),
                            i + 1,
                            s.len(),
                            t.len()
                        ));
                    }
                }
            }
        }
        issues
    }
}

/// Maps tags of an external annotation scheme onto [`Tag`]s. Lookups of
/// unlisted tags fail; there is no identity fallback.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagsetMapping {
    pub entries: BTreeMap<String, Tag>,
}

impl TagsetMapping {
    /// Parses the two-column `source_tag target_tag` format; `#` starts a
    /// comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CorpusError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let [source, target] = cols[..] else {
                return Err(CorpusError::Parse {
                    path: origin.to_string(),
                    line: lineno + 1,
                    msg: format!("expected two columns, found {}", cols.len()),
                });
            };
            let tag = parse_tag(target).map_err(|e| CorpusError::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            entries.insert(source.to_string(), tag);
        }
        Ok(TagsetMapping { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        TagsetMapping::parse(&text, &path.display().to_string())
    }

    /// Identity mapping over the universal-style labels and the given
    /// composites.
    pub fn universal(extra: &[Tag]) -> Self {
        let mut entries: BTreeMap<String, Tag> = AtomicTag::ALL
            .iter()
            .map(|t| (t.as_str().to_string(), Tag::atomic(*t)))
            .collect();
        for t in extra {
            entries.insert(t.to_string(), t.clone());
        }
        TagsetMapping { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn map_tagset(source_tag: &str, mapping: &TagsetMapping) -> Result<Tag, CorpusError> {
    mapping
        .entries
        .get(source_tag)
        .cloned()
        .ok_or_else(|| CorpusError::UnmappedTag(source_tag.to_string()))
}
