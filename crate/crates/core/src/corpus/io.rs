//! Line-oriented narrative files.
//!
//! ```text
//! #title_griko: o kunto
//! #location: Calimera
//! leo_V ti_C vastò_V oju_N finu_Adj
//! #exclude: salentino
//! ...
//! ```
//!
//! `#key: value` lines carry metadata, `#exclude: salentino` marks the next
//! sentence as excluded, other `#` lines are comments. Every remaining
//! non-blank line is one sentence of space-separated tokens, optionally
//! written as `token_TAG` pairs. Parallel corpora pair `<id>.grk` with
//! `<id>.ita`; an optional `<id>.ita.tag` holds the Italian tags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{
    map_tagset, parse_tag, Corpus, CorpusError, Metadata, Narrative, NormalizeConfig, ParallelCorpus,
    ParallelNarrative, Sentence, Tag, TagsetMapping, Token,
};

/// How `token_TAG` suffixes on sentence lines are interpreted.
#[derive(Debug, Clone, Copy)]
pub enum TagMode<'a> {
    /// Lines are plain tokens.
    Untagged,
    /// Every token carries a universal-style tag.
    Tagged,
    /// Every token carries a source-scheme tag translated by the mapping.
    Mapped(&'a TagsetMapping),
    /// A line is tagged when every token ends in a parseable `_TAG`.
    Auto,
}

const EXCLUDE_KEY: &str = "exclude";

pub fn parse_narrative(
    id: &str,
    text: &str,
    mode: TagMode<'_>,
    norm: &NormalizeConfig,
) -> Result<Narrative, CorpusError> {
    let mut narrative = Narrative::new(id, Vec::new());
    let mut exclude_next = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CorpusError::Parse {
            path: id.to_string(),
            line: lineno + 1,
            msg,
        };
        if let Some(header) = line.strip_prefix('#') {
            if let Some((key, value)) = header.split_once(':') {
                let key = key.trim();
                let value = value.trim();
                if key == EXCLUDE_KEY {
                    exclude_next = true;
                } else if Metadata::KEYS.contains(&key) {
                    narrative.metadata.set(key, value.to_string());
                }
            }
            continue;
        }
        let mut sentence = parse_sentence_line(line, mode, norm).map_err(err)?;
        sentence.excluded = std::mem::take(&mut exclude_next);
        narrative.sentences.push(sentence);
    }
    Ok(narrative)
}

fn parse_sentence_line(
    line: &str,
    mode: TagMode<'_>,
    norm: &NormalizeConfig,
) -> Result<Sentence, String> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let untagged = |words: &[&str]| {
        Sentence::untagged(
            words
                .iter()
                .map(|w| Token::with_config(w, norm))
                .collect(),
        )
    };
    match mode {
        TagMode::Untagged => Ok(untagged(&words)),
        TagMode::Tagged => tagged_line(&words, norm, |t| parse_tag(t).map_err(|e| e.to_string())),
        TagMode::Mapped(m) => {
            tagged_line(&words, norm, |t| map_tagset(t, m).map_err(|e| e.to_string()))
        }
        TagMode::Auto => {
            match tagged_line(&words, norm, |t| parse_tag(t).map_err(|e| e.to_string())) {
                Ok(s) => Ok(s),
                Err(_) => Ok(untagged(&words)),
            }
        }
    }
}

fn tagged_line(
    words: &[&str],
    norm: &NormalizeConfig,
    parse: impl Fn(&str) -> Result<Tag, String>,
) -> Result<Sentence, String> {
    let mut tokens = Vec::with_capacity(words.len());
    let mut tags = Vec::with_capacity(words.len());
    for w in words {
        let (surface, tag) = w
            .rsplit_once('_')
            .filter(|(s, _)| !s.is_empty())
            .ok_or_else(|| format!("token `{w}` has no _TAG suffix"))?;
        tokens.push(Token::with_config(surface, norm));
        tags.push(parse(tag)?);
    }
    Sentence::tagged(tokens, tags).map_err(|e| e.to_string())
}

/// Serializes a narrative in the line format. Tags are written for tagged
/// sentences.
pub fn write_narrative(n: &Narrative) -> String {
    let mut out = String::new();
    for key in Metadata::KEYS {
        if let Some(v) = n.metadata.get(key) {
            let _ = writeln!(out, "#{key}: {v}");
        }
    }
    for s in &n.sentences {
        if s.excluded {
            let _ = writeln!(out, "#{EXCLUDE_KEY}: salentino");
        }
        let line = match &s.tags {
            Some(tags) => s
                .tokens
                .iter()
                .zip(tags)
                .map(|(t, g)| format!("{}_{}", t.surface, g))
                .collect::<Vec<_>>()
                .join(" "),
            None => s
                .tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_narrative_file(n: &Narrative, path: &Path) -> Result<(), CorpusError> {
    std::fs::write(path, write_narrative(n)).map_err(|e| CorpusError::io(path, e))
}

pub fn read_narrative_file(
    path: &Path,
    mode: TagMode<'_>,
    norm: &NormalizeConfig,
) -> Result<Narrative, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let id = narrative_id(path);
    parse_narrative(&id, &text, mode, norm).map_err(|e| match e {
        CorpusError::Parse { line, msg, .. } => CorpusError::Parse {
            path: path.display().to_string(),
            line,
            msg,
        },
        other => other,
    })
}

fn narrative_id(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.split('.').next().unwrap_or_default().to_string()
}

fn files_with_suffix(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CorpusError::io(dir, e))? {
        let path = entry.map_err(|e| CorpusError::io(dir, e))?.path();
        let is_match = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(suffix) && !n.starts_with('.'));
        if is_match && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.grk` file in `dir` as one narrative, ordered by file name.
pub fn load_corpus_dir(
    dir: &Path,
    mode: TagMode<'_>,
    norm: &NormalizeConfig,
) -> Result<Corpus, CorpusError> {
    let narratives = files_with_suffix(dir, ".grk")?
        .iter()
        .map(|p| read_narrative_file(p, mode, norm))
        .collect::<Result<Vec<_>, _>>()?;
    Corpus::new(narratives)
}

/// Loads `*.grk`/`*.ita` pairs from `dir`. Italian tags come from
/// `<id>.ita.tag` files when present, translated through `italian_mapping`
/// (or read as universal-style tags when no mapping is given).
pub fn load_parallel_dir(
    dir: &Path,
    griko_mode: TagMode<'_>,
    italian_mapping: Option<&TagsetMapping>,
    norm: &NormalizeConfig,
) -> Result<ParallelCorpus, CorpusError> {
    let mut pairs = Vec::new();
    for grk in files_with_suffix(dir, ".grk")? {
        let griko = read_narrative_file(&grk, griko_mode, norm)?;
        let ita_path = grk.with_extension("ita");
        let italian = read_narrative_file(&ita_path, TagMode::Untagged, norm)?;
        let mut pair = ParallelNarrative::new(griko, italian)?;
        let tag_path = dir.join(format!("{}.ita.tag", pair.id()));
        if tag_path.is_file() {
            let mode = match italian_mapping {
                Some(m) => TagMode::Mapped(m),
                None => TagMode::Tagged,
            };
            let tagged = read_narrative_file(&tag_path, mode, norm)?;
            let tags = tagged
                .sentences
                .into_iter()
                .map(|s| s.tags.unwrap_or_default())
                .collect();
            pair = pair.with_italian_tags(tags)?;
        }
        pairs.push(pair);
    }
    ParallelCorpus::new(pairs)
}

/// Writes each narrative to `dir/<id>.grk`, creating `dir` if needed.
pub fn write_corpus_dir(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    for n in &corpus.narratives {
        write_narrative_file(n, &dir.join(format!("{}.grk", n.id)))?;
    }
    Ok(())
}

/// Writes the layout read by [`load_parallel_dir`]: `<id>.grk`, `<id>.ita`
/// and, when Italian tags are present, `<id>.ita.tag`.
pub fn write_parallel_dir(corpus: &ParallelCorpus, dir: &Path) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    for p in &corpus.pairs {
        let id = p.id();
        write_narrative_file(&p.griko, &dir.join(format!("{id}.grk")))?;
        let mut plain = p.italian.clone();
        for s in &mut plain.sentences {
            s.tags = None;
        }
        write_narrative_file(&plain, &dir.join(format!("{id}.ita")))?;
        if let Some(tags) = &p.italian_tags {
            let mut tagged = plain;
            for (s, t) in tagged.sentences.iter_mut().zip(tags) {
                s.tags = Some(t.clone());
            }
            write_narrative_file(&tagged, &dir.join(format!("{id}.ita.tag")))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AtomicTag;

    const STORY: &str = "\
#title_griko: o kunto
#location: Calimera
# a free comment
leo_V ti_C vastò_V oju_N finu_Adj
#exclude: salentino
oju_N finu_Adj
stì_P+D chòra_N ._PUNCT
";

    #[test]
    fn parses_headers_tags_and_exclusions() {
        let n = parse_narrative("s1", STORY, TagMode::Tagged, &NormalizeConfig::default())
            .unwrap();
        assert_eq!(n.metadata.location.as_deref(), Some("Calimera"));
        assert_eq!(n.metadata.title_griko.as_deref(), Some("o kunto"));
        assert_eq!(n.sentences.len(), 3);
        assert!(!n.sentences[0].excluded);
        assert!(n.sentences[1].excluded);
        assert!(!n.sentences[2].excluded);
        assert_eq!(n.token_length(), 8);
        let tags = n.sentences[2].tags.as_ref().unwrap();
        assert_eq!(tags[0].parts(), &[AtomicTag::P, AtomicTag::D]);
    }

    #[test]
    fn round_trips_through_text() {
        let n = parse_narrative("s1", STORY, TagMode::Tagged, &NormalizeConfig::default())
            .unwrap();
        let text = write_narrative(&n);
        let back =
            parse_narrative("s1", &text, TagMode::Tagged, &NormalizeConfig::default()).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn tagged_mode_requires_tags() {
        let err = parse_narrative("x", "leo ti", TagMode::Tagged, &NormalizeConfig::default())
            .unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 1, .. }));
        let err = parse_narrative("x", "leo_Q", TagMode::Tagged, &NormalizeConfig::default())
            .unwrap_err();
        assert!(err.to_string().contains("Q"));
    }

    #[test]
    fn auto_mode_detects() {
        let n = parse_narrative(
            "x",
            "leo_V ti_C\nleo ti\n",
            TagMode::Auto,
            &NormalizeConfig::default(),
        )
        .unwrap();
        assert!(n.sentences[0].is_tagged());
        assert!(!n.sentences[1].is_tagged());
    }

    #[test]
    fn mapped_mode_translates() {
        let m = TagsetMapping::parse("VER:pres V\nNOM N\n", "m").unwrap();
        let n = parse_narrative(
            "x",
            "dico_VER:pres olio_NOM",
            TagMode::Mapped(&m),
            &NormalizeConfig::default(),
        )
        .unwrap();
        assert_eq!(
            n.sentences[0].tags.as_ref().unwrap(),
            &vec![Tag::atomic(AtomicTag::V), Tag::atomic(AtomicTag::N)]
        );
        let err = parse_narrative(
            "x",
            "dico_VER:impf",
            TagMode::Mapped(&m),
            &NormalizeConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("VER:impf"));
    }

    #[test]
    fn loads_parallel_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s1.grk"), "leo_V ti_C\nkalò_Adj\n").unwrap();
        std::fs::write(dir.path().join("s1.ita"), "dico che\nbuono\n").unwrap();
        std::fs::write(dir.path().join("s1.ita.tag"), "dico_VER che_CON\nbuono_ADJ\n").unwrap();
        std::fs::write(dir.path().join("s2.grk"), "ce\n").unwrap();
        std::fs::write(dir.path().join("s2.ita"), "e\n").unwrap();
        let m = TagsetMapping::parse("VER V\nCON C\nADJ Adj\n", "m").unwrap();
        let pc = load_parallel_dir(
            dir.path(),
            TagMode::Auto,
            Some(&m),
            &NormalizeConfig::default(),
        )
        .unwrap();
        assert_eq!(pc.pairs.len(), 2);
        assert_eq!(pc.pairs[0].id(), "s1");
        assert!(pc.pairs[0].italian_tags.is_some());
        assert!(pc.pairs[1].italian_tags.is_none());
        assert!(pc.validate().is_empty());
    }

    #[test]
    fn unequal_parallel_files_fail() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s1.grk"), "a\nb\n").unwrap();
        std::fs::write(dir.path().join("s1.ita"), "a\n").unwrap();
        assert!(matches!(
            load_parallel_dir(dir.path(), TagMode::Untagged, None, &NormalizeConfig::default()),
            Err(CorpusError::ParallelMismatch { .. })
        ));
    }
}
