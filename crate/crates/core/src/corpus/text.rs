//! Orthographic normalization and tokenization.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Token};

/// Characters split off as standalone punctuation tokens.
pub const PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?', '«', '»', '"', '(', ')'];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeConfig {
    /// Strip stress diacritics (`è` → `e`). Off by default: accented and
    /// unaccented spellings stay distinct types.
    #[serde(default)]
    pub fold_diacritics: bool,
}

/// Normalizes with the default configuration.
pub fn normalize(raw: &str) -> String {
    normalize_with(raw, &NormalizeConfig::default())
}

pub fn normalize_with(raw: &str, cfg: &NormalizeConfig) -> String {
    let mut out = String::with_capacity(raw.len() + 4);
    for ch in raw.chars() {
        match ch {
            '\u{2018}' | '\u{2019}' => out.push('\''),
            '\u{201C}' | '\u{201D}' => out.push('"'),
            _ => out.extend(ch.to_lowercase()),
        }
    }
    // Circumflex contractions become the accented-vowel + apostrophe spelling.
    let mut rewritten = String::with_capacity(out.len() + 4);
    for ch in out.chars() {
        match ch {
            'â' => rewritten.push_str("à'"),
            'ô' => rewritten.push_str("ò'"),
            'û' => rewritten.push_str("ù'"),
            _ => rewritten.push(ch),
        }
    }
    if cfg.fold_diacritics {
        rewritten.chars().map(fold_diacritic).collect()
    } else {
        rewritten
    }
}

fn fold_diacritic(ch: char) -> char {
    match ch {
        'à' | 'á' | 'ä' => 'a',
        'è' | 'é' | 'ë' | 'ê' => 'e',
        'ì' | 'í' | 'ï' | 'î' => 'i',
        'ò' | 'ó' | 'ö' => 'o',
        'ù' | 'ú' | 'ü' => 'u',
        _ => ch,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    /// Forms like `c'` whose apostrophe stays attached to the word.
    pub elisions: BTreeSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            elisions: std::iter::once("c'".to_string()).collect(),
        }
    }
}

impl TokenizerConfig {
    /// Reads an elision whitelist: one form per line, `#` starts a comment.
    pub fn from_whitelist_file(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        let elisions = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(normalize)
            .collect();
        Ok(TokenizerConfig { elisions })
    }
}

/// Tokenizes an already-normalized line with the default elision list.
pub fn tokenize(line: &str) -> Vec<Token> {
    tokenize_with(line, &TokenizerConfig::default())
}

pub fn tokenize_with(line: &str, cfg: &TokenizerConfig) -> Vec<Token> {
    split_pieces(line, cfg)
        .into_iter()
        .map(|s| Token::new(&s))
        .collect()
}

fn split_pieces(line: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let mut pieces = Vec::new();
    for chunk in line.split_whitespace() {
        let mut buf = String::new();
        for ch in chunk.chars() {
            if ch == '\'' {
                buf.push('\'');
                if cfg.elisions.contains(&buf) {
                    pieces.push(std::mem::take(&mut buf));
                } else {
                    buf.pop();
                    if !buf.is_empty() {
                        pieces.push(std::mem::take(&mut buf));
                    }
                    pieces.push("'".to_string());
                }
            } else if PUNCTUATION.contains(&ch) {
                if !buf.is_empty() {
                    pieces.push(std::mem::take(&mut buf));
                }
                pieces.push(ch.to_string());
            } else {
                buf.push(ch);
            }
        }
        if !buf.is_empty() {
            pieces.push(buf);
        }
    }
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(line: &str) -> Vec<String> {
        tokenize(line).into_iter().map(|t| t.surface).collect()
    }

    /// Character-at-a-time reference splitter: every punctuation mark and
    /// every apostrophe is its own piece unless it closes a whitelisted
    /// elision that starts a word piece.
    fn reference_split(line: &str, elisions: &[&str]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut cur = String::new();
        for ch in line.chars() {
            if ch.is_whitespace() {
                if !cur.is_empty() {
                    out.push(cur.clone());
                    cur.clear();
                }
                continue;
            }
            let is_sep = ch == '\'' || ".,;:!?«»\"()".contains(ch);
            if !is_sep {
                cur.push(ch);
                continue;
            }
            let candidate = format!("{cur}{ch}");
            if ch == '\'' && elisions.contains(&candidate.as_str()) {
                out.push(candidate);
                cur.clear();
                continue;
            }
            if !cur.is_empty() {
                out.push(cur.clone());
                cur.clear();
            }
            out.push(ch.to_string());
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("â"), "à'");
        assert_eq!(normalize("abc"), "abc");
        assert_eq!(normalize("’Ndè"), "'ndè");
        assert_eq!(normalize(&normalize("’Ndè")), "'ndè");
        assert_eq!(normalize("“Ô”"), "\"ò'\"");
        assert_eq!(normalize("Û"), "ù'");
    }

    #[test]
    fn stress_marks_kept_unless_folded() {
        assert_eq!(normalize("Ènna"), "ènna");
        let fold = NormalizeConfig {
            fold_diacritics: true,
        };
        assert_eq!(normalize_with("Ènna", &fold), "enna");
        assert_eq!(normalize_with("â", &fold), "a'");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(surfaces("c' ombra"), vec!["c'", "ombra"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("   ").is_empty());
        assert_eq!(surfaces("leo, ti!"), vec!["leo", ",", "ti", "!"]);
        assert_eq!(
            reference_split("leo, ti!", &["c'"]),
            vec!["leo", ",", "ti", "!"]
        );
    }

    #[test]
    fn apostrophes_split_except_elisions() {
        assert_eq!(surfaces("c'ombra"), vec!["c'", "ombra"]);
        assert_eq!(surfaces("t'òrtin"), vec!["t", "'", "òrtin"]);
        assert_eq!(surfaces("cì'"), vec!["cì", "'"]);
        assert_eq!(surfaces("«e'»"), vec!["«", "e", "'", "»"]);
        let cfg = TokenizerConfig {
            elisions: ["c'", "t'"].iter().map(|s| s.to_string()).collect(),
        };
        let toks: Vec<_> = tokenize_with("t'òrtin", &cfg)
            .into_iter()
            .map(|t| t.surface)
            .collect();
        assert_eq!(toks, vec!["t'", "òrtin"]);
    }

    #[test]
    fn whitelist_file_is_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("elisions.txt");
        std::fs::write(&path, "# known elisions\nc'\nT'  # comment\n\n").unwrap();
        let cfg = TokenizerConfig::from_whitelist_file(&path).unwrap();
        assert!(cfg.elisions.contains("c'"));
        assert!(cfg.elisions.contains("t'"));
        assert_eq!(cfg.elisions.len(), 2);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC*") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once.clone());
            let fold = NormalizeConfig { fold_diacritics: true };
            let f1 = normalize_with(&s, &fold);
            prop_assert_eq!(normalize_with(&f1, &fold), f1);
        }

        #[test]
        fn tokens_cover_input(s in "[a-zàèìòù' .,;:!?«»\"()\t]{0,40}") {
            let toks = tokenize(&s);
            prop_assert!(toks.iter().all(|t| !t.surface.is_empty()));
            let joined: String = toks.iter().map(|t| t.surface.as_str()).collect();
            let expected: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(joined, expected);
            let reference = reference_split(&s, &["c'"]);
            let got: Vec<String> = toks.into_iter().map(|t| t.surface).collect();
            prop_assert_eq!(got, reference);
        }
    }
}
