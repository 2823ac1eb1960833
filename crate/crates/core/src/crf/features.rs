use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::CrfError;
use crate::corpus::Sentence;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Word identity and neighbours plus a few orthographic flags.
    Basic,
    /// Basic plus prefixes, suffixes, and word bigram/trigram context.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTemplateConfig {
    pub profile: Profile,
    pub max_affix_len: usize,
    pub use_ngrams: bool,
}

impl FeatureTemplateConfig {
    pub fn basic() -> Self {
        FeatureTemplateConfig {
            profile: Profile::Basic,
            max_affix_len: 4,
            use_ngrams: false,
        }
    }

    pub fn extended() -> Self {
        FeatureTemplateConfig {
            profile: Profile::Extended,
            max_affix_len: 4,
            use_ngrams: true,
        }
    }

    pub fn validate(&self) -> Result<(), CrfError> {
        if self.max_affix_len == 0 {
            return Err(CrfError::InvalidConfig("max_affix_len must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for FeatureTemplateConfig {
    fn default() -> Self {
        Self::extended()
    }
}

fn is_punctuation(w: &str) -> bool {
    !w.is_empty() && w.chars().all(|c| !c.is_alphanumeric())
}

/// Observation features for position `i`.
pub fn extract_features(
    sentence: &Sentence,
    i: usize,
    cfg: &FeatureTemplateConfig,
) -> Result<BTreeSet<String>, CrfError> {
    let n = sentence.len();
    if i >= n {
        return Err(CrfError::PositionOutOfRange { position: i, len: n });
    }
    let word = sentence.tokens[i].norm.as_str();
    let prev = if i == 0 {
        BOS
    } else {
        sentence.tokens[i - 1].norm.as_str()
    };
    let next = if i + 1 == n {
        EOS
    } else {
        sentence.tokens[i + 1].norm.as_str()
    };

    let mut out = BTreeSet::new();
    out.insert(format!("w={word}"));
    out.insert(format!("w-1={prev}"));
    out.insert(format!("w+1={next}"));
    if is_punctuation(word) {
        out.insert("punct".to_string());
    }
    if word.chars().any(|c| c.is_ascii_digit()) {
        out.insert("digit".to_string());
    }
    if word.contains('\'') {
        out.insert("apos".to_string());
    }

    if cfg.profile == Profile::Extended {
        let chars: Vec<char> = word.chars().collect();
        let max = cfg.max_affix_len.min(chars.len());
        for k in 1..=max {
            let pre: String = chars[..k].iter().collect();
            let suf: String = chars[chars.len() - k..].iter().collect();
            out.insert(format!("pre{k}={pre}"));
            out.insert(format!("suf{k}={suf}"));
        }
        if cfg.use_ngrams {
            out.insert(format!("bi-={prev}|{word}"));
            out.insert(format!("bi+={word}|{next}"));
            out.insert(format!("tri={prev}|{word}|{next}"));
        }
    }
    Ok(out)
}
