//! Evaluation measures over non-excluded tokens.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Tag};
use crate::dict::TagDictionary;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    /// Fraction correct; 0 when there is nothing to score.
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn percent(&self) -> f64 {
        100.0 * self.ratio()
    }

    pub fn add(&mut self, other: Accuracy) {
        self.correct += other.correct;
        self.total += other.total;
    }
}

/// Compares predictions against gold tags. Excluded and untagged gold
/// sentences are skipped; `predicted[i]` belongs to `gold[i]`.
pub fn token_accuracy(gold: &[Sentence], predicted: &[Vec<Tag>]) -> Accuracy {
    let mut acc = Accuracy::default();
    for (s, pred) in gold.iter().zip(predicted) {
        if s.excluded {
            continue;
        }
        let Some(tags) = &s.tags else { continue };
        acc.total += tags.len();
        acc.correct += tags.iter().zip(pred).filter(|(g, p)| g == p).count();
    }
    acc
}

/// Position-wise agreement between two tag sequences of equal shape.
pub fn agreement(a: &[Vec<Tag>], b: &[Vec<Tag>]) -> Accuracy {
    let mut acc = Accuracy::default();
    for (x, y) in a.iter().zip(b) {
        acc.total += x.len().max(y.len());
        acc.correct += x.iter().zip(y).filter(|(p, q)| p == q).count();
    }
    acc
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TagScores {
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

pub fn per_tag_scores(gold: &[Sentence], predicted: &[Vec<Tag>]) -> BTreeMap<Tag, TagScores> {
    let mut tp: BTreeMap<Tag, usize> = BTreeMap::new();
    let mut pred_n: BTreeMap<Tag, usize> = BTreeMap::new();
    let mut gold_n: BTreeMap<Tag, usize> = BTreeMap::new();
    for (s, pred) in gold.iter().zip(predicted) {
        if s.excluded {
            continue;
        }
        let Some(tags) = &s.tags else { continue };
        for (g, p) in tags.iter().zip(pred) {
            *gold_n.entry(g.clone()).or_default() += 1;
            *pred_n.entry(p.clone()).or_default() += 1;
            if g == p {
                *tp.entry(g.clone()).or_default() += 1;
            }
        }
    }
    let all: HashSet<&Tag> = gold_n.keys().chain(pred_n.keys()).collect();
    all.into_iter()
        .map(|t| {
            let hit = tp.get(t).copied().unwrap_or(0) as f64;
            let p = pred_n.get(t).copied().unwrap_or(0);
            let g = gold_n.get(t).copied().unwrap_or(0);
            (
                t.clone(),
                TagScores {
                    precision: if p == 0 { 0.0 } else { hit / p as f64 },
                    recall: if g == 0 { 0.0 } else { hit / g as f64 },
                    support: g,
                },
            )
        })
        .collect()
}

/// How much of a test stream is covered by a training vocabulary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Percentage of test tokens whose type is known.
    pub token_pct: f64,
    /// Percentage of test types that are known.
    pub type_pct: f64,
}

impl Coverage {
    pub fn oov_rate(&self) -> f64 {
        100.0 - self.token_pct
    }
}

pub fn vocabulary<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> HashSet<String> {
    sentences
        .into_iter()
        .filter(|s| !s.excluded)
        .flat_map(|s| s.norms().map(str::to_string))
        .collect()
}

pub fn coverage(known: &HashSet<String>, test: &[Sentence]) -> Coverage {
    let mut tokens = 0usize;
    let mut hits = 0usize;
    let mut types: HashSet<&str> = HashSet::new();
    for s in test.iter().filter(|s| !s.excluded) {
        for w in s.norms() {
            tokens += 1;
            if known.contains(w) {
                hits += 1;
            }
            types.insert(w);
        }
    }
    let type_hits = types.iter().filter(|w| known.contains(**w)).count();
    let pct = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
    Coverage {
        token_pct: pct(hits, tokens),
        type_pct: pct(type_hits, types.len()),
    }
}

/// Coverage by a training corpus, optionally extended with dictionary types.
pub fn training_coverage(
    train: &[Sentence],
    dict: Option<&TagDictionary>,
    test: &[Sentence],
) -> Coverage {
    let mut known = vocabulary(train);
    if let Some(d) = dict {
        known.extend(d.words().map(str::to_string));
    }
    coverage(&known, test)
}

/// Share of dictionary types found in the test stream whose tag set
/// contains the test tokens' majority gold tag.
pub fn dictionary_precision(dict: &TagDictionary, test: &[Sentence]) -> Accuracy {
    let mut counts: BTreeMap<&str, BTreeMap<&Tag, usize>> = BTreeMap::new();
    for s in test.iter().filter(|s| !s.excluded) {
        let Some(tags) = &s.tags else { continue };
        for (w, t) in s.norms().zip(tags) {
            *counts.entry(w).or_default().entry(t).or_default() += 1;
        }
    }
    let mut acc = Accuracy::default();
    for (w, by_tag) in counts {
        if !dict.contains(w) {
            continue;
        }
        acc.total += 1;
        // Highest count wins; ties go to the smallest tag.
        let majority = by_tag
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(t, _)| *t);
        if majority.is_some_and(|m| dict.allows(w, m)) {
            acc.correct += 1;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for n < 2.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(Summary { mean, sd, min, max })
}
