use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Corpus, Narrative, ParallelCorpus};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideStats {
    pub types: usize,
    pub tokens: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub stories: usize,
    pub sentences: usize,
    pub griko: SideStats,
    pub italian: Option<SideStats>,
}

fn side_stats<'a>(narratives: impl Iterator<Item = &'a Narrative>) -> (usize, SideStats) {
    let mut types = HashSet::new();
    let mut tokens = 0;
    let mut sentences = 0;
    for n in narratives {
        for s in n.active_sentences() {
            sentences += 1;
            tokens += s.len();
            types.extend(s.norms());
        }
    }
    (
        sentences,
        SideStats {
            types: types.len(),
            tokens,
        },
    )
}

/// Counts over non-excluded sentences; types are distinct norm forms.
pub fn corpus_stats(c: &Corpus) -> StatsReport {
    let (sentences, griko) = side_stats(c.narratives.iter());
    StatsReport {
        stories: c.narratives.len(),
        sentences,
        griko,
        italian: None,
    }
}

/// Like [`corpus_stats`], with Italian counts taken over the translations
/// of non-excluded Griko sentences.
pub fn parallel_stats(c: &ParallelCorpus) -> StatsReport {
    let (sentences, griko) = side_stats(c.pairs.iter().map(|p| &p.griko));
    let mut types = HashSet::new();
    let mut tokens = 0;
    for p in &c.pairs {
        for (_, _, it) in p.sentence_pairs() {
            tokens += it.len();
            types.extend(it.norms());
        }
    }
    StatsReport {
        stories: c.pairs.len(),
        sentences,
        griko,
        italian: Some(SideStats {
            types: types.len(),
            tokens,
        }),
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stories\t{}", self.stories)?;
        writeln!(f, "sentences\t{}", self.sentences)?;
        writeln!(f, "griko_types\t{}", self.griko.types)?;
        write!(f, "griko_tokens\t{}", self.griko.tokens)?;
        if let Some(it) = &self.italian {
            writeln!(f)?;
            writeln!(f, "italian_types\t{}", it.types)?;
            write!(f, "italian_tokens\t{}", it.tokens)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Narrative, ParallelNarrative, Sentence};

    #[test]
    fn empty_corpus_is_all_zero() {
        let r = corpus_stats(&Corpus::default());
        assert_eq!(r, StatsReport::default());
    }

    #[test]
    fn repeated_word_counts_once_as_type() {
        // "ce" repeats: 6 tokens, 5 types.
        let n = Narrative::new(
            "a",
            vec![
                Sentence::from_words("ce leo ti"),
                Sentence::from_words("Ce vastò oju"),
            ],
        );
        let r = corpus_stats(&Corpus::new(vec![n]).unwrap());
        assert_eq!(r.stories, 1);
        assert_eq!(r.sentences, 2);
        assert_eq!(r.griko.tokens, 6);
        assert_eq!(r.griko.types, 5);
    }

    #[test]
    fn excluded_sentences_contribute_nothing() {
        let mut sal = Sentence::from_words("oju finu bonu");
        sal.excluded = true;
        let g = Narrative::new("a", vec![Sentence::from_words("leo ti"), sal]);
        let i = Narrative::new(
            "a",
            vec![
                Sentence::from_words("dico che"),
                Sentence::from_words("olio fino buono"),
            ],
        );
        let pc = ParallelCorpus::new(vec![ParallelNarrative::new(g, i).unwrap()]).unwrap();
        let r = parallel_stats(&pc);
        assert_eq!(r.sentences, 1);
        assert_eq!(r.griko.tokens, 2);
        assert_eq!(r.italian.unwrap().tokens, 2);
    }
}
