//! Cross-lingual tag projection: IBM1 alignment over Griko–Italian sentence
//! pairs, a high-precision link filter, and majority-vote type dictionaries.

mod ibm1;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ParallelCorpus, Tag};
use crate::dict::{Provenance, TagDictionary};

pub use ibm1::{train_ibm1, AlignmentModel};

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("parallel corpus is empty")]
    EmptyCorpus,
    #[error("sentence pair {0} has no Italian tags")]
    MissingItalianTags(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("alignment line {line}: {msg}")]
    AlignmentFormat { line: usize, msg: String },
    #[error("{links} link blocks for {pairs} sentence pairs")]
    LinkCountMismatch { links: usize, pairs: usize },
}

/// Normalized tokens of one Griko sentence and its Italian translation.
#[derive(Debug, Clone, PartialEq)]
pub struct SentencePair {
    pub griko: Vec<String>,
    pub italian: Vec<String>,
    pub italian_tags: Option<Vec<Tag>>,
}

impl SentencePair {
    pub fn from_words(griko: &str, italian: &str) -> Self {
        SentencePair {
            griko: griko.split_whitespace().map(String::from).collect(),
            italian: italian.split_whitespace().map(String::from).collect(),
            italian_tags: None,
        }
    }

    pub fn with_tags(mut self, tags: Vec<Tag>) -> Self {
        self.italian_tags = Some(tags);
        self
    }
}

/// Non-excluded sentence pairs of the narratives accepted by `keep`, in
/// corpus order.
pub fn sentence_pairs(corpus: &ParallelCorpus, keep: impl Fn(&str) -> bool) -> Vec<SentencePair> {
    let mut out = Vec::new();
    for p in corpus.pairs.iter().filter(|p| keep(p.id())) {
        for (i, g, it) in p.sentence_pairs() {
            out.push(SentencePair {
                griko: g.norms().map(String::from).collect(),
                italian: it.norms().map(String::from).collect(),
                italian_tags: p.italian_tags.as_ref().map(|t| t[i].clone()),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbSource {
    /// Link posterior, `t(f|e)` normalized over the sentence's Italian tokens.
    #[default]
    Posterior,
    /// The lexical table value `t(f|e)`.
    Lexical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub griko_pos: usize,
    pub italian_pos: usize,
    pub prob: f64,
}

/// Best Italian counterpart per Griko token. Tokens whose NULL translation
/// probability beats every Italian candidate get no link; ties go to the
/// leftmost Italian position.
pub fn extract_links(model: &AlignmentModel, pair: &SentencePair, source: ProbSource) -> Vec<Link> {
    let mut out = Vec::new();
    if pair.italian.is_empty() {
        return out;
    }
    for (j, f) in pair.griko.iter().enumerate() {
        let probs: Vec<f64> = pair.italian.iter().map(|e| model.t(f, e)).collect();
        let mut best = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = i;
            }
        }
        let denom: f64 = probs.iter().sum();
        if denom <= 0.0 || model.t_null(f) > probs[best] {
            continue;
        }
        let prob = match source {
            ProbSource::Posterior => probs[best] / denom,
            ProbSource::Lexical => probs[best],
        };
        out.push(Link {
            griko_pos: j,
            italian_pos: best,
            prob,
        });
    }
    out
}

/// Link posteriors over the Italian tokens for one Griko position.
pub fn link_distribution(model: &AlignmentModel, pair: &SentencePair, griko_pos: usize) -> Vec<f64> {
    let f = &pair.griko[griko_pos];
    let probs: Vec<f64> = pair.italian.iter().map(|e| model.t(f, e)).collect();
    let denom: f64 = probs.iter().sum();
    probs.iter().map(|p| if denom > 0.0 { p / denom } else { 0.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFilter {
    pub p_exact: f64,
    pub p_high: f64,
    pub min_freq: usize,
}

impl Default for ProjectionFilter {
    fn default() -> Self {
        ProjectionFilter {
            p_exact: 1.0,
            p_high: 0.9,
            min_freq: 5,
        }
    }
}

impl ProjectionFilter {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        if !(0.0 < self.p_high && self.p_high < self.p_exact && self.p_exact <= 1.0) {
            return Err(ProjectionError::InvalidConfig(
                "need 0 < p_high < p_exact ≤ 1".into(),
            ));
        }
        Ok(())
    }

    /// Keeps a link when its probability reaches `p_exact`, or exceeds
    /// `p_high` with both token frequencies above `min_freq`.
    pub fn keep(&self, prob: f64, griko_freq: usize, italian_freq: usize) -> bool {
        prob >= self.p_exact
            || (prob > self.p_high && griko_freq > self.min_freq && italian_freq > self.min_freq)
    }
}

/// Token frequencies over a set of sentence pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frequencies {
    pub griko: HashMap<String, usize>,
    pub italian: HashMap<String, usize>,
}

impl Frequencies {
    pub fn from_pairs(pairs: &[SentencePair]) -> Self {
        let mut f = Frequencies::default();
        for p in pairs {
            for w in &p.griko {
                *f.griko.entry(w.clone()).or_default() += 1;
            }
            for w in &p.italian {
                *f.italian.entry(w.clone()).or_default() += 1;
            }
        }
        f
    }
}

/// Indices `(sentence, link)` of the links that pass the filter.
pub fn filter_links(
    pairs: &[SentencePair],
    links: &[Vec<Link>],
    freq: &Frequencies,
    filter: &ProjectionFilter,
) -> Vec<(usize, usize)> {
    let mut kept = Vec::new();
    for (s, (pair, ls)) in pairs.iter().zip(links).enumerate() {
        for (k, l) in ls.iter().enumerate() {
            let fg = freq.griko.get(&pair.griko[l.griko_pos]).copied().unwrap_or(0);
            let fi = freq.italian.get(&pair.italian[l.italian_pos]).copied().unwrap_or(0);
            if filter.keep(l.prob, fg, fi) {
                kept.push((s, k));
            }
        }
    }
    kept
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub dictionary: TagDictionary,
    /// Votes per Griko type from kept links, before majority resolution.
    pub votes: BTreeMap<String, BTreeMap<Tag, u32>>,
    pub kept_links: usize,
    /// Types dropped because their top tags tied.
    pub tied_types: BTreeSet<String>,
}

/// Each kept link votes the Italian token's tag onto the Griko type; every
/// type receives its unique majority tag, and types with a tie for first
/// place are dropped.
pub fn project_type_dictionary(
    pairs: &[SentencePair],
    links: &[Vec<Link>],
    filter: &ProjectionFilter,
) -> Result<Projection, ProjectionError> {
    filter.validate()?;
    if links.len() != pairs.len() {
        return Err(ProjectionError::LinkCountMismatch {
            links: links.len(),
            pairs: pairs.len(),
        });
    }
    let freq = Frequencies::from_pairs(pairs);
    let kept = filter_links(pairs, links, &freq, filter);
    let mut votes: BTreeMap<String, BTreeMap<Tag, u32>> = BTreeMap::new();
    for &(s, k) in &kept {
        let tags = pairs[s]
            .italian_tags
            .as_ref()
            .ok_or(ProjectionError::MissingItalianTags(s))?;
        let l = links[s][k];
        *votes
            .entry(pairs[s].griko[l.griko_pos].clone())
            .or_default()
            .entry(tags[l.italian_pos].clone())
            .or_default() += 1;
    }
    let mut dictionary = TagDictionary::new();
    let mut tied_types = BTreeSet::new();
    for (word, counts) in &votes {
        let top = counts.values().copied().max().unwrap_or(0);
        let mut winners = counts.iter().filter(|(_, &c)| c == top);
        let (tag, _) = winners.next().expect("non-empty votes");
        if winners.next().is_some() {
            tied_types.insert(word.clone());
            continue;
        }
        dictionary.insert(word, tag.clone(), Provenance::Projected, top);
    }
    Ok(Projection {
        dictionary,
        votes,
        kept_links: kept.len(),
        tied_types,
    })
}

/// Reads externally computed alignments: one `i-j p` triple per line, with
/// `i` the Griko and `j` the Italian position (0-based), and a blank line
/// after each sentence.
pub fn parse_alignments(text: &str) -> Result<Vec<Vec<Link>>, ProjectionError> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut open = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            out.push(std::mem::take(&mut current));
            open = false;
            continue;
        }
        open = true;
        let bad = |msg: &str| ProjectionError::AlignmentFormat {
            line: n + 1,
            msg: msg.to_string(),
        };
        let (ij, p) = line.split_once(char::is_whitespace).ok_or_else(|| bad("expected `i-j p`"))?;
        let (i, j) = ij.split_once('-').ok_or_else(|| bad("expected `i-j`"))?;
        let prob: f64 = p.trim().parse().map_err(|_| bad("bad probability"))?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(bad("probability outside [0, 1]"));
        }
        current.push(Link {
            griko_pos: i.parse().map_err(|_| bad("bad Griko index"))?,
            italian_pos: j.parse().map_err(|_| bad("bad Italian index"))?,
            prob,
        });
    }
    if open {
        out.push(current);
    }
    Ok(out)
}

/// Checks external links against sentence lengths.
pub fn validate_links(pairs: &[SentencePair], links: &[Vec<Link>]) -> Result<(), ProjectionError> {
    if links.len() != pairs.len() {
        return Err(ProjectionError::LinkCountMismatch {
            links: links.len(),
            pairs: pairs.len(),
        });
    }
    for (s, (p, ls)) in pairs.iter().zip(links).enumerate() {
        if let Some(l) = ls
            .iter()
            .find(|l| l.griko_pos >= p.griko.len() || l.italian_pos >= p.italian.len())
        {
            return Err(ProjectionError::AlignmentFormat {
                line: 0,
                msg: format!(
                    "sentence {s}: link {}-{} out of range",
                    l.griko_pos, l.italian_pos
                ),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// Only training narratives contribute (+CLP).
    TrainOnly,
    /// Test narratives and their translations contribute as well (+CLPA).
    Transductive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub iters: usize,
    pub filter: ProjectionFilter,
    pub prob_source: ProbSource,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            iters: 20,
            filter: ProjectionFilter::default(),
            prob_source: ProbSource::Posterior,
        }
    }
}

/// Aligns the pairs and projects a dictionary from them.
pub fn project(pairs: &[SentencePair], cfg: &ProjectionConfig) -> Result<Projection, ProjectionError> {
    cfg.filter.validate()?;
    let model = train_ibm1(pairs, cfg.iters)?;
    let links: Vec<Vec<Link>> = pairs
        .iter()
        .map(|p| extract_links(&model, p, cfg.prob_source))
        .collect();
    project_type_dictionary(pairs, &links, &cfg.filter)
}

/// Projects from the narratives of a parallel corpus: `train` narratives in
/// train-only mode, `train ∪ test` transductively.
pub fn project_corpus(
    corpus: &ParallelCorpus,
    train: &BTreeSet<String>,
    test: &BTreeSet<String>,
    mode: ProjectionMode,
    cfg: &ProjectionConfig,
) -> Result<Projection, ProjectionError> {
    let pairs = sentence_pairs(corpus, |id| {
        train.contains(id) || (mode == ProjectionMode::Transductive && test.contains(id))
    });
    if pairs.is_empty() {
        return Err(ProjectionError::EmptyCorpus);
    }
    project(&pairs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tag;

    fn t(s: &str) -> Tag {
        parse_tag(s).unwrap()
    }

    fn tagged(g: &str, i: &str, tags: &str) -> SentencePair {
        SentencePair::from_words(g, i).with_tags(tags.split(' ').map(t).collect())
    }

    #[test]
    fn one_to_one_link_is_certain() {
        let pairs = [SentencePair::from_words("a", "x")];
        let m = train_ibm1(&pairs, 3).unwrap();
        let links = extract_links(&m, &pairs[0], ProbSource::Posterior);
        assert_eq!(
            links,
            vec![Link {
                griko_pos: 0,
                italian_pos: 0,
                prob: 1.0
            }]
        );
    }

    #[test]
    fn link_distribution_sums_to_one() {
        let pairs = [
            SentencePair::from_words("a b c", "x y"),
            SentencePair::from_words("b c", "y z"),
            SentencePair::from_words("a", "x"),
        ];
        let m = train_ibm1(&pairs, 5).unwrap();
        for p in &pairs {
            for j in 0..p.griko.len() {
                let s: f64 = link_distribution(&m, p, j).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn footnote_rule() {
        let f = ProjectionFilter::default();
        assert!(f.keep(0.95, 6, 6));
        assert!(!f.keep(0.95, 6, 3));
        assert!(!f.keep(0.9, 100, 100));
        assert!(!f.keep(0.95, 5, 6));
        assert!(!f.keep(0.95, 6, 5));
        assert!(f.keep(1.0, 1, 1));
        assert!(!f.keep(0.5, 100, 100));
    }

    #[test]
    fn invalid_filter_rejected() {
        let f = ProjectionFilter {
            p_high: 1.0,
            ..Default::default()
        };
        assert!(f.validate().is_err());
    }

    #[test]
    fn majority_and_ties() {
        let pairs = vec![
            tagged("a", "x", "N"),
            tagged("a", "y", "V"),
            tagged("a", "x", "N"),
            tagged("b", "z", "N"),
            tagged("b", "w", "V"),
        ];
        let links: Vec<Vec<Link>> = (0..5)
            .map(|_| {
                vec![Link {
                    griko_pos: 0,
                    italian_pos: 0,
                    prob: 1.0,
                }]
            })
            .collect();
        let p = project_type_dictionary(&pairs, &links, &ProjectionFilter::default()).unwrap();
        assert_eq!(p.dictionary.tags("a").collect::<Vec<_>>(), vec![&t("N")]);
        assert_eq!(p.dictionary.get("a").unwrap()[0].votes, 2);
        assert_eq!(p.dictionary.get("a").unwrap()[0].provenance, Provenance::Projected);
        assert!(!p.dictionary.contains("b"));
        assert!(p.tied_types.contains("b"));
    }

    #[test]
    fn missing_italian_tags() {
        let pairs = vec![SentencePair::from_words("a", "x")];
        let links = vec![vec![Link {
            griko_pos: 0,
            italian_pos: 0,
            prob: 1.0,
        }]];
        assert!(matches!(
            project_type_dictionary(&pairs, &links, &ProjectionFilter::default()),
            Err(ProjectionError::MissingItalianTags(0))
        ));
    }

    #[test]
    fn alignment_file() {
        let text = "0-0 1.0\n1-2 0.93\n\n0-1 0.5\n";
        let ls = parse_alignments(text).unwrap();
        assert_eq!(ls.len(), 2);
        assert_eq!(ls[0][1].italian_pos, 2);
        assert_eq!(ls[1][0].prob, 0.5);
        assert_eq!(parse_alignments("0-0 1\n\n\n").unwrap().len(), 2);
        assert!(parse_alignments("0:0 1\n").is_err());
        assert!(parse_alignments("0-0 1.5\n").is_err());
        let pairs = [SentencePair::from_words("a b", "x y z"), SentencePair::from_words("a", "x y")];
        assert!(validate_links(&pairs, &ls).is_ok());
        assert!(validate_links(&pairs[..1], &ls).is_err());
    }

    #[test]
    fn null_preferred_token_gets_no_link() {
        // "da" appears without "x" often enough that NULL explains it best.
        let pairs = [
            SentencePair::from_words("a da", "x"),
            SentencePair::from_words("da", "y"),
            SentencePair::from_words("da", "z"),
            SentencePair::from_words("da b", "w"),
        ];
        let m = train_ibm1(&pairs, 20).unwrap();
        let links = extract_links(&m, &pairs[0], ProbSource::Posterior);
        assert!(m.t_null("da") > m.t("da", "x"));
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].griko_pos, 0);
    }
}
