//! Linear-chain conditional random field tagger.
//!
//! Weights are laid out as one block of per-tag observation weights for each
//! feature, followed by the tag-transition matrix and the start and end
//! vectors. Features unseen at training time score zero.

mod features;
mod io;
mod lattice;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Sentence, Tag, Token};
use crate::dict::TagDictionary;
use crate::optim::{self, LbfgsConfig, LbfgsReport};

pub use features::{extract_features, FeatureTemplateConfig, Profile, BOS, EOS};
pub use lattice::{log_sum_exp, ChainScores};

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("no training data")]
    NoTrainingData,
    #[error("need at least 2 distinct tags, found {0}")]
    DegenerateTagset(usize),
    #[error("training sentence {0} is not fully tagged")]
    UntaggedSentence(usize),
    #[error("position {position} out of range for sentence of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("tag sequence length {tags} does not match sentence length {tokens}")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error("tag `{0}` is not in the model tagset")]
    UnknownTag(Tag),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model file line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfConfig {
    pub template: FeatureTemplateConfig,
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for CrfConfig {
    fn default() -> Self {
        CrfConfig {
            template: FeatureTemplateConfig::extended(),
            l2: 0.1,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

impl CrfConfig {
    pub fn basic() -> Self {
        CrfConfig {
            template: FeatureTemplateConfig::basic(),
            ..Default::default()
        }
    }

    pub fn extended() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    pub tagset: Vec<Tag>,
    pub feature_index: IndexMap<String, usize>,
    pub weights: Vec<f64>,
    pub template: FeatureTemplateConfig,
    pub l2: f64,
}

/// Feature ids per position, unknown features dropped.
pub type Encoded = Vec<Vec<usize>>;

impl CrfModel {
    /// Zero-weight model over a fixed tagset and feature index.
    pub fn zeros(
        tagset: Vec<Tag>,
        feature_index: IndexMap<String, usize>,
        template: FeatureTemplateConfig,
        l2: f64,
    ) -> Self {
        let k = tagset.len();
        let dim = feature_index.len() * k + k * k + 2 * k;
        CrfModel {
            tagset,
            feature_index,
            weights: vec![0.0; dim],
            template,
            l2,
        }
    }

    pub fn num_tags(&self) -> usize {
        self.tagset.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_index.len()
    }

    fn trans_offset(&self) -> usize {
        self.num_features() * self.num_tags()
    }

    fn start_offset(&self) -> usize {
        self.trans_offset() + self.num_tags() * self.num_tags()
    }

    fn end_offset(&self) -> usize {
        self.start_offset() + self.num_tags()
    }

    pub fn tag_index(&self, tag: &Tag) -> Option<usize> {
        self.tagset.iter().position(|t| t == tag)
    }

    pub fn encode(&self, sentence: &Sentence) -> Encoded {
        (0..sentence.len())
            .map(|i| {
                extract_features(sentence, i, &self.template)
                    .expect("position in range")
                    .iter()
                    .filter_map(|f| self.feature_index.get(f).copied())
                    .collect()
            })
            .collect()
    }

    fn unary(&self, enc: &Encoded) -> Vec<f64> {
        let k = self.num_tags();
        let mut u = vec![0.0; enc.len() * k];
        for (t, feats) in enc.iter().enumerate() {
            let row = &mut u[t * k..(t + 1) * k];
            for &f in feats {
                for (y, v) in row.iter_mut().enumerate() {
                    *v += self.weights[f * k + y];
                }
            }
        }
        u
    }

    fn with_chain<R>(&self, enc: &Encoded, body: impl FnOnce(&ChainScores<'_>) -> R) -> R {
        let unary = self.unary(enc);
        let chain = ChainScores {
            k: self.num_tags(),
            unary: &unary,
            trans: &self.weights[self.trans_offset()..self.start_offset()],
            start: &self.weights[self.start_offset()..self.end_offset()],
            end: &self.weights[self.end_offset()..],
        };
        body(&chain)
    }

    /// Unnormalized log score of a tag-index sequence.
    pub fn score_indices(&self, sentence: &Sentence, tags: &[usize]) -> Result<f64, CrfError> {
        if tags.len() != sentence.len() {
            return Err(CrfError::LengthMismatch {
                tokens: sentence.len(),
                tags: tags.len(),
            });
        }
        let enc = self.encode(sentence);
        Ok(self.with_chain(&enc, |c| c.score(tags)))
    }

    pub fn score_sequence(&self, sentence: &Sentence, tags: &[Tag]) -> Result<f64, CrfError> {
        let idx = tags
            .iter()
            .map(|t| self.tag_index(t).ok_or_else(|| CrfError::UnknownTag(t.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.score_indices(sentence, &idx)
    }

    /// Log of the sum of exp-scores over all tag sequences; 0 for an empty
    /// sentence.
    pub fn log_partition(&self, sentence: &Sentence) -> f64 {
        let enc = self.encode(sentence);
        self.with_chain(&enc, |c| c.log_partition())
    }

    /// Posterior tag marginals per position.
    pub fn marginals(&self, sentence: &Sentence) -> Vec<Vec<f64>> {
        let k = self.num_tags();
        let enc = self.encode(sentence);
        let (m, _) = self.with_chain(&enc, |c| c.marginals());
        m.chunks(k.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn decode_indices(&self, sentence: &Sentence) -> (Vec<usize>, f64) {
        let enc = self.encode(sentence);
        self.with_chain(&enc, |c| c.viterbi())
    }

    /// Exact argmax sequence and its score.
    pub fn decode(&self, sentence: &Sentence) -> (Vec<Tag>, f64) {
        let (path, score) = self.decode_indices(sentence);
        (
            path.into_iter().map(|y| self.tagset[y].clone()).collect(),
            score,
        )
    }

    /// Viterbi tags with the posterior marginal of each chosen tag.
    pub fn predict_with_confidence(&self, sentence: &Sentence) -> (Vec<Tag>, Vec<f64>) {
        let k = self.num_tags();
        let enc = self.encode(sentence);
        let (path, marg) = self.with_chain(&enc, |c| (c.viterbi().0, c.marginals().0));
        let conf = path
            .iter()
            .enumerate()
            .map(|(t, &y)| marg[t * k + y].clamp(0.0, 1.0))
            .collect();
        (
            path.into_iter().map(|y| self.tagset[y].clone()).collect(),
            conf,
        )
    }

    /// Regularized negative conditional log-likelihood and its gradient at
    /// the model's current weights.
    pub fn objective(&self, data: &[Sentence]) -> Result<(f64, Vec<f64>), CrfError> {
        let examples = self.prepare(data)?;
        Ok(self.objective_encoded(&self.weights, &examples))
    }

    fn prepare(&self, data: &[Sentence]) -> Result<Vec<(Encoded, Vec<usize>)>, CrfError> {
        data.iter()
            .enumerate()
            .map(|(i, s)| {
                let tags = s.tags.as_ref().ok_or(CrfError::UntaggedSentence(i))?;
                let idx = tags
                    .iter()
                    .map(|t| self.tag_index(t).ok_or_else(|| CrfError::UnknownTag(t.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((self.encode(s), idx))
            })
            .collect()
    }

    fn objective_encoded(&self, w: &[f64], examples: &[(Encoded, Vec<usize>)]) -> (f64, Vec<f64>) {
        // Fixed contiguous partitions with an in-order reduction keep the
        // result independent of the worker count.
        const PARTS: usize = 8;
        let chunk = examples.len().div_ceil(PARTS).max(1);
        let partials: Vec<(f64, Vec<f64>)> = examples
            .par_chunks(chunk)
            .map(|part| {
                let mut grad = vec![0.0; w.len()];
                let mut nll = 0.0;
                for (enc, tags) in part {
                    nll += self.accumulate(w, enc, tags, &mut grad);
                }
                (nll, grad)
            })
            .collect();
        let mut nll = 0.0;
        let mut grad = vec![0.0; w.len()];
        for (v, g) in partials {
            nll += v;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        nll += 0.5 * self.l2 * w.iter().map(|x| x * x).sum::<f64>();
        for (g, x) in grad.iter_mut().zip(w) {
            *g += self.l2 * x;
        }
        (nll, grad)
    }

    /// Adds the gradient of `-log p(tags | sentence)` into `grad`; returns
    /// the loss.
    fn accumulate(&self, w: &[f64], enc: &Encoded, tags: &[usize], grad: &mut [f64]) -> f64 {
        let k = self.num_tags();
        let n = enc.len();
        if n == 0 {
            return 0.0;
        }
        let (to, so, eo) = (self.trans_offset(), self.start_offset(), self.end_offset());
        let mut unary = vec![0.0; n * k];
        for (t, feats) in enc.iter().enumerate() {
            for &f in feats {
                for y in 0..k {
                    unary[t * k + y] += w[f * k + y];
                }
            }
        }
        let chain = ChainScores {
            k,
            unary: &unary,
            trans: &w[to..so],
            start: &w[so..eo],
            end: &w[eo..],
        };
        let alpha = chain.forward();
        let beta = chain.backward();
        let log_z = chain.log_partition_from(&alpha);
        let gold = chain.score(tags);

        // Expected counts minus empirical counts.
        for (t, feats) in enc.iter().enumerate() {
            for y in 0..k {
                let mut p = (alpha[t * k + y] + beta[t * k + y] - log_z).exp();
                if tags[t] == y {
                    p -= 1.0;
                }
                if p != 0.0 {
                    for &f in feats {
                        grad[f * k + y] += p;
                    }
                }
            }
        }
        for y in 0..k {
            grad[so + y] += (alpha[y] + beta[y] - log_z).exp();
            grad[eo + y] += (alpha[(n - 1) * k + y] + beta[(n - 1) * k + y] - log_z).exp();
        }
        grad[so + tags[0]] -= 1.0;
        grad[eo + tags[n - 1]] -= 1.0;
        for t in 1..n {
            for a in 0..k {
                for b in 0..k {
                    let p = (alpha[(t - 1) * k + a]
                        + chain.trans[a * k + b]
                        + unary[t * k + b]
                        + beta[t * k + b]
                        - log_z)
                        .exp();
                    grad[to + a * k + b] += p;
                }
            }
            grad[to + tags[t - 1] * k + tags[t]] -= 1.0;
        }
        log_z - gold
    }
}

/// One single-token synthetic sentence per `(type, tag)` dictionary entry.
pub fn supervision_sentences(dict: &TagDictionary) -> Vec<Sentence> {
    let mut out = Vec::with_capacity(dict.entry_count());
    for (word, entries) in dict.iter() {
        for e in entries {
            out.push(Sentence {
                tokens: vec![Token {
                    surface: word.to_string(),
                    norm: word.to_string(),
                }],
                tags: Some(vec![e.tag.clone()]),
                excluded: false,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CrfTrainReport {
    /// Regularized negative log-likelihood per optimizer iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
}

/// Trains by minimizing the L2-regularized negative conditional
/// log-likelihood. Dictionary entries in `supervision` are added as
/// one-token sentences.
pub fn train_crf(
    train: &[Sentence],
    supervision: Option<&TagDictionary>,
    cfg: &CrfConfig,
) -> Result<(CrfModel, CrfTrainReport), CrfError> {
    cfg.template.validate()?;
    if cfg.l2 < 0.0 {
        return Err(CrfError::InvalidConfig("l2 must be >= 0".into()));
    }
    let mut data: Vec<Sentence> = train.iter().filter(|s| !s.excluded).cloned().collect();
    if data.is_empty() {
        return Err(CrfError::NoTrainingData);
    }
    for (i, s) in data.iter().enumerate() {
        if !s.is_tagged() {
            return Err(CrfError::UntaggedSentence(i));
        }
    }
    if let Some(dict) = supervision {
        data.extend(supervision_sentences(dict));
    }

    let tagset: Vec<Tag> = data
        .iter()
        .flat_map(|s| s.tags.iter().flatten().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if tagset.len() < 2 {
        return Err(CrfError::DegenerateTagset(tagset.len()));
    }

    let mut feature_index = IndexMap::new();
    for s in &data {
        for i in 0..s.len() {
            for f in extract_features(s, i, &cfg.template)? {
                let next = feature_index.len();
                feature_index.entry(f).or_insert(next);
            }
        }
    }

    let mut model = CrfModel::zeros(tagset, feature_index, cfg.template, cfg.l2);
    let examples = model.prepare(&data)?;
    let mut w = model.weights.clone();
    let lcfg = LbfgsConfig {
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        ..Default::default()
    };
    let LbfgsReport {
        history,
        iterations,
        converged,
        final_grad_norm,
    } = optim::minimize(|x| model.objective_encoded(x, &examples), &mut w, &lcfg);
    model.weights = w;
    Ok((
        model,
        CrfTrainReport {
            objective: history,
            iterations,
            converged,
            final_grad_norm,
        },
    ))
}
