//! First-order HMM with dictionary-constrained emissions, trained from
//! smoothed supervised counts and refined by EM on raw text.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::SemisupError;
use crate::corpus::{AtomicTag, Sentence, Tag};
use crate::dict::TagDictionary;

pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmConfig {
    pub em_iters: usize,
    /// Add-α smoothing of the supervised counts.
    pub smoothing: f64,
    /// Weight of the supervised model in the final interpolation.
    pub lambda: f64,
}

impl Default for HmmConfig {
    fn default() -> Self {
        HmmConfig {
            em_iters: 10,
            smoothing: 0.1,
            lambda: 0.7,
        }
    }
}

/// `start[k]`, `trans[i*K+j]` and `stop[i]` form the transition model
/// (each row `trans[i*K..] ∪ stop[i]` sums to 1); `emit[k*V+w]` is the
/// emission table over `vocab`, whose entry 0 is [`UNK`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmModel {
    pub tagset: Vec<Tag>,
    pub vocab: IndexMap<String, usize>,
    pub start: Vec<f64>,
    pub trans: Vec<f64>,
    pub stop: Vec<f64>,
    pub emit: Vec<f64>,
    pub dictionary: TagDictionary,
    /// Tags allowed for words outside the vocabulary.
    pub unk_tags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmmTrainReport {
    /// Log-likelihood of the raw text before EM and after each iteration.
    pub log_likelihood: Vec<f64>,
}

/// Open-class atomic tags plus every composite in the tagset; the whole
/// tagset if none of those occur.
pub fn unknown_word_tags(tagset: &[Tag]) -> Vec<bool> {
    let open: Vec<bool> = tagset
        .iter()
        .map(|t| {
            t.is_composite() || (t.is_atomic() && t.parts()[0].is_open_class())
        })
        .collect();
    if open.iter().any(|b| *b) {
        open
    } else {
        vec![true; tagset.len()]
    }
}

impl HmmModel {
    pub fn num_tags(&self) -> usize {
        self.tagset.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn word_id(&self, norm: &str) -> usize {
        self.vocab.get(norm).copied().unwrap_or(0)
    }

    pub fn emission(&self, k: usize, w: usize) -> f64 {
        self.emit[k * self.vocab.len() + w]
    }

    /// Whether tag `k` may emit vocabulary word `w`.
    pub fn allowed(&self, k: usize, w: usize) -> bool {
        if w == 0 {
            return self.unk_tags[k];
        }
        let (word, _) = self.vocab.get_index(w).expect("word id in range");
        match self.dictionary.get(word) {
            Some(entries) => entries.iter().any(|e| e.tag == self.tagset[k]),
            None => true,
        }
    }

    fn ids(&self, sentence: &Sentence) -> Vec<usize> {
        sentence.norms().map(|w| self.word_id(w)).collect()
    }

    /// Scaled forward pass. Returns normalized alphas, per-position scales
    /// and `log p(sentence)`.
    fn forward(&self, ids: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
        let k = self.num_tags();
        let mut alphas = Vec::with_capacity(ids.len());
        let mut scales = Vec::with_capacity(ids.len());
        let mut prev: Vec<f64> = (0..k).map(|j| self.start[j] * self.emission(j, ids[0])).collect();
        for (t, &w) in ids.iter().enumerate() {
            if t > 0 {
                let last: &Vec<f64> = alphas.last().expect("t > 0");
                prev = (0..k)
                    .map(|j| {
                        let s: f64 = (0..k).map(|i| last[i] * self.trans[i * k + j]).sum();
                        s * self.emission(j, w)
                    })
                    .collect();
            }
            let c: f64 = prev.iter().sum();
            let norm = if c > 0.0 { c } else { 1.0 };
            scales.push(c);
            alphas.push(prev.iter().map(|a| a / norm).collect());
        }
        let last = alphas.last().expect("non-empty");
        let end: f64 = (0..k).map(|i| last[i] * self.stop[i]).sum();
        let ll = scales.iter().map(|c| c.ln()).sum::<f64>() + end.ln();
        (alphas, scales, ll)
    }

    /// `log p(sentence)` summed over all tag paths, including the stop
    /// transition; 0 for an empty sentence.
    pub fn log_likelihood(&self, sentence: &Sentence) -> f64 {
        let ids = self.ids(sentence);
        if ids.is_empty() {
            return 0.0;
        }
        self.forward(&ids).2
    }

    /// Posterior tag marginals per position.
    pub fn marginals(&self, sentence: &Sentence) -> Vec<Vec<f64>> {
        let ids = self.ids(sentence);
        if ids.is_empty() {
            return Vec::new();
        }
        let (alphas, scales, _) = self.forward(&ids);
        let betas = self.backward(&ids, &scales);
        alphas
            .iter()
            .zip(&betas)
            .map(|(a, b)| {
                let m: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
                let z: f64 = m.iter().sum();
                m.iter().map(|v| if z > 0.0 { v / z } else { 0.0 }).collect()
            })
            .collect()
    }

    fn backward(&self, ids: &[usize], scales: &[f64]) -> Vec<Vec<f64>> {
        let k = self.num_tags();
        let n = ids.len();
        let mut betas = vec![vec![0.0; k]; n];
        betas[n - 1] = self.stop.clone();
        for t in (0..n - 1).rev() {
            let c = if scales[t + 1] > 0.0 { scales[t + 1] } else { 1.0 };
            for i in 0..k {
                betas[t][i] = (0..k)
                    .map(|j| self.trans[i * k + j] * self.emission(j, ids[t + 1]) * betas[t + 1][j])
                    .sum::<f64>()
                    / c;
            }
        }
        betas
    }

    /// Viterbi path; ties go to the earlier tag in tagset order.
    pub fn decode(&self, sentence: &Sentence) -> Vec<Tag> {
        let ids = self.ids(sentence);
        if ids.is_empty() {
            return Vec::new();
        }
        let k = self.num_tags();
        let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        let mut delta: Vec<f64> = (0..k)
            .map(|j| ln(self.start[j]) + ln(self.emission(j, ids[0])))
            .collect();
        let mut back = Vec::with_capacity(ids.len());
        for &w in &ids[1..] {
            let mut next = vec![f64::NEG_INFINITY; k];
            let mut bp = vec![0usize; k];
            for j in 0..k {
                let e = ln(self.emission(j, w));
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for i in 0..k {
                    let s = delta[i] + ln(self.trans[i * k + j]);
                    if s > best {
                        best = s;
                        arg = i;
                    }
                }
                next[j] = best + e;
                bp[j] = arg;
            }
            back.push(bp);
            delta = next;
        }
        let mut best = f64::NEG_INFINITY;
        let mut last = 0;
        for j in 0..k {
            let s = delta[j] + ln(self.stop[j]);
            if s > best {
                best = s;
                last = j;
            }
        }
        let mut path = vec![last];
        for bp in back.iter().rev() {
            let prev = bp[*path.last().expect("non-empty")];
            path.push(prev);
        }
        path.reverse();
        path.into_iter().map(|j| self.tagset[j].clone()).collect()
    }

    /// Viterbi tags with the posterior marginal of each chosen tag.
    pub fn predict_with_confidence(&self, sentence: &Sentence) -> (Vec<Tag>, Vec<f64>) {
        let tags = self.decode(sentence);
        let marg = self.marginals(sentence);
        let conf = tags
            .iter()
            .zip(&marg)
            .map(|(t, m)| {
                let k = self.tagset.iter().position(|x| x == t).expect("own tag");
                m[k]
            })
            .collect();
        (tags, conf)
    }

    fn accumulate(&self, ids: &[usize], acc: &mut Counts) -> f64 {
        let k = self.num_tags();
        let n = ids.len();
        let (alphas, scales, ll) = self.forward(ids);
        let betas = self.backward(ids, &scales);
        let z: f64 = (0..k).map(|i| alphas[n - 1][i] * self.stop[i]).sum();
        if !(z > 0.0) {
            return ll;
        }
        for t in 0..n {
            let g: Vec<f64> = (0..k).map(|i| alphas[t][i] * betas[t][i] / z).collect();
            for i in 0..k {
                acc.emit[i * self.vocab.len() + ids[t]] += g[i];
            }
            if t == 0 {
                for i in 0..k {
                    acc.start[i] += g[i];
                }
            }
            if t == n - 1 {
                for i in 0..k {
                    acc.stop[i] += g[i];
                }
            } else {
                let c = scales[t + 1];
                for i in 0..k {
                    for j in 0..k {
                        acc.trans[i * k + j] += alphas[t][i]
                            * self.trans[i * k + j]
                            * self.emission(j, ids[t + 1])
                            * betas[t + 1][j]
                            / (c * z);
                    }
                }
            }
        }
        ll
    }

    /// Replaces each distribution by its normalized counts; rows without
    /// counts are left as they are.
    fn set_from_counts(&mut self, c: &Counts) {
        let k = self.num_tags();
        let v = self.vocab.len();
        let total: f64 = c.start.iter().sum();
        if total > 0.0 {
            self.start = c.start.iter().map(|x| x / total).collect();
        }
        for i in 0..k {
            let row = &c.trans[i * k..(i + 1) * k];
            let total: f64 = row.iter().sum::<f64>() + c.stop[i];
            if total > 0.0 {
                for j in 0..k {
                    self.trans[i * k + j] = row[j] / total;
                }
                self.stop[i] = c.stop[i] / total;
            }
            let row = &c.emit[i * v..(i + 1) * v];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                for w in 0..v {
                    self.emit[i * v + w] = row[w] / total;
                }
            }
        }
    }

    fn interpolate(&mut self, other: &HmmModel, lambda: f64) {
        let mix = |a: &mut Vec<f64>, b: &[f64]| {
            for (x, y) in a.iter_mut().zip(b) {
                *x = lambda * *x + (1.0 - lambda) * y;
            }
        };
        mix(&mut self.start, &other.start);
        mix(&mut self.trans, &other.trans);
        mix(&mut self.stop, &other.stop);
        mix(&mut self.emit, &other.emit);
    }

    /// Largest deviation of any distribution's total from 1.
    pub fn normalization_error(&self) -> f64 {
        let k = self.num_tags();
        let v = self.vocab.len();
        let mut err = (self.start.iter().sum::<f64>() - 1.0).abs();
        for i in 0..k {
            let t: f64 = self.trans[i * k..(i + 1) * k].iter().sum::<f64>() + self.stop[i];
            err = err.max((t - 1.0).abs());
            let e: f64 = self.emit[i * v..(i + 1) * v].iter().sum();
            err = err.max((e - 1.0).abs());
        }
        err
    }
}

struct Counts {
    start: Vec<f64>,
    trans: Vec<f64>,
    stop: Vec<f64>,
    emit: Vec<f64>,
}

impl Counts {
    fn zeros(k: usize, v: usize) -> Self {
        Counts {
            start: vec![0.0; k],
            trans: vec![0.0; k * k],
            stop: vec![0.0; k],
            emit: vec![0.0; k * v],
        }
    }
}

/// Supervised model from add-α counts over the annotated sentences, with
/// emissions restricted to dictionary tags for dictionary words.
pub fn supervised_hmm(
    annotated: &[Sentence],
    mono: &[Sentence],
    dict: &TagDictionary,
    smoothing: f64,
) -> Result<HmmModel, SemisupError> {
    let annotated: Vec<&Sentence> = annotated
        .iter()
        .filter(|s| !s.excluded && s.is_tagged() && !s.is_empty())
        .collect();
    if annotated.is_empty() {
        return Err(SemisupError::NoAnnotatedData);
    }
    if dict.is_empty() {
        return Err(SemisupError::EmptyDictionary);
    }
    let mut dictionary = dict.clone();
    dictionary.merge(&TagDictionary::from_tagged(annotated.iter().copied()));

    let mut tagset: BTreeSet<Tag> = dictionary.all_tags();
    tagset.extend(AtomicTag::ALL.iter().filter(|a| a.is_open_class()).map(|a| Tag::atomic(*a)));
    let tagset: Vec<Tag> = tagset.into_iter().collect();
    let mut vocab: IndexMap<String, usize> = IndexMap::new();
    vocab.insert(UNK.to_string(), 0);
    let words = annotated
        .iter()
        .flat_map(|s| s.norms())
        .chain(mono.iter().filter(|s| !s.excluded).flat_map(|s| s.norms()))
        .map(str::to_string)
        .chain(dictionary.words().map(str::to_string));
    for w in words {
        let n = vocab.len();
        vocab.entry(w).or_insert(n);
    }
    let k = tagset.len();
    let v = vocab.len();
    let unk_tags = unknown_word_tags(&tagset);
    let mut model = HmmModel {
        tagset,
        vocab,
        start: vec![0.0; k],
        trans: vec![0.0; k * k],
        stop: vec![0.0; k],
        emit: vec![0.0; k * v],
        dictionary,
        unk_tags,
    };

    let mut c = Counts::zeros(k, v);
    c.start.fill(smoothing);
    c.trans.fill(smoothing);
    c.stop.fill(smoothing);
    for i in 0..k {
        for w in 0..v {
            if model.allowed(i, w) {
                c.emit[i * v + w] = smoothing;
            }
        }
    }
    let tag_id = |t: &Tag| model.tagset.binary_search(t).expect("tagset covers gold tags");
    for s in &annotated {
        let tags: Vec<usize> = s.tags.as_ref().expect("tagged").iter().map(tag_id).collect();
        c.start[tags[0]] += 1.0;
        c.stop[tags[tags.len() - 1]] += 1.0;
        for p in tags.windows(2) {
            c.trans[p[0] * k + p[1]] += 1.0;
        }
        for (w, &t) in s.norms().zip(&tags) {
            c.emit[t * v + model.vocab[w]] += 1.0;
        }
    }
    model.set_from_counts(&c);
    Ok(model)
}

/// Supervised start, then `em_iters` EM iterations over `mono`, then
/// `λ·supervised + (1−λ)·EM`. With zero iterations the supervised model is
/// returned as is.
pub fn train_semisup_hmm(
    mono: &[Sentence],
    annotated: &[Sentence],
    dict: &TagDictionary,
    cfg: &HmmConfig,
) -> Result<(HmmModel, HmmTrainReport), SemisupError> {
    if !(0.0..=1.0).contains(&cfg.lambda) || !(cfg.smoothing > 0.0) {
        return Err(SemisupError::InvalidConfig("need 0 ≤ λ ≤ 1 and smoothing > 0".into()));
    }
    let supervised = supervised_hmm(annotated, mono, dict, cfg.smoothing)?;
    let data: Vec<Vec<usize>> = mono
        .iter()
        .filter(|s| !s.excluded && !s.is_empty())
        .map(|s| supervised.ids(s))
        .collect();
    let mut report = HmmTrainReport {
        log_likelihood: Vec::new(),
    };
    if cfg.em_iters == 0 || data.is_empty() {
        return Ok((supervised, report));
    }
    let mut model = supervised.clone();
    let (k, v) = (model.num_tags(), model.vocab_size());
    for it in 0..=cfg.em_iters {
        let mut c = Counts::zeros(k, v);
        let ll: f64 = data.iter().map(|ids| model.accumulate(ids, &mut c)).sum();
        report.log_likelihood.push(ll);
        if it < cfg.em_iters {
            model.set_from_counts(&c);
        }
    }
    let mut out = supervised;
    out.interpolate(&model, cfg.lambda);
    Ok((out, report))
}
