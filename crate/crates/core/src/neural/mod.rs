//! Bi-LSTM tagger: word embeddings, one bidirectional LSTM layer, and an
//! output head that maps the concatenated states through a small tag
//! embedding layer to tag scores.

pub mod autograd;

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Sentence, Tag};
use autograd::{Fault, Gradients, ParamStore, Tape, Tensor, Var};

pub const UNK: &str = "<unk>";

pub const EMB: usize = 0;
pub const FWD_W: usize = 1;
pub const FWD_U: usize = 2;
pub const FWD_B: usize = 3;
pub const BWD_W: usize = 4;
pub const BWD_U: usize = 5;
pub const BWD_B: usize = 6;
pub const HID_W: usize = 7;
pub const HID_B: usize = 8;
pub const OUT_W: usize = 9;
pub const OUT_B: usize = 10;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("empty sentence")]
    EmptySentence,
    #[error("need more than {dev_size} training sentences, found {found}")]
    InsufficientData { dev_size: usize, found: usize },
    #[error("training sentence {0} is not fully tagged")]
    UntaggedSentence(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralConfig {
    pub input_embed_dim: usize,
    pub hidden_dim: usize,
    pub tag_embed_dim: usize,
    pub lr: f64,
    pub max_epochs: usize,
    pub dev_size: usize,
    pub seed: u64,
    /// Chance of replacing a training-singleton word by UNK, per occurrence.
    pub unk_replace_prob: f64,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        NeuralConfig {
            input_embed_dim: 128,
            hidden_dim: 128,
            tag_embed_dim: 32,
            lr: 0.0002,
            max_epochs: 50,
            dev_size: 40,
            seed: 0,
            unk_replace_prob: 0.5,
        }
    }
}

impl NeuralConfig {
    fn validate(&self) -> Result<(), NeuralError> {
        if self.input_embed_dim == 0 || self.hidden_dim == 0 || self.tag_embed_dim == 0 {
            return Err(NeuralError::InvalidConfig("dimensions must be > 0".into()));
        }
        if !(self.lr > 0.0) {
            return Err(NeuralError::InvalidConfig("lr must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralModel {
    pub params: ParamStore,
    /// Word → embedding row; row 0 is UNK.
    pub vocab: IndexMap<String, usize>,
    pub tagset: Vec<Tag>,
    pub hidden_dim: usize,
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Tensor {
        rows,
        cols,
        data: (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect(),
    }
}

impl NeuralModel {
    /// Randomly initialized model: uniform(−0.1, 0.1) embeddings, Xavier
    /// weights, zero biases.
    pub fn init(
        vocab_words: impl IntoIterator<Item = String>,
        tagset: Vec<Tag>,
        cfg: &NeuralConfig,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut vocab = IndexMap::new();
        vocab.insert(UNK.to_string(), 0);
        for w in vocab_words {
            let next = vocab.len();
            vocab.entry(w).or_insert(next);
        }
        let (e, h, d, k) = (
            cfg.input_embed_dim,
            cfg.hidden_dim,
            cfg.tag_embed_dim,
            tagset.len(),
        );
        let emb = Tensor {
            rows: vocab.len(),
            cols: e,
            data: (0..vocab.len() * e).map(|_| rng.gen_range(-0.1..0.1)).collect(),
        };
        let mut tensors = vec![emb];
        for _ in 0..2 {
            tensors.push(xavier(rng, 4 * h, e));
            tensors.push(xavier(rng, 4 * h, h));
            tensors.push(Tensor::zeros(4 * h, 1));
        }
        tensors.push(xavier(rng, d, 2 * h));
        tensors.push(Tensor::zeros(d, 1));
        tensors.push(xavier(rng, k, d));
        tensors.push(Tensor::zeros(k, 1));
        NeuralModel {
            params: ParamStore { tensors },
            vocab,
            tagset,
            hidden_dim: h,
        }
    }

    pub fn param(&self, id: usize) -> &Tensor {
        &self.params.tensors[id]
    }

    pub fn word_index(&self, norm: &str) -> usize {
        self.vocab.get(norm).copied().unwrap_or(0)
    }

    fn lstm_pass(&self, tape: &mut Tape<'_>, inputs: &[Var], ids: [usize; 3], reverse: bool) -> Vec<Var> {
        let h = self.hidden_dim;
        let n = inputs.len();
        let mut out = vec![None; n];
        let mut hs = tape.zeros(h);
        let mut cs = tape.zeros(h);
        let order: Vec<usize> = if reverse {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        for t in order {
            let wx = tape.matvec(ids[0], inputs[t]);
            let uh = tape.matvec(ids[1], hs);
            let z = tape.add(wx, uh);
            let z = tape.add_param(z, ids[2]);
            let zi = tape.slice(z, 0, h);
            let zf = tape.slice(z, h, h);
            let zg = tape.slice(z, 2 * h, h);
            let zo = tape.slice(z, 3 * h, h);
            let i = tape.sigmoid(zi);
            let f = tape.sigmoid(zf);
            let g = tape.tanh(zg);
            let o = tape.sigmoid(zo);
            let fc = tape.mul(f, cs);
            let ig = tape.mul(i, g);
            cs = tape.add(fc, ig);
            let tc = tape.tanh(cs);
            hs = tape.mul(o, tc);
            out[t] = Some(hs);
        }
        out.into_iter().map(|v| v.expect("every step visited")).collect()
    }

    /// Records the forward pass; returns per-position log-probability vars.
    fn build(&self, tape: &mut Tape<'_>, word_ids: &[usize]) -> Vec<Var> {
        let inputs: Vec<Var> = word_ids.iter().map(|&w| tape.lookup(EMB, w)).collect();
        let fwd = self.lstm_pass(tape, &inputs, [FWD_W, FWD_U, FWD_B], false);
        let bwd = self.lstm_pass(tape, &inputs, [BWD_W, BWD_U, BWD_B], true);
        fwd.into_iter()
            .zip(bwd)
            .map(|(f, b)| {
                let hcat = tape.concat(f, b);
                let z = tape.matvec(HID_W, hcat);
                let z = tape.add_param(z, HID_B);
                let e = tape.tanh(z);
                let s = tape.matvec(OUT_W, e);
                let s = tape.add_param(s, OUT_B);
                tape.log_softmax(s)
            })
            .collect()
    }

    fn ids(&self, sentence: &Sentence) -> Vec<usize> {
        sentence.norms().map(|w| self.word_index(w)).collect()
    }

    /// Per-token log-probabilities over the tagset.
    pub fn forward(&self, sentence: &Sentence) -> Result<Vec<Vec<f64>>, NeuralError> {
        if sentence.is_empty() {
            return Err(NeuralError::EmptySentence);
        }
        let mut tape = Tape::new(&self.params);
        let outs = self.build(&mut tape, &self.ids(sentence));
        Ok(outs.iter().map(|v| tape.value(*v).to_vec()).collect())
    }

    /// Argmax tags with their probabilities. Empty input gives empty output.
    pub fn predict(&self, sentence: &Sentence) -> (Vec<Tag>, Vec<f64>) {
        let Ok(lp) = self.forward(sentence) else {
            return (Vec::new(), Vec::new());
        };
        lp.iter()
            .map(|row| {
                let mut best = 0;
                for (k, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = k;
                    }
                }
                (self.tagset[best].clone(), row[best].exp())
            })
            .unzip()
    }

    fn tag_ids(&self, sentence: &Sentence) -> Option<Vec<usize>> {
        sentence
            .tags
            .as_ref()?
            .iter()
            .map(|t| self.tagset.iter().position(|x| x == t))
            .collect()
    }

    /// Summed token negative log-likelihood of one sentence given explicit
    /// word ids; gradients are accumulated when a buffer is supplied.
    fn sentence_loss(
        &self,
        word_ids: &[usize],
        tags: &[usize],
        grads: Option<&mut Gradients>,
        fault: Option<Fault>,
    ) -> f64 {
        let mut tape = Tape::with_fault(&self.params, fault);
        let outs = self.build(&mut tape, word_ids);
        let terms: Vec<Var> = outs
            .iter()
            .zip(tags)
            .map(|(lp, &y)| tape.neg_pick(*lp, y))
            .collect();
        let loss = tape.sum(&terms);
        if let Some(g) = grads {
            tape.backward(loss, g);
        }
        tape.scalar(loss)
    }

    /// Summed token NLL over tagged sentences (tags outside the tagset are
    /// skipped).
    pub fn loss(&self, batch: &[Sentence]) -> f64 {
        batch
            .iter()
            .filter_map(|s| Some((self.ids(s), self.tag_ids(s)?)))
            .filter(|(w, _)| !w.is_empty())
            .map(|(w, t)| self.sentence_loss(&w, &t, None, None))
            .sum()
    }

    pub fn loss_and_gradients(&self, batch: &[Sentence], fault: Option<Fault>) -> (f64, Gradients) {
        let mut grads = self.params.zero_grads();
        let mut total = 0.0;
        for s in batch {
            let Some(tags) = self.tag_ids(s) else { continue };
            let ids = self.ids(s);
            if ids.is_empty() {
                continue;
            }
            total += self.sentence_loss(&ids, &tags, Some(&mut grads), fault);
        }
        (total, grads)
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        let ckpt = Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            model: self.clone(),
        };
        let text = serde_json::to_string(&ckpt).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint =
            serde_json::from_str(&text).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(NeuralError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        Ok(ckpt.model)
    }
}

const CHECKPOINT_FORMAT: &str = "glossa-bilstm";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    model: NeuralModel,
}

/// Adam with per-row lazy updates for the embedding table: only rows that
/// received gradient are stepped.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    fn new(params: &ParamStore, lr: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, params: &mut ParamStore, grads: &Gradients) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (ti, tensor) in params.tensors.iter_mut().enumerate() {
            let g = &grads.tensors[ti];
            let ranges: Vec<(usize, usize)> = if ti == EMB {
                let mut rows = grads.touched_rows[ti].clone();
                rows.sort_unstable();
                rows.dedup();
                rows.into_iter()
                    .map(|r| (r * tensor.cols, (r + 1) * tensor.cols))
                    .collect()
            } else {
                vec![(0, tensor.data.len())]
            };
            for (lo, hi) in ranges {
                for j in lo..hi {
                    let m = &mut self.m[ti][j];
                    let v = &mut self.v[ti][j];
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g[j];
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g[j] * g[j];
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    tensor.data[j] -= self.lr * mh / (vh.sqrt() + self.eps);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralTrainReport {
    /// Mean token NLL on the training portion after each epoch.
    pub train_loss: Vec<f64>,
    /// Dev accuracy (fraction) after each epoch; empty without a dev set.
    pub dev_accuracy: Vec<f64>,
    /// 1-based epoch of the returned snapshot.
    pub best_epoch: usize,
    pub dev_ids: Vec<usize>,
}

fn accuracy(model: &NeuralModel, data: &[Sentence]) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for s in data {
        let Some(gold) = &s.tags else { continue };
        let (pred, _) = model.predict(s);
        total += gold.len();
        correct += gold.iter().zip(&pred).filter(|(a, b)| a == b).count();
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// Trains with Adam, one update per sentence. A seeded random sample of
/// `dev_size` sentences is held out and the epoch snapshot with the best dev
/// accuracy is returned (earliest on ties); with `dev_size == 0` the last
/// epoch is returned.
pub fn train_neural(
    train: &[Sentence],
    cfg: &NeuralConfig,
) -> Result<(NeuralModel, NeuralTrainReport), NeuralError> {
    cfg.validate()?;
    let data: Vec<&Sentence> = train.iter().filter(|s| !s.excluded && !s.is_empty()).collect();
    for (i, s) in data.iter().enumerate() {
        if !s.is_tagged() {
            return Err(NeuralError::UntaggedSentence(i));
        }
    }
    if data.len() <= cfg.dev_size {
        return Err(NeuralError::InsufficientData {
            dev_size: cfg.dev_size,
            found: data.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let mut dev_ids: Vec<usize> = order[..cfg.dev_size].to_vec();
    dev_ids.sort_unstable();
    let dev: Vec<Sentence> = dev_ids.iter().map(|&i| data[i].clone()).collect();
    let fit: Vec<Sentence> = (0..data.len())
        .filter(|i| dev_ids.binary_search(i).is_err())
        .map(|i| data[i].clone())
        .collect();

    let mut counts: IndexMap<String, usize> = IndexMap::new();
    for s in &fit {
        for w in s.norms() {
            *counts.entry(w.to_string()).or_default() += 1;
        }
    }
    let tagset: Vec<Tag> = data
        .iter()
        .flat_map(|s| s.tags.iter().flatten().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut model = NeuralModel::init(counts.keys().cloned(), tagset, cfg, &mut rng);
    let singletons: HashMap<usize, bool> = counts
        .iter()
        .map(|(w, &c)| (model.word_index(w), c == 1))
        .collect();
    let encoded: Vec<(Vec<usize>, Vec<usize>)> = fit
        .iter()
        .map(|s| (model.ids(s), model.tag_ids(s).expect("tags come from data")))
        .collect();
    let n_tokens: usize = encoded.iter().map(|(w, _)| w.len()).sum();

    let mut adam = Adam::new(&model.params, cfg.lr);
    let mut report = NeuralTrainReport {
        train_loss: Vec::new(),
        dev_accuracy: Vec::new(),
        best_epoch: 0,
        dev_ids,
    };
    let mut best: Option<(f64, NeuralModel)> = None;
    let mut idx: Vec<usize> = (0..encoded.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        idx.shuffle(&mut rng);
        for &i in &idx {
            let (words, tags) = &encoded[i];
            let noisy: Vec<usize> = words
                .iter()
                .map(|&w| {
                    if singletons.get(&w).copied().unwrap_or(false)
                        && rng.gen::<f64>() < cfg.unk_replace_prob
                    {
                        0
                    } else {
                        w
                    }
                })
                .collect();
            let mut grads = model.params.zero_grads();
            model.sentence_loss(&noisy, tags, Some(&mut grads), None);
            adam.step(&mut model.params, &grads);
        }
        let total: f64 = encoded
            .iter()
            .map(|(w, t)| model.sentence_loss(w, t, None, None))
            .sum();
        report.train_loss.push(total / n_tokens.max(1) as f64);
        if dev.is_empty() {
            report.best_epoch = epoch;
            best = Some((0.0, model.clone()));
        } else {
            let acc = accuracy(&model, &dev);
            report.dev_accuracy.push(acc);
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                report.best_epoch = epoch;
                best = Some((acc, model.clone()));
            }
        }
    }
    let model = best.map(|(_, m)| m).unwrap_or(model);
    Ok((model, report))
}

/// Compares analytic gradients with central finite differences (step 1e-4)
/// on a seeded 1% sample of parameters (at least 20). Returns the largest
/// relative error `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check(model: &NeuralModel, batch: &[Sentence], seed: u64) -> f64 {
    gradient_check_with(model, batch, seed, None)
}

#[doc(hidden)]
pub fn gradient_check_with(
    model: &NeuralModel,
    batch: &[Sentence],
    seed: u64,
    fault: Option<Fault>,
) -> f64 {
    let (_, grads) = model.loss_and_gradients(batch, fault);
    let total = model.params.len();
    let samples = (total / 100).max(20).min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat: Vec<(usize, usize)> = Vec::with_capacity(total);
    for (ti, t) in model.params.tensors.iter().enumerate() {
        flat.extend((0..t.data.len()).map(|j| (ti, j)));
    }
    let picks: Vec<(usize, usize)> = flat.choose_multiple(&mut rng, samples).copied().collect();
    let h = 1e-4;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (ti, j) in picks {
        let orig = probe.params.tensors[ti].data[j];
        probe.params.tensors[ti].data[j] = orig + h;
        let up = probe.loss(batch);
        probe.params.tensors[ti].data[j] = orig - h;
        let down = probe.loss(batch);
        probe.params.tensors[ti].data[j] = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grads.tensors[ti][j];
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tag;

    fn t(s: &str) -> Tag {
        parse_tag(s).unwrap()
    }

    fn small_cfg() -> NeuralConfig {
        NeuralConfig {
            input_embed_dim: 6,
            hidden_dim: 5,
            tag_embed_dim: 4,
            lr: 0.01,
            max_epochs: 5,
            dev_size: 1,
            seed: 7,
            unk_replace_prob: 0.5,
        }
    }

    fn corpus() -> Vec<Sentence> {
        vec![
            Sentence::from_pairs(&[("o", t("D")), ("kunto", t("N")), ("ìbbie", t("V"))]),
            Sentence::from_pairs(&[("i", t("D")), ("màna", t("N"))]),
            Sentence::from_pairs(&[("ce", t("C")), ("èkame", t("V"))]),
            Sentence::from_pairs(&[("stì", t("P+D")), ("chòra", t("N"))]),
        ]
    }

    #[test]
    fn probabilities_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = NeuralModel::init(
            ["o".to_string(), "kunto".to_string()],
            vec![t("D"), t("N"), t("V")],
            &small_cfg(),
            &mut rng,
        );
        let lp = model.forward(&Sentence::from_words("o kunto mai")).unwrap();
        assert_eq!(lp.len(), 3);
        for row in lp {
            let s: f64 = row.iter().map(|v| v.exp()).sum();
            assert!((s - 1.0).abs() < 1e-6);
        }
        assert!(matches!(
            model.forward(&Sentence::untagged(vec![])),
            Err(NeuralError::EmptySentence)
        ));
    }

    #[test]
    fn zero_output_layer_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut model = NeuralModel::init(
            ["a".to_string()],
            vec![t("D"), t("N"), t("V"), t("C")],
            &small_cfg(),
            &mut rng,
        );
        model.params.tensors[OUT_W].data.fill(0.0);
        model.params.tensors[OUT_B].data.fill(0.0);
        for row in model.forward(&Sentence::from_words("a b")).unwrap() {
            for v in row {
                assert!((v.exp() - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_words_map_to_unk() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = NeuralModel::init(["a".to_string()], vec![t("N"), t("V")], &small_cfg(), &mut rng);
        assert_eq!(model.word_index("zzz"), 0);
        assert_eq!(model.word_index("a"), 1);
        let a = model.forward(&Sentence::from_words("zzz")).unwrap();
        let b = model.forward(&Sentence::from_words(UNK)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn insufficient_data() {
        let cfg = NeuralConfig {
            dev_size: 4,
            ..small_cfg()
        };
        assert!(matches!(
            train_neural(&corpus(), &cfg),
            Err(NeuralError::InsufficientData { .. })
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let a = train_neural(&corpus(), &small_cfg()).unwrap();
        let b = train_neural(&corpus(), &small_cfg()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn returns_best_dev_snapshot() {
        let cfg = NeuralConfig {
            max_epochs: 6,
            ..small_cfg()
        };
        let (model, report) = train_neural(&corpus(), &cfg).unwrap();
        let best = report
            .dev_accuracy
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let first_best = report.dev_accuracy.iter().position(|a| *a == best).unwrap() + 1;
        assert_eq!(report.best_epoch, first_best);
        // Retraining for exactly best_epoch epochs reproduces the snapshot.
        let (again, _) = train_neural(
            &corpus(),
            &NeuralConfig {
                max_epochs: report.best_epoch,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(again.params, model.params);
    }

    #[test]
    fn checkpoint_round_trip() {
        let (model, _) = train_neural(&corpus(), &small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        assert_eq!(NeuralModel::load(&path).unwrap(), model);
    }

    #[test]
    fn gradient_check_small_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let words = ["o", "kunto", "ìbbie", "i", "màna"].map(String::from);
        let model = NeuralModel::init(words, vec![t("D"), t("N"), t("V")], &small_cfg(), &mut rng);
        let batch = &corpus()[..2];
        assert!(gradient_check(&model, batch, 11) < 1e-3);
        assert!(gradient_check_with(&model, batch, 11, Some(Fault::SigmoidBackward)) > 1e-3);
    }
}
