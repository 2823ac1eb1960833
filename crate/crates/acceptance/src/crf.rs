//! Linear-chain CRF by enumeration and finite differences.


use glossa::corpus::{AtomicTag, Sentence, Tag};
use glossa::crf::{extract_features, CrfModel, FeatureTemplateConfig};
use indexmap::IndexMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const WORDS: [&str; 6] = ["o", "kunto", "ìbbie", "ce", "stì", "chòra"];

pub fn random_sentence(rng: &mut ChaCha8Rng, len: usize, tags: &[Tag]) -> Sentence {
    let pairs: Vec<(&str, Tag)> = (0..len)
        .map(|_| (WORDS[rng.gen_range(0..WORDS.len())], tags[rng.gen_range(0..tags.len())].clone()))
        .collect();
    Sentence::from_pairs(&pairs)
}

pub fn tagset(k: usize) -> Vec<Tag> {
    AtomicTag::ALL[..k].iter().map(|a| Tag::atomic(*a)).collect()
}

/// Model over every feature of `sentences` with weights uniform in (−1, 1).
pub fn random_model(rng: &mut ChaCha8Rng, sentences: &[Sentence], k: usize) -> CrfModel {
    let template = FeatureTemplateConfig::extended();
    let mut index = IndexMap::new();
    for s in sentences {
        for i in 0..s.len() {
            for f in extract_features(s, i, &template).unwrap() {
                let n = index.len();
                index.entry(f).or_insert(n);
            }
        }
    }
    let mut m = CrfModel::zeros(tagset(k), index, template, 0.1);
    for w in &mut m.weights {
        *w = rng.gen_range(-1.0..1.0);
    }
    m
}

/// Score of a tag-index path, read feature by feature from the weight layout
/// (unary block, then transitions, start and end weights).
pub fn path_score(m: &CrfModel, s: &Sentence, path: &[usize]) -> f64 {
    let k = m.tagset.len();
    let f = m.feature_index.len();
    let trans = f * k;
    let start = trans + k * k;
    let end = start + k;
    let mut total = m.weights[start + path[0]] + m.weights[end + path[path.len() - 1]];
    for (i, &y) in path.iter().enumerate() {
        for feat in extract_features(s, i, &m.template).unwrap() {
            if let Some(id) = m.feature_index.get(&feat) {
                total += m.weights[id * k + y];
            }
        }
        if i > 0 {
            total += m.weights[trans + path[i - 1] * k + y];
        }
    }
    total
}

/// Enumerates all K^T paths: (log partition, argmax path, best score).
/// Ties keep the lexicographically smallest path.
pub fn brute_force(m: &CrfModel, s: &Sentence) -> (f64, Vec<usize>, f64) {
    let k = m.tagset.len();
    let t = s.len();
    let mut path = vec![0usize; t];
    let mut scores = Vec::new();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    loop {
        let sc = path_score(m, s, &path);
        if sc > best.1 {
            best = (path.clone(), sc);
        }
        scores.push(sc);
        let mut i = t;
        loop {
            if i == 0 {
                let mx = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let z = mx + scores.iter().map(|x| (x - mx).exp()).sum::<f64>().ln();
                return (z, best.0, best.1);
            }
            i -= 1;
            path[i] += 1;
            if path[i] < k {
                break;
            }
            path[i] = 0;
        }
    }
}

/// Largest relative error between the analytic objective gradient and
/// central differences with step `h`, over every coordinate.
pub fn crf_gradient_error(m: &CrfModel, data: &[Sentence], h: f64) -> f64 {
    let (_, grad) = m.objective(data).unwrap();
    let mut probe = m.clone();
    let mut worst = 0.0f64;
    for j in 0..m.weights.len() {
        let orig = probe.weights[j];
        probe.weights[j] = orig + h;
        let up = probe.objective(data).unwrap().0;
        probe.weights[j] = orig - h;
        let down = probe.objective(data).unwrap().0;
        probe.weights[j] = orig;
        let num = (up - down) / (2.0 * h);
        let rel = (grad[j] - num).abs() / grad[j].abs().max(num.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}
