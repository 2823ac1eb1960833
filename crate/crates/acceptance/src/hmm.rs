//! HMM quantities by path enumeration.

use glossa::corpus::{parse_tag, Sentence, Tag};
use glossa::dict::{Provenance, TagDictionary};
use glossa::semisup::{HmmModel, UNK};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `k` tags over three words plus UNK, every distribution strictly positive.
pub fn toy_hmm(rng: &mut ChaCha8Rng, k: usize) -> HmmModel {
    let v = 4;
    let dist = |rng: &mut ChaCha8Rng, n: usize| {
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = d.iter().sum();
        d.iter_mut().for_each(|x| *x /= s);
        d
    };
    let mut trans = Vec::new();
    let mut stop = Vec::new();
    let mut emit = Vec::new();
    for _ in 0..k {
        let row = dist(rng, k + 1);
        trans.extend_from_slice(&row[..k]);
        stop.push(row[k]);
        let mut e = dist(rng, v - 1);
        e.insert(0, 0.0);
        emit.extend(e);
    }
    let mut vocab = IndexMap::new();
    for (i, w) in [UNK, "a", "b", "c"].iter().enumerate() {
        vocab.insert(w.to_string(), i);
    }
    HmmModel {
        tagset: ["N", "V", "Adj"][..k].iter().map(|s| parse_tag(s).unwrap()).collect(),
        vocab,
        start: dist(rng, k),
        trans,
        stop,
        emit,
        dictionary: TagDictionary::new(),
        unk_tags: vec![true; k],
    }
}

/// Every tag path of length `n` over `k` tags.
pub fn paths(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    out
}

/// Joint probability of `words` and `path`, stop included.
pub fn path_prob(m: &HmmModel, words: &[usize], path: &[usize]) -> f64 {
    let k = m.num_tags();
    let mut p = m.start[path[0]] * m.emission(path[0], words[0]);
    for i in 1..path.len() {
        p *= m.trans[path[i - 1] * k + path[i]] * m.emission(path[i], words[i]);
    }
    p * m.stop[path[path.len() - 1]]
}

/// Random corpus where each word has a small set of admissible tags.
pub fn synthetic(seed: u64, sentences: usize) -> (Vec<Sentence>, Vec<Sentence>, TagDictionary) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tags: Vec<Tag> = ["D", "N", "V", "Adj", "P+D"].iter().map(|s| parse_tag(s).unwrap()).collect();
    let lexicon: Vec<(String, Vec<usize>)> = (0..30)
        .map(|i| {
            let mut allowed = vec![i % tags.len()];
            if i % 7 == 0 {
                allowed.push((i + 2) % tags.len());
            }
            (format!("w{i}"), allowed)
        })
        .collect();
    let mut make = |n: usize| -> Vec<Sentence> {
        (0..n)
            .map(|_| {
                let len = rng.gen_range(2..7);
                let pairs: Vec<(String, Tag)> = (0..len)
                    .map(|_| {
                        let (w, a) = &lexicon[rng.gen_range(0..lexicon.len())];
                        (w.clone(), tags[a[rng.gen_range(0..a.len())]].clone())
                    })
                    .collect();
                Sentence::from_pairs(&pairs)
            })
            .collect()
    };
    let annotated = make(10);
    let mono: Vec<Sentence> = make(sentences)
        .into_iter()
        .map(|s| Sentence::untagged(s.tokens))
        .collect();
    let mut dict = TagDictionary::new();
    for (w, a) in lexicon.iter().take(20) {
        for &k in a {
            dict.insert(w, tags[k].clone(), Provenance::Projected, 1);
        }
    }
    (annotated, mono, dict)
}
