//! IBM Model 1 EM over string keys and link fixtures for the filter.

use std::collections::{BTreeSet, HashMap};

use glossa::corpus::{parse_tag, Tag};
use glossa::projection::{Link, SentencePair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain EM returning t(f|e) keyed by (griko, italian), with "" as NULL.
pub fn oracle_em(pairs: &[SentencePair], iters: usize) -> HashMap<(String, String), f64> {
    let mut cooc: HashMap<String, BTreeSet<String>> = HashMap::new();
    for p in pairs {
        for e in std::iter::once("").chain(p.italian.iter().map(String::as_str)) {
            for f in &p.griko {
                cooc.entry(e.to_string()).or_default().insert(f.to_string());
            }
        }
    }
    let mut t: HashMap<(String, String), f64> = HashMap::new();
    for (e, fs) in &cooc {
        for f in fs {
            t.insert((f.clone(), e.clone()), 1.0 / fs.len() as f64);
        }
    }
    for _ in 0..iters {
        let mut c: HashMap<(String, String), f64> = HashMap::new();
        let mut tot: HashMap<String, f64> = HashMap::new();
        for p in pairs {
            let es: Vec<&str> = std::iter::once("").chain(p.italian.iter().map(String::as_str)).collect();
            for f in &p.griko {
                let z: f64 = es.iter().map(|e| t[&(f.to_string(), e.to_string())]).sum();
                for e in &es {
                    let p = t[&(f.to_string(), e.to_string())] / z;
                    *c.entry((f.to_string(), e.to_string())).or_default() += p;
                    *tot.entry(e.to_string()).or_default() += p;
                }
            }
        }
        for (k, v) in t.iter_mut() {
            *v = c[k] / tot[&k.1];
        }
    }
    t
}

/// One to seven pairs over six word types per side.
pub fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<SentencePair> {
    let n = rng.gen_range(1..8);
    (0..n)
        .map(|_| {
            let lg = rng.gen_range(1..5);
            let li = rng.gen_range(1..5);
            let g: Vec<String> = (0..lg).map(|_| format!("g{}", rng.gen_range(0..6))).collect();
            let i: Vec<String> = (0..li).map(|_| format!("i{}", rng.gen_range(0..6))).collect();
            SentencePair::from_words(&g.join(" "), &i.join(" "))
        })
        .collect()
}

/// Random tagged pairs with one link per Griko token. Probabilities cluster
/// around the filter thresholds.
pub fn link_fixture(seed: u64) -> (Vec<SentencePair>, Vec<Vec<Link>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tags: Vec<Tag> = ["N", "V", "Adj", "D"].iter().map(|s| parse_tag(s).unwrap()).collect();
    let mut pairs = Vec::new();
    let mut links = Vec::new();
    for _ in 0..rng.gen_range(5..40) {
        let n = rng.gen_range(1..5);
        let g: Vec<String> = (0..n).map(|_| format!("g{}", rng.gen_range(0..8))).collect();
        let i: Vec<String> = (0..n).map(|_| format!("i{}", rng.gen_range(0..8))).collect();
        let tg: Vec<Tag> = (0..n).map(|_| tags[rng.gen_range(0..4)].clone()).collect();
        pairs.push(SentencePair::from_words(&g.join(" "), &i.join(" ")).with_tags(tg));
        links.push(
            (0..n)
                .map(|j| Link {
                    griko_pos: j,
                    italian_pos: rng.gen_range(0..n),
                    prob: [1.0, 0.95, 0.92, 0.9, 0.85, rng.gen::<f64>()][rng.gen_range(0..6)],
                })
                .collect(),
        );
    }
    (pairs, links)
}

/// One single-link pair per occurrence. Covers p = 1, a clear keep, p = 0.9,
/// frequency 5 and a rare Italian side. Only "exact" and "high" survive.
pub fn footnote_fixture() -> (Vec<SentencePair>, Vec<Vec<Link>>) {
    let mut pairs = Vec::new();
    let mut links = Vec::new();
    let mut push = |g: &str, i: &str, tag: &str, prob: f64| {
        pairs.push(SentencePair::from_words(g, i).with_tags(vec![parse_tag(tag).unwrap()]));
        links.push(vec![Link {
            griko_pos: 0,
            italian_pos: 0,
            prob,
        }]);
    };
    push("exact", "esatto", "N", 1.0);
    for _ in 0..6 {
        push("high", "alto", "Adj", 0.95);
    }
    for _ in 0..6 {
        push("edge", "bordo", "N", 0.9);
    }
    for _ in 0..5 {
        push("five", "cinque", "Num", 0.95);
    }
    for k in 0..6 {
        push("rare", if k < 3 { "raro" } else { "altro" }, "V", 0.95);
    }
    (pairs, links)
}
