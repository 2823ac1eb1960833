//! Small fixed corpora for the neural tagger.

use glossa::corpus::{parse_tag, Sentence, Tag};

/// Five short sentences a tagger can memorize.
pub fn memorizable() -> Vec<Sentence> {
    let rows: [&[(&str, &str)]; 5] = [
        &[("o", "D"), ("kunto", "N"), ("ìbbie", "V"), (".", "PUNCT")],
        &[("i", "D"), ("màna", "N"), ("èkame", "V")],
        &[("ce", "C"), ("ìrte", "V"), ("stì", "P+D"), ("chòra", "N")],
        &[("ti", "Pr"), ("kàmni", "V"), ("?", "PUNCT")],
        &[("òria", "Adj"), ("pedìa", "N"), ("pànta", "Adv")],
    ];
    rows.iter()
        .map(|r| {
            let pairs: Vec<(&str, Tag)> = r.iter().map(|(w, g)| (*w, parse_tag(g).unwrap())).collect();
            Sentence::from_pairs(&pairs)
        })
        .collect()
}
