//! Seeded synthetic diglot corpora: a Griko-like tagged side generated from
//! a tag Markov chain, and an Italian-like translation with its own tags.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_tag, Corpus, Narrative, ParallelCorpus, ParallelNarrative, Sentence, Tag, Token};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    /// Tagged training sentences, split into narratives of 10.
    pub base_sentences: usize,
    pub test_narratives: usize,
    /// Sentence counts of the shortest and longest test narrative.
    pub test_min_sentences: usize,
    pub test_max_sentences: usize,
    pub mono_narratives: usize,
    pub mono_sentences: usize,
    pub nouns: usize,
    pub verbs: usize,
    pub adjectives: usize,
    pub adverbs: usize,
    /// Exponent of the within-class Zipf distribution.
    pub zipf: f64,
    /// Probability that an open-class form carries its class suffix.
    pub suffix_cue: f64,
    /// Fraction of verb and adjective forms that are homographs of nouns.
    pub ambiguity: f64,
    pub italian_tag_noise: f64,
    pub pronoun_drop: f64,
    /// Probability that a test sentence is foreign-language and excluded.
    pub excluded_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            base_sentences: 30,
            test_narratives: 10,
            test_min_sentences: 6,
            test_max_sentences: 30,
            mono_narratives: 40,
            mono_sentences: 12,
            nouns: 1000,
            verbs: 700,
            adjectives: 300,
            adverbs: 100,
            zipf: 0.9,
            suffix_cue: 0.2,
            ambiguity: 0.15,
            italian_tag_noise: 0.08,
            pronoun_drop: 0.5,
            excluded_rate: 0.03,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    /// Gold-tagged training narratives.
    pub base: Corpus,
    /// Gold-tagged evaluation narratives; ids are not in length order.
    pub test: Corpus,
    /// Untagged Griko text.
    pub mono: Corpus,
    /// Translations of every mono and test narrative, with noisy Italian tags.
    pub parallel: ParallelCorpus,
    /// Every tag each Griko type can carry.
    pub lexicon: BTreeMap<String, BTreeSet<Tag>>,
}

impl SynthData {
    pub fn test_ids(&self) -> BTreeSet<String> {
        self.test.narratives.iter().map(|n| n.id.clone()).collect()
    }

    /// Parallel narratives that are not test narratives.
    pub fn parallel_train_ids(&self) -> BTreeSet<String> {
        let test = self.test_ids();
        self.parallel
            .pairs
            .iter()
            .map(|p| p.id().to_string())
            .filter(|id| !test.contains(id))
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Slot {
    D,
    N,
    V,
    Adj,
    Adv,
    P,
    PD,
    C,
    Pr,
    Num,
    Punct,
}

impl Slot {
    fn tag(self) -> &'static str {
        match self {
            Slot::D => "D",
            Slot::N => "N",
            Slot::V => "V",
            Slot::Adj => "Adj",
            Slot::Adv => "Adv",
            Slot::P => "P",
            Slot::PD => "P+D",
            Slot::C => "C",
            Slot::Pr => "Pr",
            Slot::Num => "Num",
            Slot::Punct => "PUNCT",
        }
    }

    fn next(self) -> &'static [(Slot, f64)] {
        use Slot::*;
        match self {
            D => &[(N, 0.75), (Adj, 0.2), (Num, 0.05)],
            N => &[(V, 0.35), (Adj, 0.15), (P, 0.12), (PD, 0.1), (C, 0.1), (Punct, 0.18)],
            Adj => &[(N, 0.5), (P, 0.15), (C, 0.15), (Punct, 0.2)],
            V => &[
                (D, 0.3),
                (N, 0.12),
                (P, 0.1),
                (PD, 0.1),
                (Adv, 0.15),
                (Pr, 0.05),
                (Adj, 0.06),
                (Punct, 0.12),
            ],
            Adv => &[(V, 0.4), (Adj, 0.3), (D, 0.1), (Punct, 0.2)],
            P => &[(D, 0.4), (N, 0.4), (Pr, 0.1), (Num, 0.1)],
            PD => &[(N, 0.85), (Adj, 0.15)],
            C => &[(D, 0.3), (Pr, 0.2), (V, 0.3), (N, 0.2)],
            Pr => &[(V, 0.8), (Adv, 0.1), (C, 0.1)],
            Num => &[(N, 1.0)],
            Punct => &[],
        }
    }
}

const START: &[(Slot, f64)] = &[
    (Slot::D, 0.3),
    (Slot::Pr, 0.2),
    (Slot::N, 0.1),
    (Slot::Adv, 0.1),
    (Slot::C, 0.05),
    (Slot::V, 0.15),
    (Slot::P, 0.05),
    (Slot::PD, 0.05),
];

const MAX_LEN: usize = 25;

struct Word {
    griko: String,
    /// Italian rendering; P+D words expand to preposition + article.
    italian: Vec<(String, &'static str)>,
}

struct Class {
    slot: Slot,
    words: Vec<Word>,
    weights: WeightedIndex<f64>,
}

struct Lexicon {
    classes: BTreeMap<Slot, Class>,
}

const GRIKO_ONSETS: &[&str] = &["p", "t", "k", "m", "n", "l", "r", "s", "v", "ts", "ch", "f", "d", "g", ""];
const GRIKO_VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
const ITALIAN_ONSETS: &[&str] = &["b", "c", "d", "f", "gl", "l", "m", "n", "p", "r", "s", "st", "t", "v", "z"];
const ITALIAN_VOWELS: &[&str] = &["a", "e", "i", "o", "ie", "uo"];

fn syllables(rng: &mut ChaCha8Rng, onsets: &[&str], vowels: &[&str], n: usize) -> String {
    (0..n)
        .map(|_| format!("{}{}", onsets.choose(rng).unwrap(), vowels.choose(rng).unwrap()))
        .collect()
}

fn fresh_form(
    rng: &mut ChaCha8Rng,
    used: &mut HashSet<String>,
    onsets: &[&str],
    vowels: &[&str],
    suffix: Option<&str>,
) -> String {
    loop {
        let n = rng.gen_range(2..=3);
        let mut w = syllables(rng, onsets, vowels, n);
        if let Some(s) = suffix {
            w.push_str(s);
        }
        if used.insert(w.clone()) {
            return w;
        }
    }
}

fn zipf_weights(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / ((r + 1) as f64).powf(s))).expect("non-empty class")
}

fn closed(slot: Slot, pairs: &[(&str, &str)], zipf: f64) -> Class {
    let words = pairs
        .iter()
        .map(|(g, i)| Word {
            griko: g.to_string(),
            italian: vec![(i.to_string(), slot.tag())],
        })
        .collect::<Vec<_>>();
    Class {
        slot,
        weights: zipf_weights(words.len(), zipf * 0.5),
        words,
    }
}

impl Lexicon {
    fn generate(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Lexicon {
        let mut classes = BTreeMap::new();
        let z = cfg.zipf;
        classes.insert(
            Slot::D,
            closed(Slot::D, &[("o", "il"), ("i", "la"), ("to", "lo"), ("ta", "le"), ("tus", "gli"), ("tin", "una")], z),
        );
        classes.insert(
            Slot::P,
            closed(Slot::P, &[("se", "in"), ("apò", "da"), ("me", "con"), ("ja", "per"), ("ampì", "dietro")], z),
        );
        classes.insert(
            Slot::C,
            closed(Slot::C, &[("ce", "e"), ("ma", "ma"), ("an", "se"), ("ti", "che"), ("o'", "o")], z),
        );
        classes.insert(
            Slot::Pr,
            closed(Slot::Pr, &[("evò", "io"), ("esù", "tu"), ("cino", "lui"), ("tis", "chi"), ("emì", "noi"), ("esì", "voi")], z),
        );
        classes.insert(
            Slot::Num,
            closed(Slot::Num, &[("ena", "uno"), ("dio", "due"), ("tria", "tre"), ("tèssera", "quattro"), ("pente", "cinque"), ("deka", "dieci")], z),
        );
        classes.insert(
            Slot::Punct,
            closed(Slot::Punct, &[(".", "."), ("?", "?"), ("!", "!")], z),
        );
        let pd: Vec<Word> = [("sto", "in", "il"), ("sti", "in", "la"), ("stus", "in", "gli"), ("atto", "da", "il")]
            .iter()
            .map(|(g, p, d)| Word {
                griko: g.to_string(),
                italian: vec![(p.to_string(), "P"), (d.to_string(), "D")],
            })
            .collect();
        classes.insert(
            Slot::PD,
            Class {
                slot: Slot::PD,
                weights: zipf_weights(pd.len(), z * 0.5),
                words: pd,
            },
        );

        let mut g_used: HashSet<String> = classes
            .values()
            .flat_map(|c| c.words.iter().map(|w| w.griko.clone()))
            .collect();
        let mut i_used: HashSet<String> = classes
            .values()
            .flat_map(|c| c.words.iter().flat_map(|w| w.italian.iter().map(|(s, _)| s.clone())))
            .collect();
        let open = [
            (Slot::N, cfg.nouns, "os", "one"),
            (Slot::V, cfg.verbs, "ume", "are"),
            (Slot::Adj, cfg.adjectives, "icò", "oso"),
            (Slot::Adv, cfg.adverbs, "ta", "mente"),
        ];
        let mut nouns: Vec<String> = Vec::new();
        for (slot, n, g_suffix, i_suffix) in open {
            let mut words = Vec::with_capacity(n);
            for _ in 0..n.max(1) {
                let homograph = matches!(slot, Slot::V | Slot::Adj) && !nouns.is_empty() && rng.gen_bool(cfg.ambiguity);
                let griko = if homograph {
                    nouns.choose(rng).unwrap().clone()
                } else {
                    let suffix = rng.gen_bool(cfg.suffix_cue).then_some(g_suffix);
                    fresh_form(rng, &mut g_used, GRIKO_ONSETS, GRIKO_VOWELS, suffix)
                };
                let suffix = rng.gen_bool(0.5).then_some(i_suffix);
                let italian = fresh_form(rng, &mut i_used, ITALIAN_ONSETS, ITALIAN_VOWELS, suffix);
                words.push(Word {
                    griko,
                    italian: vec![(italian, slot.tag())],
                });
            }
            if slot == Slot::N {
                nouns = words.iter().map(|w| w.griko.clone()).collect();
            }
            classes.insert(
                slot,
                Class {
                    slot,
                    weights: zipf_weights(words.len(), z),
                    words,
                },
            );
        }
        Lexicon { classes }
    }

    fn tag_map(&self) -> BTreeMap<String, BTreeSet<Tag>> {
        let mut out: BTreeMap<String, BTreeSet<Tag>> = BTreeMap::new();
        for c in self.classes.values() {
            let tag = parse_tag(c.slot.tag()).expect("valid tag");
            for w in &c.words {
                out.entry(w.griko.clone()).or_default().insert(tag.clone());
            }
        }
        out
    }
}

struct Generated {
    griko: Sentence,
    italian: Sentence,
    italian_tags: Vec<Tag>,
}

fn pick(rng: &mut ChaCha8Rng, options: &[(Slot, f64)]) -> Slot {
    let w = WeightedIndex::new(options.iter().map(|(_, p)| *p)).expect("valid row");
    options[w.sample(rng)].0
}

fn tag(s: &str) -> Tag {
    parse_tag(s).expect("valid tag")
}

fn generate_sentence(rng: &mut ChaCha8Rng, lex: &Lexicon, cfg: &SynthConfig, all_tags: &[Tag]) -> Generated {
    let mut slots = vec![pick(rng, START)];
    while *slots.last().unwrap() != Slot::Punct {
        let next = if slots.len() + 1 >= MAX_LEN {
            Slot::Punct
        } else {
            pick(rng, slots.last().unwrap().next())
        };
        slots.push(next);
    }
    let words: Vec<&Word> = slots
        .iter()
        .map(|s| {
            let c = &lex.classes[s];
            &c.words[c.weights.sample(rng)]
        })
        .collect();
    let griko = Sentence::from_pairs(
        &words
            .iter()
            .zip(&slots)
            .map(|(w, s)| (w.griko.as_str(), tag(s.tag())))
            .collect::<Vec<_>>(),
    );

    // Italian order: nouns precede their adjective, dropped subject pronouns.
    let mut order: Vec<usize> = (0..slots.len()).collect();
    let mut k = 0;
    while k + 1 < order.len() {
        if slots[order[k]] == Slot::Adj && slots[order[k + 1]] == Slot::N && rng.gen_bool(0.7) {
            order.swap(k, k + 1);
            k += 2;
        } else {
            k += 1;
        }
    }
    let mut it_tokens = Vec::new();
    let mut it_tags = Vec::new();
    for &j in &order {
        if slots[j] == Slot::Pr && slots.get(j + 1) == Some(&Slot::V) && rng.gen_bool(cfg.pronoun_drop) {
            continue;
        }
        for (form, t) in &words[j].italian {
            it_tokens.push(Token::new(form));
            let gold = tag(t);
            it_tags.push(if rng.gen_bool(cfg.italian_tag_noise) {
                all_tags.choose(rng).unwrap().clone()
            } else {
                gold
            });
        }
    }
    Generated {
        griko,
        italian: Sentence::untagged(it_tokens),
        italian_tags: it_tags,
    }
}

fn foreign_sentence(rng: &mut ChaCha8Rng) -> Generated {
    let n = rng.gen_range(3..8);
    let forms: Vec<String> = (0..n)
        .map(|_| syllables(rng, &["b", "dd", "cc", "gn", "z"], &["a", "u", "i"], 2))
        .collect();
    let toks = |fs: &[String]| fs.iter().map(|f| Token::new(f)).collect::<Vec<_>>();
    let mut griko = Sentence::untagged(toks(&forms));
    griko.excluded = true;
    Generated {
        griko,
        italian: Sentence::untagged(toks(&forms)),
        italian_tags: vec![tag("X"); n],
    }
}

fn narrative(
    rng: &mut ChaCha8Rng,
    lex: &Lexicon,
    cfg: &SynthConfig,
    all_tags: &[Tag],
    id: &str,
    sentences: usize,
    foreign: bool,
) -> ParallelNarrative {
    let gen: Vec<Generated> = (0..sentences)
        .map(|_| {
            if foreign && rng.gen_bool(cfg.excluded_rate) {
                foreign_sentence(rng)
            } else {
                generate_sentence(rng, lex, cfg, all_tags)
            }
        })
        .collect();
    let mut griko = Vec::new();
    let mut italian = Vec::new();
    let mut tags = Vec::new();
    for g in gen {
        griko.push(g.griko);
        italian.push(g.italian);
        tags.push(g.italian_tags);
    }
    ParallelNarrative::new(Narrative::new(id, griko), Narrative::new(id, italian))
        .and_then(|p| p.with_italian_tags(tags))
        .expect("generated narratives are well formed")
}

fn strip_tags(n: &Narrative) -> Narrative {
    let mut out = n.clone();
    for s in &mut out.sentences {
        s.tags = None;
    }
    out
}

/// Generates a corpus; identical configurations give identical data.
pub fn generate(cfg: &SynthConfig) -> SynthData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lex = Lexicon::generate(&mut rng, cfg);
    let all_tags: Vec<Tag> = lex.classes.keys().map(|s| tag(s.tag())).collect();

    let mut base = Vec::new();
    let mut left = cfg.base_sentences;
    while left > 0 {
        let n = left.min(10);
        let id = format!("base-{:02}", base.len() + 1);
        base.push(narrative(&mut rng, &lex, cfg, &all_tags, &id, n, false).griko);
        left -= n;
    }

    let mut lengths: Vec<usize> = (0..cfg.test_narratives)
        .map(|i| {
            let span = cfg.test_max_sentences.saturating_sub(cfg.test_min_sentences);
            let denom = cfg.test_narratives.saturating_sub(1).max(1);
            cfg.test_min_sentences + span * i / denom
        })
        .collect();
    lengths.shuffle(&mut rng);
    let mut pairs = Vec::new();
    let mut test = Vec::new();
    for (i, len) in lengths.iter().enumerate() {
        let p = narrative(&mut rng, &lex, cfg, &all_tags, &format!("story-{:02}", i + 1), *len, true);
        test.push(p.griko.clone());
        pairs.push(p);
    }
    let mut mono = Vec::new();
    for i in 0..cfg.mono_narratives {
        let mut p = narrative(&mut rng, &lex, cfg, &all_tags, &format!("mono-{:02}", i + 1), cfg.mono_sentences, false);
        p.griko = strip_tags(&p.griko);
        mono.push(p.griko.clone());
        pairs.push(p);
    }
    for p in &mut pairs {
        p.griko = strip_tags(&p.griko);
    }

    SynthData {
        base: Corpus::new(base).expect("unique ids"),
        test: Corpus::new(test).expect("unique ids"),
        mono: Corpus::new(mono).expect("unique ids"),
        parallel: ParallelCorpus::new(pairs).expect("unique ids"),
        lexicon: lex.tag_map(),
    }
}
