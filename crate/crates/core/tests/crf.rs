use std::time::Instant;

use glossa::corpus::{parse_tag, Sentence, Tag};
use glossa::crf::{train_crf, CrfConfig, CrfModel};
use glossa::dict::{Provenance, TagDictionary};
use glossa_acceptance::crf::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn partition_and_viterbi_match_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let k = rng.gen_range(2..=4);
        let len = rng.gen_range(1..=5);
        let s = random_sentence(&mut rng, len, &tagset(k));
        let m = random_model(&mut rng, std::slice::from_ref(&s), k);
        let (z, argmax, best) = brute_force(&m, &s);
        assert!((m.log_partition(&s) - z).abs() < 1e-8);
        let (path, score) = m.decode_indices(&s);
        assert_eq!(path, argmax);
        assert!((score - best).abs() < 1e-9);
        assert!(z >= best);
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn three_by_three_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_sentence(&mut rng, 3, &tagset(3));
    let m = random_model(&mut rng, std::slice::from_ref(&s), 3);
    assert!((m.log_partition(&s) - brute_force(&m, &s).0).abs() < 1e-8);
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let k = rng.gen_range(2..=4);
        let tags = tagset(k);
        let data: Vec<Sentence> = (0..5)
            .map(|_| {
                let len = rng.gen_range(1..=5);
                random_sentence(&mut rng, len, &tags)
            })
            .collect();
        let m = random_model(&mut rng, &data, k);
        let err = crf_gradient_error(&m, &data, 1e-5);
        assert!(err < 1e-4, "relative error {err}");
    }
}

fn toy() -> Vec<Sentence> {
    let t = |s: &str| parse_tag(s).unwrap();
    vec![
        Sentence::from_pairs(&[("o", t("D")), ("kunto", t("N")), ("ìbbie", t("V")), (".", t("PUNCT"))]),
        Sentence::from_pairs(&[("i", t("D")), ("chòra", t("N")), ("èkame", t("V"))]),
        Sentence::from_pairs(&[("ce", t("C")), ("èkame", t("V")), ("stì", t("P+D")), ("chòra", t("N"))]),
        Sentence::from_pairs(&[("o", t("D")), ("chòra", t("N")), (".", t("PUNCT"))]),
        Sentence::from_pairs(&[("ìbbie", t("V")), ("o", t("D")), ("kunto", t("N"))]),
    ]
}

#[test]
fn training_is_monotone_and_stationary() {
    let (m, report) = train_crf(&toy(), None, &CrfConfig::default()).unwrap();
    for w in report.objective.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{w:?}");
    }
    let (_, grad) = m.objective(&toy()).unwrap();
    let max = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    assert!(max < 1e-4, "gradient max-norm {max}");
    for s in toy() {
        assert_eq!(m.decode(&s).0, s.tags.clone().unwrap());
    }
}

#[test]
fn supervision_adds_dictionary_tags_and_types() {
    let mut d = TagDictionary::new();
    d.insert("mavro", parse_tag("Adj").unwrap(), Provenance::Projected, 3);
    let (m, _) = train_crf(&toy(), Some(&d), &CrfConfig::default()).unwrap();
    assert!(m.tagset.contains(&parse_tag("Adj").unwrap()));
    let s = Sentence::from_words("mavro");
    assert_eq!(m.decode(&s).0, vec![parse_tag("Adj").unwrap()]);
}

#[test]
fn decode_score_is_sequence_score() {
    let (m, _) = train_crf(&toy(), None, &CrfConfig::basic()).unwrap();
    let s = Sentence::from_words("o kunto èkame");
    let (tags, score): (Vec<Tag>, f64) = m.decode(&s);
    assert!((m.score_sequence(&s, &tags).unwrap() - score).abs() < 1e-12);
    let zero = CrfModel::zeros(m.tagset.clone(), m.feature_index.clone(), m.template, 0.1);
    assert!(zero.decode(&s).0.iter().all(|t| *t == m.tagset[0]));
}
