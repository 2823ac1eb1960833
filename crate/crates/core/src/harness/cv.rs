use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_tagger, HarnessConfig, HarnessError, Resources, TaggerSpec};
use crate::corpus::{Corpus, Sentence};
use crate::metrics::{summarize, token_accuracy, Accuracy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub narrative_id: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub tagger: String,
    pub folds: Vec<FoldResult>,
    pub mean: f64,
    /// Sample standard deviation over fold accuracies.
    pub sd: f64,
    pub min: FoldResult,
    pub max: FoldResult,
}

/// Leave-one-narrative-out: each narrative is scored by a tagger trained on
/// `base` plus every other narrative. Min and max ties go to the first fold.
pub fn cross_validate(
    narratives: &Corpus,
    base: &[Sentence],
    spec: TaggerSpec,
    res: &Resources,
    cfg: &HarnessConfig,
) -> Result<CvReport, HarnessError> {
    if narratives.len() < 2 {
        return Err(HarnessError::TooFewNarratives(narratives.len()));
    }
    let folds: Result<Vec<FoldResult>, HarnessError> = narratives
        .narratives
        .par_iter()
        .map(|held| {
            let mut train: Vec<Sentence> = base.to_vec();
            for n in narratives.narratives.iter().filter(|n| n.id != held.id) {
                train.extend(n.active_sentences().filter(|s| s.is_tagged()).cloned());
            }
            let model = train_tagger(spec, &train, res, cfg)?;
            let gold: Vec<Sentence> = held.active_sentences().cloned().collect();
            let acc: Accuracy = token_accuracy(&gold, &model.tag_all(&gold));
            Ok(FoldResult {
                narrative_id: held.id.clone(),
                correct: acc.correct,
                total: acc.total,
                accuracy: acc.percent(),
            })
        })
        .collect();
    let folds = folds?;
    let values: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let summary = summarize(&values).expect("at least two folds");
    let mut min = &folds[0];
    let mut max = &folds[0];
    for f in &folds[1..] {
        if f.accuracy < min.accuracy {
            min = f;
        }
        if f.accuracy > max.accuracy {
            max = f;
        }
    }
    Ok(CvReport {
        tagger: spec.to_string(),
        mean: summary.mean,
        sd: summary.sd,
        min: min.clone(),
        max: max.clone(),
        folds,
    })
}
