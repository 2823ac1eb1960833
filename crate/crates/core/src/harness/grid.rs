use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{raw_text, train_tagger, Augment, HarnessConfig, HarnessError, Resources, TaggerKind, TaggerSpec};
use crate::corpus::{Corpus, ParallelCorpus, Sentence};
use crate::metrics::{token_accuracy, Accuracy};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataCondition {
    pub projection: Augment,
    /// Adds the raw test text to gdb's monolingual data.
    #[serde(default)]
    pub transductive_mono: bool,
}

impl DataCondition {
    pub fn name(&self) -> String {
        let mut s = match self.projection {
            Augment::None => "base".to_string(),
            a => a.suffix().trim_start_matches('+').to_string(),
        };
        if self.transductive_mono {
            s.push_str("+mono-test");
        }
        s
    }
}

pub struct GridData<'a> {
    pub train: &'a Corpus,
    pub test: &'a Corpus,
    pub mono: &'a Corpus,
    pub parallel: Option<&'a ParallelCorpus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub tagger: String,
    pub condition: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridTable {
    pub rows: Vec<GridRow>,
}

impl GridTable {
    pub fn get(&self, tagger: &str, condition: &str) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.tagger == tagger && r.condition == condition)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("tagger\tcondition\tcorrect\ttotal\taccuracy\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{:.2}", r.tagger, r.condition, r.correct, r.total, r.accuracy);
        }
        out
    }
}

/// Trains every tagger under every condition and scores it on the
/// non-excluded test tokens. Rows follow condition-major, tagger-minor order.
pub fn run_grid(
    taggers: &[TaggerKind],
    conditions: &[DataCondition],
    data: &GridData<'_>,
    cfg: &HarnessConfig,
) -> Result<GridTable, HarnessError> {
    if taggers.is_empty() {
        return Err(HarnessError::NoTaggers);
    }
    let test_ids: BTreeSet<String> = data.test.narratives.iter().map(|n| n.id.clone()).collect();
    let base = Resources::build(
        raw_text(data.mono),
        data.parallel,
        &test_ids,
        conditions.iter().map(|c| c.projection),
        &cfg.projection,
    )?;
    let transductive = Resources {
        mono: base.mono.iter().cloned().chain(raw_text(data.test)).collect(),
        ..base.clone()
    };
    let train = data.train.training_sentences();
    let gold: Vec<Sentence> = data.test.active_sentences().cloned().collect();

    let jobs: Vec<(DataCondition, TaggerKind)> = conditions
        .iter()
        .flat_map(|c| taggers.iter().map(move |t| (*c, *t)))
        .collect();
    let rows: Result<Vec<GridRow>, HarnessError> = jobs
        .par_iter()
        .map(|(c, kind)| {
            let res = if c.transductive_mono { &transductive } else { &base };
            let spec = TaggerSpec::new(*kind, c.projection);
            let model = train_tagger(spec, &train, res, cfg)?;
            let acc: Accuracy = token_accuracy(&gold, &model.tag_all(&gold));
            Ok(GridRow {
                tagger: spec.to_string(),
                condition: c.name(),
                correct: acc.correct,
                total: acc.total,
                accuracy: acc.percent(),
            })
        })
        .collect();
    Ok(GridTable { rows: rows? })
}
