//! Experiment orchestration: tagger training under data conditions, the
//! results grid, the narrative-level active-learning loop and
//! leave-one-narrative-out cross-validation.

mod active;
mod cv;
mod grid;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, ParallelCorpus, Sentence, Tag};
use crate::crf::{self, CrfConfig, CrfError, CrfModel, FeatureTemplateConfig};
use crate::dict::TagDictionary;
use crate::neural::{self, NeuralConfig, NeuralError, NeuralModel};
use crate::projection::{self, ProjectionConfig, ProjectionError, ProjectionMode};
use crate::semisup::{self, GdbConfig, GdbModel, SemisupError};

pub use active::{
    run_active_learning, ActiveLearner, AlConfig, Annotator, IterationRecord, OracleAnnotator, PassThroughAnnotator,
    Proposal, ProposedSentence, Snapshot, TrainingJob,
};
pub use cv::{cross_validate, CvReport, FoldResult};
pub use grid::{run_grid, DataCondition, GridData, GridRow, GridTable};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Crf(#[from] CrfError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Semisup(#[from] SemisupError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("need at least 2 narratives, found {0}")]
    TooFewNarratives(usize),
    #[error("active-learning queue is empty")]
    QueueEmpty,
    #[error("no model has been trained yet")]
    ModelNotReady,
    #[error("no taggers configured")]
    NoTaggers,
    #[error("{0} requires parallel data")]
    MissingParallel(String),
    #[error("annotator unavailable: {0}")]
    AnnotatorUnavailable(String),
    #[error("expected {expected} tag sequences of lengths {lengths:?}, got lengths {got:?}")]
    LengthMismatch {
        expected: usize,
        lengths: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("snapshot version {got} does not match learner iteration {expected}")]
    StaleSnapshot { expected: usize, got: usize },
    #[error("unknown tagger `{0}`")]
    UnknownTagger(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaggerKind {
    /// Most frequent training tag per type, global majority otherwise.
    Majority,
    /// CRF with the basic template.
    Crf,
    /// CRF with the extended template.
    CrfMod,
    Neural,
    /// Dictionary expansion plus constrained EM-HMM.
    Gdb,
}

impl TaggerKind {
    pub const ALL: [TaggerKind; 5] = [
        TaggerKind::Majority,
        TaggerKind::Crf,
        TaggerKind::CrfMod,
        TaggerKind::Neural,
        TaggerKind::Gdb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaggerKind::Majority => "majority",
            TaggerKind::Crf => "crf",
            TaggerKind::CrfMod => "crf-mod",
            TaggerKind::Neural => "neural",
            TaggerKind::Gdb => "gdb",
        }
    }
}

/// Type-level projected supervision added to the annotated data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Augment {
    #[default]
    None,
    /// Projection from training-side parallel text.
    Clp,
    /// Projection that also aligns the test side.
    Clpa,
}

impl Augment {
    pub fn suffix(self) -> &'static str {
        match self {
            Augment::None => "",
            Augment::Clp => "+clp",
            Augment::Clpa => "+clpa",
        }
    }

    pub fn mode(self) -> Option<ProjectionMode> {
        match self {
            Augment::None => None,
            Augment::Clp => Some(ProjectionMode::TrainOnly),
            Augment::Clpa => Some(ProjectionMode::Transductive),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaggerSpec {
    pub kind: TaggerKind,
    #[serde(default)]
    pub augment: Augment,
}

impl TaggerSpec {
    pub fn new(kind: TaggerKind, augment: Augment) -> Self {
        TaggerSpec { kind, augment }
    }

    pub fn plain(kind: TaggerKind) -> Self {
        TaggerSpec::new(kind, Augment::None)
    }
}

impl fmt::Display for TaggerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.as_str(), self.augment.suffix())
    }
}

impl FromStr for TaggerSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, augment) = match s.split_once('+') {
            None => (s, Augment::None),
            Some((n, "clp")) => (n, Augment::Clp),
            Some((n, "clpa")) => (n, Augment::Clpa),
            Some(_) => return Err(HarnessError::UnknownTagger(s.to_string())),
        };
        let kind = TaggerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == name)
            .ok_or_else(|| HarnessError::UnknownTagger(s.to_string()))?;
        Ok(TaggerSpec { kind, augment })
    }
}

/// Hyperparameters for every tagger family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    /// Used by `crf-mod`; `crf` takes the same settings with the basic template.
    pub crf: CrfConfig,
    pub neural: NeuralConfig,
    pub gdb: GdbConfig,
    pub projection: ProjectionConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            crf: CrfConfig::extended(),
            neural: NeuralConfig::default(),
            gdb: GdbConfig::default(),
            projection: ProjectionConfig::default(),
        }
    }
}

/// Unannotated resources shared by every training run of an experiment.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    /// Raw Griko text for gdb.
    pub mono: Vec<Sentence>,
    pub clp: Option<TagDictionary>,
    pub clpa: Option<TagDictionary>,
}

impl Resources {
    /// Projects the dictionaries needed by `augments` from `parallel`, whose
    /// narratives in `test_ids` count as test side.
    pub fn build(
        mono: Vec<Sentence>,
        parallel: Option<&ParallelCorpus>,
        test_ids: &BTreeSet<String>,
        augments: impl IntoIterator<Item = Augment>,
        cfg: &ProjectionConfig,
    ) -> Result<Self, HarnessError> {
        let mut res = Resources {
            mono,
            ..Default::default()
        };
        for a in augments.into_iter().collect::<BTreeSet<_>>() {
            let Some(mode) = a.mode() else { continue };
            let parallel = parallel.ok_or_else(|| HarnessError::MissingParallel(a.suffix().to_string()))?;
            let train: BTreeSet<String> = parallel
                .pairs
                .iter()
                .map(|p| p.id().to_string())
                .filter(|id| !test_ids.contains(id))
                .collect();
            let dict = projection::project_corpus(parallel, &train, test_ids, mode, cfg)?.dictionary;
            match a {
                Augment::Clp => res.clp = Some(dict),
                Augment::Clpa => res.clpa = Some(dict),
                Augment::None => {}
            }
        }
        Ok(res)
    }

    fn dictionary(&self, augment: Augment) -> Result<Option<&TagDictionary>, HarnessError> {
        match augment {
            Augment::None => Ok(None),
            Augment::Clp => self
                .clp
                .as_ref()
                .map(Some)
                .ok_or_else(|| HarnessError::MissingParallel("+clp".into())),
            Augment::Clpa => self
                .clpa
                .as_ref()
                .map(Some)
                .ok_or_else(|| HarnessError::MissingParallel("+clpa".into())),
        }
    }
}

/// Unsupervised raw text of a corpus.
pub fn raw_text(corpus: &Corpus) -> Vec<Sentence> {
    corpus
        .active_sentences()
        .map(|s| Sentence::untagged(s.tokens.clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorityModel {
    pub by_type: HashMap<String, Tag>,
    pub fallback: Tag,
}

impl MajorityModel {
    pub fn train(annotated: &[Sentence], supervision: Option<&TagDictionary>) -> Result<Self, HarnessError> {
        let mut counts: HashMap<&str, BTreeMap<&Tag, usize>> = HashMap::new();
        let mut totals: BTreeMap<&Tag, usize> = BTreeMap::new();
        for s in annotated.iter().filter(|s| !s.excluded) {
            let Some(tags) = &s.tags else { continue };
            for (w, t) in s.norms().zip(tags) {
                *counts.entry(w).or_default().entry(t).or_default() += 1;
                *totals.entry(t).or_default() += 1;
            }
        }
        if let Some(dict) = supervision {
            for (w, entries) in dict.iter() {
                for e in entries {
                    *counts.entry(w).or_default().entry(&e.tag).or_default() += 1;
                }
            }
        }
        let best = |m: &BTreeMap<&Tag, usize>| {
            m.iter()
                .fold(None, |acc: Option<(&Tag, usize)>, (t, c)| match acc {
                    Some((_, bc)) if bc >= *c => acc,
                    _ => Some((t, *c)),
                })
                .map(|(t, _)| t.clone())
        };
        let fallback = best(&totals).ok_or(HarnessError::Crf(CrfError::NoTrainingData))?;
        let by_type = counts
            .iter()
            .filter_map(|(w, m)| best(m).map(|t| (w.to_string(), t)))
            .collect();
        Ok(MajorityModel { by_type, fallback })
    }

    pub fn predict(&self, sentence: &Sentence) -> Vec<Tag> {
        sentence
            .norms()
            .map(|w| self.by_type.get(w).unwrap_or(&self.fallback).clone())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum TrainedTagger {
    Majority(MajorityModel),
    Crf(CrfModel),
    Neural(NeuralModel),
    Gdb(Box<GdbModel>),
}

impl TrainedTagger {
    /// Tags with a per-token confidence in [0, 1].
    pub fn predict(&self, sentence: &Sentence) -> (Vec<Tag>, Vec<f64>) {
        if sentence.is_empty() {
            return (Vec::new(), Vec::new());
        }
        match self {
            TrainedTagger::Majority(m) => {
                let tags = m.predict(sentence);
                let n = tags.len();
                (tags, vec![1.0; n])
            }
            TrainedTagger::Crf(m) => m.predict_with_confidence(sentence),
            TrainedTagger::Neural(m) => m.predict(sentence),
            TrainedTagger::Gdb(m) => m.hmm.predict_with_confidence(sentence),
        }
    }

    pub fn tag(&self, sentence: &Sentence) -> Vec<Tag> {
        self.predict(sentence).0
    }

    pub fn tag_all(&self, sentences: &[Sentence]) -> Vec<Vec<Tag>> {
        sentences.iter().map(|s| self.tag(s)).collect()
    }
}

/// Trains one tagger on the annotated sentences plus the shared resources.
pub fn train_tagger(
    spec: TaggerSpec,
    annotated: &[Sentence],
    res: &Resources,
    cfg: &HarnessConfig,
) -> Result<TrainedTagger, HarnessError> {
    let dict = res.dictionary(spec.augment)?;
    let annotated: Vec<Sentence> = annotated
        .iter()
        .filter(|s| !s.excluded && s.is_tagged() && !s.is_empty())
        .cloned()
        .collect();
    Ok(match spec.kind {
        TaggerKind::Majority => TrainedTagger::Majority(MajorityModel::train(&annotated, dict)?),
        TaggerKind::Crf | TaggerKind::CrfMod => {
            let template = if spec.kind == TaggerKind::Crf {
                FeatureTemplateConfig::basic()
            } else {
                cfg.crf.template
            };
            let ccfg = CrfConfig {
                template,
                ..cfg.crf.clone()
            };
            TrainedTagger::Crf(crf::train_crf(&annotated, dict, &ccfg)?.0)
        }
        TaggerKind::Neural => {
            let mut data = annotated;
            if let Some(d) = dict {
                data.extend(crf::supervision_sentences(d));
            }
            let ncfg = NeuralConfig {
                dev_size: cfg.neural.dev_size.min(data.len() / 10),
                ..cfg.neural.clone()
            };
            TrainedTagger::Neural(neural::train_neural(&data, &ncfg)?.0)
        }
        TaggerKind::Gdb => {
            let empty = TagDictionary::new();
            let extra = dict.unwrap_or(&empty);
            TrainedTagger::Gdb(Box::new(semisup::train_gdb(&res.mono, &annotated, extra, &cfg.gdb)?))
        }
    })
}
