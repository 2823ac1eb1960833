use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{raw_text, train_tagger, HarnessConfig, HarnessError, Resources, TaggerKind, TaggerSpec, TrainedTagger};
use crate::corpus::{Corpus, Narrative, ParallelCorpus, Sentence, Tag};
use crate::metrics::{agreement, token_accuracy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlConfig {
    /// Candidate taggers; earlier entries win accuracy ties.
    pub taggers: Vec<TaggerSpec>,
    pub harness: HarnessConfig,
    /// Share of the initial pool held out to pick the first tagger.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for AlConfig {
    fn default() -> Self {
        AlConfig {
            taggers: vec![
                TaggerSpec::plain(TaggerKind::Crf),
                TaggerSpec::plain(TaggerKind::CrfMod),
                TaggerSpec::plain(TaggerKind::Gdb),
            ],
            harness: HarnessConfig::default(),
            holdout_fraction: 0.1,
            seed: 0,
        }
    }
}

/// All taggers trained on one state of the pool.
#[derive(Debug)]
pub struct Snapshot {
    /// Number of narratives accepted into the pool before training.
    pub version: usize,
    pub models: Vec<(TaggerSpec, TrainedTagger)>,
    /// Index of the model that serves proposals.
    pub selected: usize,
    /// Per-model holdout accuracy when the selection came from the split.
    pub holdout: Option<Vec<f64>>,
}

impl Snapshot {
    pub fn method(&self) -> TaggerSpec {
        self.models[self.selected].0
    }

    pub fn serving(&self) -> &TrainedTagger {
        &self.models[self.selected].1
    }
}

/// A self-contained retraining request that can run off the learner's thread.
#[derive(Debug, Clone)]
pub struct TrainingJob {
    version: usize,
    pool: Vec<Sentence>,
    resources: Arc<Resources>,
    cfg: Arc<AlConfig>,
    selected: Option<usize>,
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl TrainingJob {
    pub fn version(&self) -> usize {
        self.version
    }

    fn train_all(&self, data: &[Sentence]) -> Result<Vec<(TaggerSpec, TrainedTagger)>, HarnessError> {
        self.cfg
            .taggers
            .par_iter()
            .map(|spec| Ok((*spec, train_tagger(*spec, data, &self.resources, &self.cfg.harness)?)))
            .collect()
    }

    pub fn run(self) -> Result<Snapshot, HarnessError> {
        let models = self.train_all(&self.pool)?;
        let (selected, holdout) = match self.selected {
            Some(s) => (s, None),
            None => {
                let mut idx: Vec<usize> = (0..self.pool.len()).collect();
                idx.shuffle(&mut ChaCha8Rng::seed_from_u64(self.cfg.seed));
                let n_hold = ((self.pool.len() as f64 * self.cfg.holdout_fraction).round() as usize)
                    .clamp(1, self.pool.len().saturating_sub(1).max(1));
                let held: BTreeSet<usize> = idx[..n_hold].iter().copied().collect();
                let (dev, train): (Vec<_>, Vec<_>) = self
                    .pool
                    .iter()
                    .enumerate()
                    .partition(|(i, _)| held.contains(i));
                let dev: Vec<Sentence> = dev.into_iter().map(|(_, s)| s.clone()).collect();
                let train: Vec<Sentence> = train.into_iter().map(|(_, s)| s.clone()).collect();
                let scores: Vec<f64> = self
                    .train_all(&train)?
                    .iter()
                    .map(|(_, m)| token_accuracy(&dev, &m.tag_all(&dev)).percent())
                    .collect();
                (argmax_first(&scores), Some(scores))
            }
        };
        Ok(Snapshot {
            version: self.version,
            models,
            selected,
            holdout,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposedSentence {
    /// Position of the sentence in the narrative.
    pub index: usize,
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
    pub confidence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub narrative_id: String,
    pub model_version: usize,
    pub method: String,
    /// Non-excluded sentences only.
    pub sentences: Vec<ProposedSentence>,
}

impl Proposal {
    pub fn task_id(&self) -> String {
        format!("{}@v{}", self.narrative_id, self.model_version)
    }

    pub fn predicted(&self) -> Vec<Vec<Tag>> {
        self.sentences.iter().map(|s| s.tags.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub narrative_id: String,
    pub model_version: usize,
    /// Tagger whose output was shown to the annotator.
    pub method: String,
    pub tokens: usize,
    /// Agreement of the shown predictions with the corrections (%).
    pub accuracy: f64,
    pub changed_count: usize,
    /// Every tagger's agreement with the corrections (%).
    pub tagger_accuracy: BTreeMap<String, f64>,
    /// The first snapshot's serving tagger on this narrative (%).
    pub static_accuracy: f64,
    /// Best tagger of the first snapshot on this narrative (%).
    pub best_static_accuracy: f64,
    /// Serving tagger on the gold narratives still queued afterwards (%).
    pub remaining_accuracy: Option<f64>,
    pub final_story_id: String,
    /// Serving tagger on the longest narrative's gold tags (%).
    pub final_story_accuracy: Option<f64>,
    pub final_story_by_tagger: BTreeMap<String, f64>,
    pub pool_sentences: usize,
    pub remaining: usize,
    /// Set once any accepted narrative came back uncorrected.
    pub noisy_pool: bool,
}

/// Supplies corrected tags for a proposal, one sequence per proposed sentence.
pub trait Annotator {
    fn annotate(&mut self, proposal: &Proposal, narrative: &Narrative) -> Result<Vec<Vec<Tag>>, HarnessError>;

    /// False when the annotator returns the predictions unchanged.
    fn corrects(&self) -> bool {
        true
    }
}

/// Returns the narrative's gold tags.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleAnnotator;

impl Annotator for OracleAnnotator {
    fn annotate(&mut self, _: &Proposal, narrative: &Narrative) -> Result<Vec<Vec<Tag>>, HarnessError> {
        narrative
            .active_sentences()
            .map(|s| s.tags.clone())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| HarnessError::AnnotatorUnavailable(format!("{} has no gold tags", narrative.id)))
    }
}

/// Accepts predictions as they are.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassThroughAnnotator;

impl Annotator for PassThroughAnnotator {
    fn annotate(&mut self, proposal: &Proposal, _: &Narrative) -> Result<Vec<Vec<Tag>>, HarnessError> {
        Ok(proposal.predicted())
    }

    fn corrects(&self) -> bool {
        false
    }
}

/// Narrative-level active-learning state, driven step by step: `job` →
/// `TrainingJob::run` → `install` → `propose` → `accept`.
#[derive(Debug, Clone)]
pub struct ActiveLearner {
    cfg: Arc<AlConfig>,
    resources: Arc<Resources>,
    pool: Vec<Sentence>,
    queue: VecDeque<Narrative>,
    final_story: Narrative,
    current: Option<Arc<Snapshot>>,
    initial: Option<Arc<Snapshot>>,
    next_selected: Option<usize>,
    log: Vec<IterationRecord>,
}

impl ActiveLearner {
    /// Queues `queue` by non-excluded token length, ties by id. Projection
    /// dictionaries come from `parallel`, whose queued narratives count as
    /// test side.
    pub fn new(
        base: &Corpus,
        queue: &Corpus,
        mono: &Corpus,
        parallel: Option<&ParallelCorpus>,
        cfg: AlConfig,
    ) -> Result<Self, HarnessError> {
        if cfg.taggers.is_empty() {
            return Err(HarnessError::NoTaggers);
        }
        if !(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0) {
            return Err(HarnessError::InvalidConfig("holdout_fraction must be in (0, 1)".into()));
        }
        let mut ordered = queue.narratives.clone();
        ordered.sort_by(|a, b| a.token_length().cmp(&b.token_length()).then_with(|| a.id.cmp(&b.id)));
        let final_story = ordered.last().cloned().ok_or(HarnessError::QueueEmpty)?;
        let test_ids: BTreeSet<String> = ordered.iter().map(|n| n.id.clone()).collect();
        let resources = Resources::build(
            raw_text(mono),
            parallel,
            &test_ids,
            cfg.taggers.iter().map(|t| t.augment),
            &cfg.harness.projection,
        )?;
        Ok(ActiveLearner {
            cfg: Arc::new(cfg),
            resources: Arc::new(resources),
            pool: base.training_sentences(),
            queue: ordered.into(),
            final_story,
            current: None,
            initial: None,
            next_selected: None,
            log: Vec::new(),
        })
    }

    pub fn config(&self) -> &AlConfig {
        &self.cfg
    }

    /// Number of accepted narratives.
    pub fn iteration(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &[IterationRecord] {
        &self.log
    }

    pub fn pool(&self) -> &[Sentence] {
        &self.pool
    }

    pub fn queue(&self) -> impl Iterator<Item = &Narrative> {
        self.queue.iter()
    }

    pub fn head(&self) -> Option<&Narrative> {
        self.queue.front()
    }

    pub fn is_done(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn snapshot(&self) -> Option<&Arc<Snapshot>> {
        self.current.as_ref()
    }

    /// True when the installed snapshot was trained on the current pool.
    pub fn is_current(&self) -> bool {
        self.current.as_ref().is_some_and(|s| s.version == self.log.len())
    }

    pub fn job(&self) -> TrainingJob {
        TrainingJob {
            version: self.log.len(),
            pool: self.pool.clone(),
            resources: Arc::clone(&self.resources),
            cfg: Arc::clone(&self.cfg),
            selected: self.next_selected,
        }
    }

    /// Swaps in a snapshot trained on the current pool.
    pub fn install(&mut self, snapshot: Arc<Snapshot>) -> Result<(), HarnessError> {
        if snapshot.version != self.log.len() {
            return Err(HarnessError::StaleSnapshot {
                expected: self.log.len(),
                got: snapshot.version,
            });
        }
        if self.initial.is_none() {
            self.initial = Some(Arc::clone(&snapshot));
        }
        self.current = Some(snapshot);
        Ok(())
    }

    /// Convenience for `install(Arc::new(job().run()?))`.
    pub fn retrain(&mut self) -> Result<(), HarnessError> {
        let snap = self.job().run()?;
        self.install(Arc::new(snap))
    }

    /// Predictions of the serving tagger for the next queued narrative.
    pub fn propose(&self) -> Result<Proposal, HarnessError> {
        let snap = self.current.as_ref().ok_or(HarnessError::ModelNotReady)?;
        let narrative = self.queue.front().ok_or(HarnessError::QueueEmpty)?;
        let model = snap.serving();
        let sentences = narrative
            .sentences
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.excluded)
            .map(|(index, s)| {
                let (tags, confidence) = model.predict(s);
                ProposedSentence {
                    index,
                    tokens: s.tokens.iter().map(|t| t.surface.clone()).collect(),
                    tags,
                    confidence,
                }
            })
            .collect();
        Ok(Proposal {
            narrative_id: narrative.id.clone(),
            model_version: snap.version,
            method: snap.method().to_string(),
            sentences,
        })
    }

    /// Checks that `corrected` fits the next narrative without changing state.
    pub fn check_corrections(&self, corrected: &[Vec<Tag>]) -> Result<(), HarnessError> {
        let narrative = self.queue.front().ok_or(HarnessError::QueueEmpty)?;
        let lengths: Vec<usize> = narrative.active_sentences().map(Sentence::len).collect();
        let got: Vec<usize> = corrected.iter().map(Vec::len).collect();
        if lengths != got {
            return Err(HarnessError::LengthMismatch {
                expected: lengths.len(),
                lengths,
                got,
            });
        }
        Ok(())
    }

    /// Moves the next narrative, with `corrected` tags, into the pool.
    pub fn accept(&mut self, corrected: Vec<Vec<Tag>>, noisy: bool) -> Result<IterationRecord, HarnessError> {
        let snap = Arc::clone(self.current.as_ref().ok_or(HarnessError::ModelNotReady)?);
        self.check_corrections(&corrected)?;
        let narrative = self.queue.front().expect("checked non-empty").clone();
        let active: Vec<Sentence> = narrative.active_sentences().cloned().collect();
        let gold_view: Vec<Sentence> = active
            .iter()
            .zip(&corrected)
            .map(|(s, t)| Sentence {
                tags: Some(t.clone()),
                ..s.clone()
            })
            .collect();

        let score = |m: &TrainedTagger| agreement(&m.tag_all(&active), &corrected);
        let per_model: Vec<f64> = snap.models.iter().map(|(_, m)| score(m).percent()).collect();
        let shown = score(snap.serving());
        let tagger_accuracy = snap
            .models
            .iter()
            .zip(&per_model)
            .map(|((s, _), a)| (s.to_string(), *a))
            .collect();

        let initial = self.initial.as_ref().expect("installed before accept");
        let static_scores: Vec<f64> = initial.models.iter().map(|(_, m)| score(m).percent()).collect();

        let final_gold: Vec<Sentence> = self.final_story.active_sentences().cloned().collect();
        let final_has_gold = final_gold.iter().all(Sentence::is_tagged);
        let final_story_by_tagger: BTreeMap<String, f64> = if final_has_gold {
            snap.models
                .iter()
                .map(|(s, m)| (s.to_string(), token_accuracy(&final_gold, &m.tag_all(&final_gold)).percent()))
                .collect()
        } else {
            BTreeMap::new()
        };

        let rest: Vec<Sentence> = self.queue.iter().skip(1).flat_map(|n| n.active_sentences().cloned()).collect();
        let remaining_accuracy = (!rest.is_empty() && rest.iter().all(Sentence::is_tagged))
            .then(|| token_accuracy(&rest, &snap.serving().tag_all(&rest)).percent());

        self.pool.extend(gold_view);
        self.queue.pop_front();
        self.next_selected = Some(argmax_first(&per_model));
        let noisy_pool = noisy || self.log.last().is_some_and(|r| r.noisy_pool);
        let record = IterationRecord {
            iteration: self.log.len() + 1,
            narrative_id: narrative.id.clone(),
            model_version: snap.version,
            method: snap.method().to_string(),
            tokens: shown.total,
            accuracy: shown.percent(),
            changed_count: shown.total - shown.correct,
            tagger_accuracy,
            static_accuracy: static_scores[initial.selected],
            best_static_accuracy: static_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            remaining_accuracy,
            final_story_id: self.final_story.id.clone(),
            final_story_accuracy: final_story_by_tagger.get(&snap.method().to_string()).copied(),
            final_story_by_tagger,
            pool_sentences: self.pool.len(),
            remaining: self.queue.len(),
            noisy_pool,
        };
        self.log.push(record.clone());
        Ok(record)
    }
}

/// Runs the loop until the queue is empty, retraining before every proposal.
pub fn run_active_learning(
    learner: &mut ActiveLearner,
    annotator: &mut dyn Annotator,
) -> Result<Vec<IterationRecord>, HarnessError> {
    while let Some(narrative) = learner.head().cloned() {
        learner.retrain()?;
        let proposal = learner.propose()?;
        let corrected = annotator.annotate(&proposal, &narrative)?;
        learner.accept(corrected, !annotator.corrects())?;
    }
    Ok(learner.log().to_vec())
}
