//! Service state: the learner, the record log, open tasks and retrain tickets.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use glossa::corpus::{parse_tag, AtomicTag, Tag};
use glossa::harness::{ActiveLearner, HarnessError, IterationRecord, Proposal, ProposedSentence, Snapshot, TrainingJob};
use serde::{Deserialize, Serialize};
use tokio::sync::Notify;

use crate::config::ServiceInputs;
use crate::store::{AnnotationRecord, RecordLog};
use crate::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    InReview,
    Accepted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub task_id: String,
    pub narrative_id: String,
    pub model_version: usize,
    pub method: String,
    pub sentences: Vec<ProposedSentence>,
    pub tagset: Vec<String>,
    pub status: TaskStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub annotator_id: String,
    /// One tag sequence per proposed sentence, as tag strings.
    pub tags: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receipt {
    pub task_id: String,
    pub narrative_id: String,
    pub changed_count: usize,
    /// Accepted narratives after this submission.
    pub iteration: usize,
    /// Retrain ticket; absent for re-reviews and for receipts rebuilt after a restart.
    pub ticket: Option<u64>,
    /// True when this submission re-reviewed an accepted task.
    pub review: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TicketStatus {
    Queued,
    Running,
    Done { version: usize, log: Vec<IterationRecord> },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TicketState {
    pub ticket: u64,
    /// Pool version the ticket waits for.
    pub target_version: usize,
    #[serde(flatten)]
    pub status: TicketStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub iteration: usize,
    pub remaining: usize,
    pub serving_version: Option<usize>,
    pub method: Option<String>,
    pub retraining: bool,
    pub reviews: usize,
    pub last_error: Option<String>,
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Serialize)]
struct CheckpointManifest<'a> {
    version: usize,
    method: String,
    taggers: Vec<String>,
    holdout: &'a Option<Vec<f64>>,
    pool_sentences: usize,
}

/// Single-writer state behind the service; every method runs under one lock.
#[derive(Debug)]
pub struct Core {
    learner: ActiveLearner,
    store: RecordLog,
    records: Vec<AnnotationRecord>,
    /// Latest receipt per accepted task id.
    receipts: BTreeMap<String, Receipt>,
    /// Final tags of the first accepted record per task id.
    accepted_tags: BTreeMap<String, Vec<Vec<Tag>>>,
    /// Predictions shown for each accepted task, for re-review change counts.
    accepted_predictions: BTreeMap<String, Vec<Vec<Tag>>>,
    open: Option<(Proposal, TaskStatus)>,
    tickets: BTreeMap<u64, TicketState>,
    next_ticket: u64,
    tagset: Vec<String>,
    checkpoints: PathBuf,
    retraining: bool,
    last_error: Option<String>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn changed(a: &[Vec<Tag>], b: &[Vec<Tag>]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).filter(|(p, q)| p != q).count())
        .sum()
}

impl Core {
    /// Opens the record log in `data_dir` and replays it, retraining at the
    /// same pool versions as the original run. Blocks while training.
    pub fn open(inputs: ServiceInputs, data_dir: &Path) -> Result<Self, ServiceError> {
        let checkpoints = data_dir.join("checkpoints");
        std::fs::create_dir_all(&checkpoints).map_err(|e| ServiceError::Io(checkpoints.display().to_string(), e))?;
        let (store, records) = RecordLog::open(&data_dir.join("annotations.ndjson"))?;
        let learner = ActiveLearner::new(&inputs.base, &inputs.queue, &inputs.mono, inputs.parallel.as_ref(), inputs.al)?;

        let mut tags: BTreeSet<String> = AtomicTag::ALL.iter().map(|t| t.as_str().to_string()).collect();
        for s in inputs.base.active_sentences().chain(inputs.queue.active_sentences()) {
            tags.extend(s.tags.iter().flatten().map(ToString::to_string));
        }
        let mut core = Core {
            learner,
            store,
            records: Vec::new(),
            receipts: BTreeMap::new(),
            accepted_tags: BTreeMap::new(),
            accepted_predictions: BTreeMap::new(),
            open: None,
            tickets: BTreeMap::new(),
            next_ticket: 0,
            tagset: tags.into_iter().collect(),
            checkpoints,
            retraining: false,
            last_error: None,
        };
        for r in records {
            core.replay(r)?;
        }
        Ok(core)
    }

    fn replay(&mut self, r: AnnotationRecord) -> Result<(), ServiceError> {
        if r.supersedes.is_some() {
            self.records.push(r);
            return Ok(());
        }
        let serving = self.learner.snapshot().map(|s| s.version);
        if serving != Some(r.model_version) {
            if r.model_version != self.learner.iteration() {
                return Err(ServiceError::Replay(format!(
                    "{} was served by v{} at iteration {}",
                    r.task_id,
                    r.model_version,
                    self.learner.iteration()
                )));
            }
            self.learner.retrain()?;
            self.write_checkpoint();
        }
        let proposal = self.learner.propose()?;
        if proposal.task_id() != r.task_id {
            return Err(ServiceError::Replay(format!("expected {}, log has {}", proposal.task_id(), r.task_id)));
        }
        self.learner.accept(r.tags.clone(), false)?;
        self.remember(&proposal, &r, None);
        self.records.push(r);
        Ok(())
    }

    fn remember(&mut self, proposal: &Proposal, r: &AnnotationRecord, ticket: Option<u64>) {
        self.accepted_predictions.insert(r.task_id.clone(), proposal.predicted());
        self.accepted_tags.insert(r.task_id.clone(), r.tags.clone());
        self.receipts.insert(
            r.task_id.clone(),
            Receipt {
                task_id: r.task_id.clone(),
                narrative_id: r.narrative_id.clone(),
                changed_count: r.changed_count,
                iteration: self.learner.iteration(),
                ticket,
                review: false,
            },
        );
    }

    pub fn learner(&self) -> &ActiveLearner {
        &self.learner
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn tagset(&self) -> &[String] {
        &self.tagset
    }

    /// Hands out the next narrative's predictions and marks the task in
    /// review. Repeated calls return the same task until it is accepted or
    /// the serving model changes.
    pub fn next_task(&mut self) -> Result<AnnotationTask, ServiceError> {
        let current = self.learner.propose()?;
        let reuse = self.open.as_ref().is_some_and(|(p, _)| p.task_id() == current.task_id());
        if !reuse {
            self.open = Some((current, TaskStatus::Pending));
        }
        let (proposal, status) = self.open.as_mut().expect("set above");
        *status = TaskStatus::InReview;
        Ok(AnnotationTask {
            task_id: proposal.task_id(),
            narrative_id: proposal.narrative_id.clone(),
            model_version: proposal.model_version,
            method: proposal.method.clone(),
            sentences: proposal.sentences.clone(),
            tagset: self.tagset.clone(),
            status: TaskStatus::InReview,
        })
    }

    fn parse_tags(tags: &[Vec<String>]) -> Result<Vec<Vec<Tag>>, ServiceError> {
        tags.iter()
            .map(|s| {
                s.iter()
                    .map(|t| parse_tag(t).map_err(|_| ServiceError::UnknownTag(t.clone())))
                    .collect()
            })
            .collect()
    }

    /// Validates, persists and applies a submission. Nothing is written when
    /// validation fails. Returns the receipt and whether a retrain was queued.
    pub fn submit(&mut self, task_id: &str, req: &SubmitRequest) -> Result<(Receipt, bool), ServiceError> {
        let tags = Self::parse_tags(&req.tags)?;
        if let Some(first) = self.accepted_tags.get(task_id) {
            return self.review(task_id, first.clone(), tags, &req.annotator_id).map(|r| (r, false));
        }
        let current = self.learner.propose()?;
        if current.task_id() != task_id {
            return Err(if self.records.iter().any(|r| r.task_id.split('@').next() == task_id.split('@').next())
                || self.learner.queue().any(|n| Some(n.id.as_str()) == task_id.split('@').next())
            {
                ServiceError::StaleTask {
                    task_id: task_id.to_string(),
                    current: current.task_id(),
                }
            } else {
                ServiceError::UnknownTask(task_id.to_string())
            });
        }
        let in_review = matches!(&self.open, Some((p, TaskStatus::InReview)) if p.task_id() == task_id);
        if !in_review {
            return Err(ServiceError::NotInReview(task_id.to_string()));
        }
        self.learner.check_corrections(&tags)?;
        let record = AnnotationRecord {
            task_id: task_id.to_string(),
            narrative_id: current.narrative_id.clone(),
            model_version: current.model_version,
            changed_count: changed(&current.predicted(), &tags),
            tags,
            annotator_id: req.annotator_id.clone(),
            timestamp_ms: now_ms(),
            supersedes: None,
        };
        self.store.append(&record)?;
        self.learner.accept(record.tags.clone(), false)?;
        self.open = None;
        let ticket = self.new_ticket(self.learner.iteration());
        self.remember(&current, &record, Some(ticket));
        self.records.push(record);
        Ok((self.receipts[task_id].clone(), true))
    }

    /// Identical tags return the stored receipt; different tags append a
    /// superseding record. Neither touches the training pool.
    fn review(
        &mut self,
        task_id: &str,
        first: Vec<Vec<Tag>>,
        tags: Vec<Vec<Tag>>,
        annotator_id: &str,
    ) -> Result<Receipt, ServiceError> {
        let latest = self
            .records
            .iter()
            .rev()
            .find(|r| r.task_id == task_id || r.supersedes.as_deref() == Some(task_id))
            .map(|r| &r.tags)
            .unwrap_or(&first);
        if *latest == tags {
            return Ok(self.receipts[task_id].clone());
        }
        let lengths = |t: &[Vec<Tag>]| t.iter().map(Vec::len).collect::<Vec<_>>();
        if lengths(&first) != lengths(&tags) {
            return Err(HarnessError::LengthMismatch {
                expected: first.len(),
                lengths: lengths(&first),
                got: lengths(&tags),
            }
            .into());
        }
        let base = &self.receipts[task_id];
        let record = AnnotationRecord {
            task_id: format!("{task_id}#r{}", self.records.iter().filter(|r| r.supersedes.as_deref() == Some(task_id)).count() + 1),
            narrative_id: base.narrative_id.clone(),
            model_version: self.records.iter().find(|r| r.task_id == task_id).map_or(0, |r| r.model_version),
            changed_count: changed(&self.accepted_predictions[task_id], &tags),
            tags,
            annotator_id: annotator_id.to_string(),
            timestamp_ms: now_ms(),
            supersedes: Some(task_id.to_string()),
        };
        self.store.append(&record)?;
        let receipt = Receipt {
            task_id: record.task_id.clone(),
            narrative_id: record.narrative_id.clone(),
            changed_count: record.changed_count,
            iteration: self.learner.iteration(),
            ticket: None,
            review: true,
        };
        self.records.push(record);
        self.receipts.insert(task_id.to_string(), receipt.clone());
        Ok(receipt)
    }

    fn new_ticket(&mut self, target_version: usize) -> u64 {
        if let Some(t) = self
            .tickets
            .values()
            .find(|t| t.target_version == target_version && matches!(t.status, TicketStatus::Queued | TicketStatus::Running))
        {
            return t.ticket;
        }
        let id = self.next_ticket;
        self.next_ticket += 1;
        self.tickets.insert(
            id,
            TicketState {
                ticket: id,
                target_version,
                status: TicketStatus::Queued,
            },
        );
        id
    }

    /// Queues a retrain of the current pool. Fails when the serving model is
    /// already trained on it.
    pub fn request_retrain(&mut self) -> Result<u64, ServiceError> {
        if self.learner.is_current() {
            return Err(ServiceError::NothingToRetrain);
        }
        Ok(self.new_ticket(self.learner.iteration()))
    }

    /// Queues the initial training when no model is serving.
    pub fn ensure_model(&mut self) -> Option<u64> {
        (!self.learner.is_current()).then(|| self.new_ticket(self.learner.iteration()))
    }

    pub fn ticket(&self, id: u64) -> Result<TicketState, ServiceError> {
        self.tickets.get(&id).cloned().ok_or(ServiceError::UnknownTicket(id))
    }

    /// Next job for the worker, marking waiting tickets running.
    pub fn begin_retrain(&mut self) -> Option<TrainingJob> {
        let waiting = self
            .tickets
            .values()
            .any(|t| matches!(t.status, TicketStatus::Queued | TicketStatus::Running));
        if !waiting {
            return None;
        }
        if self.learner.is_current() {
            let version = self.learner.iteration();
            self.settle(version);
            return None;
        }
        for t in self.tickets.values_mut() {
            if t.status == TicketStatus::Queued {
                t.status = TicketStatus::Running;
            }
        }
        self.retraining = true;
        Some(self.learner.job())
    }

    fn settle(&mut self, version: usize) {
        let log = self.learner.log().to_vec();
        for t in self.tickets.values_mut() {
            if t.target_version <= version && matches!(t.status, TicketStatus::Queued | TicketStatus::Running) {
                t.status = TicketStatus::Done {
                    version,
                    log: log.clone(),
                };
            }
        }
    }

    /// Installs a finished job. A snapshot outdated by submissions made while
    /// it trained is dropped and the worker goes round again.
    pub fn finish_retrain(&mut self, result: Result<Snapshot, String>) {
        self.retraining = false;
        match result {
            Ok(snap) => {
                let version = snap.version;
                match self.learner.install(Arc::new(snap)) {
                    Ok(()) => {
                        self.last_error = None;
                        self.write_checkpoint();
                        self.settle(version);
                    }
                    Err(HarnessError::StaleSnapshot { .. }) => {}
                    Err(e) => self.fail(e.to_string()),
                }
            }
            Err(e) => self.fail(e),
        }
    }

    fn fail(&mut self, error: String) {
        for t in self.tickets.values_mut() {
            if matches!(t.status, TicketStatus::Queued | TicketStatus::Running) {
                t.status = TicketStatus::Failed { error: error.clone() };
            }
        }
        self.last_error = Some(error);
    }

    fn write_checkpoint(&mut self) {
        let Some(snap) = self.learner.snapshot() else { return };
        let manifest = CheckpointManifest {
            version: snap.version,
            method: snap.method().to_string(),
            taggers: snap.models.iter().map(|(s, _)| s.to_string()).collect(),
            holdout: &snap.holdout,
            pool_sentences: self.learner.pool().len(),
        };
        let path = self.checkpoints.join(format!("v{}.json", snap.version));
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        if let Err(e) = std::fs::write(&path, text) {
            self.last_error = Some(format!("{}: {e}", path.display()));
        }
    }

    pub fn metrics(&self) -> Metrics {
        let snap = self.learner.snapshot();
        Metrics {
            iteration: self.learner.iteration(),
            remaining: self.learner.queue().count(),
            serving_version: snap.map(|s| s.version),
            method: snap.map(|s| s.method().to_string()),
            retraining: self.retraining,
            reviews: self.records.iter().filter(|r| r.supersedes.is_some()).count(),
            last_error: self.last_error.clone(),
            log: self.learner.log().to_vec(),
        }
    }
}

/// Core plus the retrain worker's wake-up signal.
#[derive(Debug)]
pub struct Shared {
    core: Mutex<Core>,
    wake: Notify,
}

impl Shared {
    pub fn new(core: Core) -> Arc<Self> {
        Arc::new(Shared {
            core: Mutex::new(core),
            wake: Notify::new(),
        })
    }

    pub fn lock(&self) -> MutexGuard<'_, Core> {
        self.core.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn wake(&self) {
        self.wake.notify_one();
    }

    /// Single background trainer: runs jobs off the lock and swaps models in.
    pub async fn run_worker(self: Arc<Self>) {
        loop {
            loop {
                let job = self.lock().begin_retrain();
                let Some(job) = job else { break };
                let result = match tokio::task::spawn_blocking(move || job.run()).await {
                    Ok(r) => r.map_err(|e| e.to_string()),
                    Err(e) => Err(format!("training task failed: {e}")),
                };
                let failed = result.is_err();
                self.lock().finish_retrain(result);
                if failed {
                    break;
                }
            }
            self.wake.notified().await;
        }
    }
}
