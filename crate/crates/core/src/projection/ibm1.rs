//! IBM Model 1 with a NULL source word. Italian is the source side (`e`),
//! Griko the target side (`f`); `t(f|e)` is stored only for pairs that
//! co-occur in some sentence pair.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{ProjectionError, SentencePair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentModel {
    /// Italian vocabulary; word index `i` is source id `i + 1` (0 is NULL).
    source: IndexMap<String, usize>,
    target: IndexMap<String, usize>,
    pub source_freq: Vec<usize>,
    pub target_freq: Vec<usize>,
    /// Slot of `(e, f)` in `t`, in first co-occurrence order.
    slots: HashMap<(usize, usize), usize>,
    slot_e: Vec<usize>,
    t: Vec<f64>,
    /// Corpus log-likelihood before the first update and after every
    /// iteration (the constant length term is omitted).
    pub log_likelihood: Vec<f64>,
}

struct Encoded {
    /// `slots[j][i]`: slot of (e_i, f_j), with `i = 0` the NULL word.
    slots: Vec<Vec<usize>>,
}

impl AlignmentModel {
    pub fn source_id(&self, e: &str) -> Option<usize> {
        self.source.get(e).map(|i| i + 1)
    }

    pub fn target_id(&self, f: &str) -> Option<usize> {
        self.target.get(f).copied()
    }

    /// `t(f|e)`; zero for pairs never seen together.
    pub fn t(&self, f: &str, e: &str) -> f64 {
        match (self.target_id(f), self.source_id(e)) {
            (Some(f), Some(e)) => self.t_ids(f, e),
            _ => 0.0,
        }
    }

    pub fn t_null(&self, f: &str) -> f64 {
        self.target_id(f).map_or(0.0, |f| self.t_ids(f, 0))
    }

    fn t_ids(&self, f: usize, e: usize) -> f64 {
        self.slots.get(&(e, f)).map_or(0.0, |&s| self.t[s])
    }

    pub fn italian_frequency(&self, e: &str) -> usize {
        self.source.get(e).map_or(0, |&i| self.source_freq[i])
    }

    pub fn griko_frequency(&self, f: &str) -> usize {
        self.target.get(f).map_or(0, |&i| self.target_freq[i])
    }

    /// `Σ_f t(f|e)` for every source id including NULL.
    pub fn source_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.source.len() + 1];
        for (slot, &e) in self.slot_e.iter().enumerate() {
            sums[e] += self.t[slot];
        }
        sums
    }

    fn encode(&mut self, pair: &SentencePair) -> Encoded {
        let e_ids: Vec<usize> = std::iter::once(0)
            .chain(pair.italian.iter().map(|e| self.source[e.as_str()] + 1))
            .collect();
        let slots = pair
            .griko
            .iter()
            .map(|f| {
                let f = self.target[f.as_str()];
                e_ids
                    .iter()
                    .map(|&e| {
                        let next = self.t.len();
                        let slot = *self.slots.entry((e, f)).or_insert(next);
                        if slot == next {
                            self.t.push(0.0);
                            self.slot_e.push(e);
                        }
                        slot
                    })
                    .collect()
            })
            .collect();
        Encoded { slots }
    }
}

fn e_step(t: &[f64], data: &[Encoded], counts: &mut [f64]) -> f64 {
    counts.fill(0.0);
    let mut ll = 0.0;
    for sent in data {
        for row in &sent.slots {
            let denom: f64 = row.iter().map(|&s| t[s]).sum();
            ll += (denom / row.len() as f64).ln();
            for &s in row {
                counts[s] += t[s] / denom;
            }
        }
    }
    ll
}

/// EM training from a uniform start: each source word initially spreads its
/// mass evenly over the target words it co-occurs with.
pub fn train_ibm1(pairs: &[SentencePair], iters: usize) -> Result<AlignmentModel, ProjectionError> {
    if pairs.iter().all(|p| p.griko.is_empty()) {
        return Err(ProjectionError::EmptyCorpus);
    }
    if iters == 0 {
        return Err(ProjectionError::InvalidConfig("iters must be ≥ 1".into()));
    }
    let mut model = AlignmentModel {
        source: IndexMap::new(),
        target: IndexMap::new(),
        source_freq: Vec::new(),
        target_freq: Vec::new(),
        slots: HashMap::new(),
        slot_e: Vec::new(),
        t: Vec::new(),
        log_likelihood: Vec::new(),
    };
    for p in pairs {
        for e in &p.italian {
            let n = model.source.len();
            let id = *model.source.entry(e.clone()).or_insert(n);
            if id == n {
                model.source_freq.push(0);
            }
            model.source_freq[id] += 1;
        }
        for f in &p.griko {
            let n = model.target.len();
            let id = *model.target.entry(f.clone()).or_insert(n);
            if id == n {
                model.target_freq.push(0);
            }
            model.target_freq[id] += 1;
        }
    }
    let data: Vec<Encoded> = pairs.iter().map(|p| model.encode(p)).collect();

    let mut fanout = vec![0usize; model.source.len() + 1];
    for &e in &model.slot_e {
        fanout[e] += 1;
    }
    for (slot, &e) in model.slot_e.iter().enumerate() {
        model.t[slot] = 1.0 / fanout[e] as f64;
    }

    let mut counts = vec![0.0; model.t.len()];
    let mut totals = vec![0.0; fanout.len()];
    for _ in 0..iters {
        let ll = e_step(&model.t, &data, &mut counts);
        model.log_likelihood.push(ll);
        totals.fill(0.0);
        for (slot, &e) in model.slot_e.iter().enumerate() {
            totals[e] += counts[slot];
        }
        for (slot, &e) in model.slot_e.iter().enumerate() {
            if totals[e] > 0.0 {
                model.t[slot] = counts[slot] / totals[e];
            }
        }
    }
    let ll = e_step(&model.t, &data, &mut counts);
    model.log_likelihood.push(ll);
    Ok(model)
}
