//! Type/context graph and Modified Adsorption label propagation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::SemisupError;
use crate::corpus::{Sentence, Tag};
use crate::crf::{BOS, EOS};
use crate::dict::{Provenance, TagDictionary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    /// Minimum corpus frequency for an unseeded type to get a node.
    pub min_type_freq: usize,
    pub max_suffix_len: usize,
    /// Injection strength of gold seeds relative to projected ones.
    pub gold_confidence: f64,
    pub projected_confidence: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            min_type_freq: 2,
            max_suffix_len: 3,
            gold_confidence: 1.0,
            projected_confidence: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Type(String),
    Feature(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    /// Distribution over [`LabelGraph::labels`].
    pub dist: Vec<f64>,
    /// Multiplies the injection term; 1.0 is a plain seed.
    pub confidence: f64,
}

/// Undirected weighted graph over word types and context features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGraph {
    pub nodes: Vec<NodeKind>,
    index: HashMap<NodeKind, usize>,
    /// Symmetric adjacency lists, sorted by neighbour id.
    pub edges: Vec<Vec<(usize, f64)>>,
    /// Label space: union of all seed tags, sorted.
    pub labels: Vec<Tag>,
    pub seeds: BTreeMap<usize, Seed>,
}

impl LabelGraph {
    pub fn node(&self, kind: &NodeKind) -> Option<usize> {
        self.index.get(kind).copied()
    }

    pub fn type_node(&self, word: &str) -> Option<usize> {
        self.node(&NodeKind::Type(word.to_string()))
    }

    pub fn feature_node(&self, feature: &str) -> Option<usize> {
        self.node(&NodeKind::Feature(feature.to_string()))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.edges[v].iter().map(|(_, w)| w).sum()
    }

    /// Builds a graph from explicit edges; `edges` are undirected pairs and
    /// seeds map node ids to distributions over `labels`.
    pub fn from_parts(
        nodes: Vec<NodeKind>,
        edges: &[(usize, usize, f64)],
        labels: Vec<Tag>,
        seeds: BTreeMap<usize, Seed>,
    ) -> Result<Self, SemisupError> {
        let index = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); nodes.len()];
        for &(a, b, w) in edges {
            if a == b || !(w > 0.0) || a >= nodes.len() || b >= nodes.len() {
                return Err(SemisupError::InvalidGraph(format!("bad edge {a}-{b} ({w})")));
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for list in &mut adj {
            list.sort_by_key(|(n, _)| *n);
        }
        for s in seeds.values() {
            let total: f64 = s.dist.iter().sum();
            if s.dist.len() != labels.len() || (total - 1.0).abs() > 1e-9 {
                return Err(SemisupError::InvalidGraph("seed is not a distribution".into()));
            }
        }
        Ok(LabelGraph {
            nodes,
            index,
            edges: adj,
            labels,
            seeds,
        })
    }
}

fn contexts(sentence: &[&str], i: usize, max_suffix: usize) -> Vec<String> {
    let prev = if i == 0 { BOS } else { sentence[i - 1] };
    let next = sentence.get(i + 1).copied().unwrap_or(EOS);
    let mut out = vec![format!("prev={prev}"), format!("next={next}")];
    let chars: Vec<char> = sentence[i].chars().collect();
    for k in 1..=max_suffix.min(chars.len()) {
        let suf: String = chars[chars.len() - k..].iter().collect();
        out.push(format!("suf{k}={suf}"));
    }
    out
}

/// Type nodes for frequent or seeded types, one feature node per context
/// feature observed with them, and PMI edge weights clipped at zero (only
/// positive edges are kept). Each seeded type is seeded with the uniform
/// distribution over its dictionary tags.
pub fn build_label_graph(
    mono: &[Sentence],
    seeds: &TagDictionary,
    cfg: &GraphConfig,
) -> Result<LabelGraph, SemisupError> {
    let sentences: Vec<Vec<&str>> = mono
        .iter()
        .filter(|s| !s.excluded && !s.is_empty())
        .map(|s| s.norms().collect())
        .collect();
    if sentences.is_empty() {
        return Err(SemisupError::EmptyCorpus);
    }

    let mut type_freq: IndexMap<&str, usize> = IndexMap::new();
    for s in &sentences {
        for w in s {
            *type_freq.entry(w).or_default() += 1;
        }
    }
    let keep = |w: &str| {
        seeds.contains(w) || type_freq.get(w).is_some_and(|&c| c >= cfg.min_type_freq)
    };

    // Co-occurrence counts over every (type, feature) event in the corpus.
    let mut pair: IndexMap<(&str, String), f64> = IndexMap::new();
    let mut t_count: HashMap<&str, f64> = HashMap::new();
    let mut f_count: HashMap<String, f64> = HashMap::new();
    let mut total = 0.0;
    for s in &sentences {
        for i in 0..s.len() {
            for f in contexts(s, i, cfg.max_suffix_len) {
                *t_count.entry(s[i]).or_default() += 1.0;
                *f_count.entry(f.clone()).or_default() += 1.0;
                *pair.entry((s[i], f)).or_default() += 1.0;
                total += 1.0;
            }
        }
    }

    let mut nodes: Vec<NodeKind> = Vec::new();
    let mut index: HashMap<NodeKind, usize> = HashMap::new();
    let mut intern = |k: NodeKind, nodes: &mut Vec<NodeKind>| {
        *index.entry(k.clone()).or_insert_with(|| {
            nodes.push(k);
            nodes.len() - 1
        })
    };
    for (w, _) in &type_freq {
        if keep(w) {
            intern(NodeKind::Type(w.to_string()), &mut nodes);
        }
    }
    for (w, _) in seeds.iter() {
        intern(NodeKind::Type(w.to_string()), &mut nodes);
    }
    let mut edges = Vec::new();
    for ((w, f), c) in &pair {
        if !keep(w) {
            continue;
        }
        let pmi = (c * total / (t_count[w] * f_count[f])).ln();
        if pmi > 0.0 {
            let a = intern(NodeKind::Type(w.to_string()), &mut nodes);
            let b = intern(NodeKind::Feature(f.clone()), &mut nodes);
            edges.push((a, b, pmi));
        }
    }

    let labels: Vec<Tag> = seeds.all_tags().into_iter().collect();
    let mut seed_map = BTreeMap::new();
    for (w, entries) in seeds.iter() {
        let v = index[&NodeKind::Type(w.to_string())];
        let mut dist = vec![0.0; labels.len()];
        let tags: BTreeSet<&Tag> = entries.iter().map(|e| &e.tag).collect();
        for t in &tags {
            let k = labels.binary_search(t).expect("label space covers seeds");
            dist[k] = 1.0 / tags.len() as f64;
        }
        let confidence = if entries.iter().any(|e| e.provenance == Provenance::Gold) {
            cfg.gold_confidence
        } else {
            cfg.projected_confidence
        };
        seed_map.insert(v, Seed { dist, confidence });
    }
    LabelGraph::from_parts(nodes, &edges, labels, seed_map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            mu1: 1.0,
            mu2: 0.01,
            mu3: 0.01,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Normalized label distribution per node, over the graph's labels.
    pub dists: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Largest per-node L1 change in the final sweep.
    pub residual: f64,
    pub converged: bool,
}

/// Synchronous Modified Adsorption sweeps:
///
/// ```text
/// Ŷ_v ← (μ1·p_inj·Y_v + μ2·Σ_u W_vu·Ŷ_u + μ3·p_abnd·r)
///        / (μ1·p_inj + μ2·Σ_u W_vu + μ3)
/// ```
///
/// with `p_inj = 1` on seeds (scaled by seed confidence) and 0 elsewhere,
/// `p_abnd = 1 − 0.9·p_inj`, and `r` uniform over the labels.
pub fn propagate(graph: &LabelGraph, cfg: &PropagationConfig) -> Result<Propagation, SemisupError> {
    if graph.seeds.is_empty() {
        return Err(SemisupError::NoSeeds);
    }
    if !(cfg.mu1 > 0.0 && cfg.mu2 > 0.0 && cfg.mu3 > 0.0) {
        return Err(SemisupError::InvalidConfig("all μ must be > 0".into()));
    }
    let n = graph.len();
    let k = graph.labels.len();
    let r = 1.0 / k as f64;
    let mut y: Vec<Vec<f64>> = vec![vec![0.0; k]; n];
    for (&v, s) in &graph.seeds {
        y[v] = s.dist.clone();
    }
    let mut next = y.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        residual = 0.0;
        for v in 0..n {
            let (inj, seed) = match graph.seeds.get(&v) {
                Some(s) => (s.confidence, Some(&s.dist)),
                None => (0.0, None),
            };
            let p_inj = if seed.is_some() { 1.0 } else { 0.0 };
            let p_abnd = 1.0 - 0.9 * p_inj;
            let deg = graph.degree(v);
            let denom = cfg.mu1 * inj * p_inj + cfg.mu2 * deg + cfg.mu3;
            let out = &mut next[v];
            for (l, o) in out.iter_mut().enumerate() {
                let mut num = cfg.mu3 * p_abnd * r;
                if let Some(d) = seed {
                    num += cfg.mu1 * inj * p_inj * d[l];
                }
                for &(u, w) in &graph.edges[v] {
                    num += cfg.mu2 * w * y[u][l];
                }
                *o = num / denom;
            }
            let change: f64 = out.iter().zip(&y[v]).map(|(a, b)| (a - b).abs()).sum();
            residual = residual.max(change);
        }
        std::mem::swap(&mut y, &mut next);
        if residual < cfg.tol {
            break;
        }
    }
    for d in &mut y {
        let s: f64 = d.iter().sum();
        if s > 0.0 {
            d.iter_mut().for_each(|x| *x /= s);
        }
    }
    Ok(Propagation {
        dists: y,
        iterations,
        residual,
        converged: residual < cfg.tol,
    })
}

/// Adds, for every unseeded type node, each label whose propagated
/// probability reaches `keep_threshold` (provenance propagated). Seeded
/// types and everything in `existing` pass through unchanged.
pub fn expand_dictionary(
    graph: &LabelGraph,
    propagation: &Propagation,
    keep_threshold: f64,
    existing: &TagDictionary,
) -> TagDictionary {
    let mut out = existing.clone();
    for (v, node) in graph.nodes.iter().enumerate() {
        let NodeKind::Type(w) = node else { continue };
        if graph.seeds.contains_key(&v) || existing.contains(w) {
            continue;
        }
        for (l, &p) in propagation.dists[v].iter().enumerate() {
            if p >= keep_threshold {
                out.insert(w, graph.labels[l].clone(), Provenance::Propagated, 0);
            }
        }
    }
    out
}
