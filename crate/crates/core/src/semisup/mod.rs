//! Graph-based dictionary expansion followed by dictionary-constrained
//! EM-HMM training on raw text.

mod graph;
mod hmm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sentence;
use crate::dict::TagDictionary;

pub use graph::{
    build_label_graph, expand_dictionary, propagate, GraphConfig, LabelGraph, NodeKind, Propagation,
    PropagationConfig, Seed,
};
pub use hmm::{supervised_hmm, train_semisup_hmm, unknown_word_tags, HmmConfig, HmmModel, HmmTrainReport, UNK};

#[derive(Debug, Error)]
pub enum SemisupError {
    #[error("monolingual corpus is empty")]
    EmptyCorpus,
    #[error("label graph has no seeds")]
    NoSeeds,
    #[error("tag dictionary is empty")]
    EmptyDictionary,
    #[error("no annotated sentences")]
    NoAnnotatedData,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdbConfig {
    pub graph: GraphConfig,
    pub propagation: PropagationConfig,
    pub keep_threshold: f64,
    pub hmm: HmmConfig,
}

impl Default for GdbConfig {
    fn default() -> Self {
        GdbConfig {
            graph: GraphConfig::default(),
            propagation: PropagationConfig::default(),
            keep_threshold: 0.1,
            hmm: HmmConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GdbModel {
    pub hmm: HmmModel,
    /// Seeds plus propagated entries, as used to constrain the HMM.
    pub dictionary: TagDictionary,
    pub propagation_residual: f64,
    pub propagation_iterations: usize,
    pub em_log_likelihood: Vec<f64>,
}

/// Seeds the graph with the gold dictionary of `annotated` plus `extra`
/// (e.g. projected entries; gold wins on overlap), expands the dictionary by
/// propagation over `mono`, and trains the constrained HMM.
pub fn train_gdb(
    mono: &[Sentence],
    annotated: &[Sentence],
    extra: &TagDictionary,
    cfg: &GdbConfig,
) -> Result<GdbModel, SemisupError> {
    let mut seeds = TagDictionary::from_tagged(annotated);
    seeds.merge(extra);
    if seeds.is_empty() {
        return Err(SemisupError::EmptyDictionary);
    }
    let graph_text: Vec<Sentence> = mono.iter().chain(annotated).cloned().collect();
    let graph = build_label_graph(&graph_text, &seeds, &cfg.graph)?;
    let prop = propagate(&graph, &cfg.propagation)?;
    let dictionary = expand_dictionary(&graph, &prop, cfg.keep_threshold, &seeds);
    let (hmm, report) = train_semisup_hmm(mono, annotated, &dictionary, &cfg.hmm)?;
    Ok(GdbModel {
        hmm,
        dictionary,
        propagation_residual: prop.residual,
        propagation_iterations: prop.iterations,
        em_log_likelihood: report.log_likelihood,
    })
}
