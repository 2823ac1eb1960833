use std::path::{Path, PathBuf};

use glossa::corpus::{
    load_corpus_dir, load_parallel_dir, Corpus, NormalizeConfig, ParallelCorpus, TagMode, TagsetMapping,
};
use glossa::harness::{AlConfig, TaggerSpec};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// Service settings, read from TOML and then overridden by `GLOSSA_*`
/// environment variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    /// Holds the annotation log and checkpoint manifests.
    pub data_dir: PathBuf,
    /// Gold-tagged starting pool.
    pub base_dir: Option<PathBuf>,
    /// Narratives to annotate.
    pub queue_dir: Option<PathBuf>,
    pub mono_dir: Option<PathBuf>,
    pub parallel_dir: Option<PathBuf>,
    pub italian_mapping: Option<PathBuf>,
    pub taggers: Vec<String>,
    pub seed: u64,
    pub holdout_fraction: f64,
    /// Shared bearer token; no authentication when unset.
    pub token: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let al = AlConfig::default();
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("glossa-data"),
            base_dir: None,
            queue_dir: None,
            mono_dir: None,
            parallel_dir: None,
            italian_mapping: None,
            taggers: al.taggers.iter().map(ToString::to_string).collect(),
            seed: al.seed,
            holdout_fraction: al.holdout_fraction,
            token: None,
        }
    }
}

/// Corpora and loop settings the service runs on.
#[derive(Debug, Clone)]
pub struct ServiceInputs {
    pub base: Corpus,
    pub queue: Corpus,
    pub mono: Corpus,
    pub parallel: Option<ParallelCorpus>,
    pub al: AlConfig,
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ServiceError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path).map_err(|e| ServiceError::Io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    /// Applies `GLOSSA_HOST`, `GLOSSA_PORT`, `GLOSSA_DATA_DIR`,
    /// `GLOSSA_BASE_DIR`, `GLOSSA_QUEUE_DIR`, `GLOSSA_MONO_DIR`,
    /// `GLOSSA_PARALLEL_DIR`, `GLOSSA_TAGGERS` (comma-separated),
    /// `GLOSSA_SEED` and `GLOSSA_TOKEN`.
    pub fn with_env(mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self, ServiceError> {
        let bad = |k: &str, v: &str| ServiceError::Config(format!("{k}={v} is not valid"));
        for (k, v) in vars {
            match k.as_str() {
                "GLOSSA_HOST" => self.host = v,
                "GLOSSA_PORT" => self.port = v.parse().map_err(|_| bad(&k, &v))?,
                "GLOSSA_DATA_DIR" => self.data_dir = v.into(),
                "GLOSSA_BASE_DIR" => self.base_dir = Some(v.into()),
                "GLOSSA_QUEUE_DIR" => self.queue_dir = Some(v.into()),
                "GLOSSA_MONO_DIR" => self.mono_dir = Some(v.into()),
                "GLOSSA_PARALLEL_DIR" => self.parallel_dir = Some(v.into()),
                "GLOSSA_TAGGERS" => self.taggers = v.split(',').map(|s| s.trim().to_string()).collect(),
                "GLOSSA_SEED" => self.seed = v.parse().map_err(|_| bad(&k, &v))?,
                "GLOSSA_TOKEN" => self.token = Some(v),
                _ => {}
            }
        }
        Ok(self)
    }

    pub fn al_config(&self) -> Result<AlConfig, ServiceError> {
        let taggers = self
            .taggers
            .iter()
            .map(|t| t.parse::<TaggerSpec>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AlConfig {
            taggers,
            seed: self.seed,
            holdout_fraction: self.holdout_fraction,
            ..Default::default()
        })
    }

    pub fn load_inputs(&self) -> Result<ServiceInputs, ServiceError> {
        let norm = NormalizeConfig::default();
        let need = |p: &Option<PathBuf>, name: &str| {
            p.clone().ok_or_else(|| ServiceError::Config(format!("{name} is not set")))
        };
        let base = load_corpus_dir(&need(&self.base_dir, "base_dir")?, TagMode::Tagged, &norm)?;
        let queue = load_corpus_dir(&need(&self.queue_dir, "queue_dir")?, TagMode::Auto, &norm)?;
        let mono = match &self.mono_dir {
            Some(d) => load_corpus_dir(d, TagMode::Auto, &norm)?,
            None => Corpus::default(),
        };
        let mapping = self.italian_mapping.as_deref().map(TagsetMapping::load).transpose()?;
        let parallel = self
            .parallel_dir
            .as_deref()
            .map(|d| load_parallel_dir(d, TagMode::Auto, mapping.as_ref(), &norm))
            .transpose()?;
        Ok(ServiceInputs {
            base,
            queue,
            mono,
            parallel,
            al: self.al_config()?,
        })
    }
}
