use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::PipelineError;
use crate::augmentation::{AugmentationSpec, Method};
use crate::similarity::DEFAULT_TOP_K;
use crate::classifier::{Hyper, NamedSpec, DEFAULT_FOLDS};
use crate::ingestion::{DEFAULT_MIN_CONTRIBUTORS, DEFAULT_MIN_LABELED_ISSUES};
use crate::label_norm::DEFAULT_MIN_LABEL_FREQUENCY;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimaryConfig {
    pub name: String,
    pub path: PathBuf,
    pub label_map: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default = "default_min_labeled")]
    pub min_labeled_issues: u64,
    #[serde(default = "default_min_contributors")]
    pub min_contributors: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_labeled_issues: DEFAULT_MIN_LABELED_ISSUES,
            min_contributors: DEFAULT_MIN_CONTRIBUTORS,
        }
    }
}

fn default_min_labeled() -> u64 {
    DEFAULT_MIN_LABELED_ISSUES
}

fn default_min_contributors() -> u64 {
    DEFAULT_MIN_CONTRIBUTORS
}

fn default_min_freq() -> usize {
    DEFAULT_MIN_LABEL_FREQUENCY
}

fn default_k() -> usize {
    DEFAULT_FOLDS
}

/// An augmentation run without a seed: every spec shares the config seed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationEntry {
    pub name: String,
    pub method: Method,
    pub ratio: f64,
    #[serde(default)]
    pub target_app: Option<String>,
    #[serde(default = "default_top_k")]
    pub top_k_similar: usize,
    #[serde(default)]
    pub include_same_app: bool,
}

impl AugmentationEntry {
    pub fn to_named(&self, seed: u64) -> NamedSpec {
        NamedSpec {
            name: self.name.clone(),
            spec: AugmentationSpec {
                method: self.method,
                ratio: self.ratio,
                seed,
                target_app: self.target_app.clone(),
                top_k_similar: self.top_k_similar,
                include_same_app: self.include_same_app,
            },
        }
    }
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

/// One JSON document describing a full run. Relative paths resolve against
/// the directory holding the config file. Optional data files fall back to
/// the bundled defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub corpus_dir: PathBuf,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub patterns: Option<PathBuf>,
    #[serde(default)]
    pub word_lists: Option<PathBuf>,
    pub primary: PrimaryConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default = "default_min_freq")]
    pub min_label_frequency: usize,
    #[serde(default)]
    pub augmentation: Vec<AugmentationEntry>,
    #[serde(default = "default_k")]
    pub folds: usize,
    #[serde(default)]
    pub hyper: Hyper,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Validation(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus_dir);
        join(&mut self.primary.path);
        join(&mut self.primary.label_map);
        for p in [&mut self.lexicon, &mut self.patterns, &mut self.word_lists].into_iter().flatten() {
            join(p);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let must_exist = |what: &str, p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(PipelineError::Validation(format!("{what} {} does not exist", p.display())))
            }
        };
        must_exist("corpus directory", &self.corpus_dir)?;
        must_exist("primary dataset", &self.primary.path)?;
        must_exist("label map", &self.primary.label_map)?;
        if let Some(p) = &self.lexicon {
            must_exist("lexicon", p)?;
        }
        if let Some(p) = &self.patterns {
            must_exist("pattern file", p)?;
        }
        if let Some(p) = &self.word_lists {
            must_exist("word-list directory", p)?;
        }
        if self.folds < 2 {
            return Err(PipelineError::Validation(format!("folds must be at least 2, got {}", self.folds)));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.augmentation {
            s.to_named(self.seed)
                .spec
                .validate()
                .map_err(|e| PipelineError::Validation(format!("augmentation `{}`: {e}", s.name)))?;
            if !names.insert(&s.name) || s.name == crate::classifier::BASELINE {
                return Err(PipelineError::Validation(format!("duplicate augmentation name `{}`", s.name)));
            }
        }
        Ok(())
    }

    pub fn needs_similarity(&self) -> bool {
        self.augmentation.iter().any(|s| s.method == Method::WithinContext)
    }
}

/// Input of the stand-alone `experiment` command: a primary dataset, an
/// issue document pool and the augmentation runs to compare.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub primary: PrimaryConfig,
    pub pool: PathBuf,
    /// Needed only for within-context runs, to rank similar repositories.
    #[serde(default)]
    pub corpus_dir: Option<PathBuf>,
    #[serde(default)]
    pub word_lists: Option<PathBuf>,
    #[serde(default)]
    pub augmentation: Vec<AugmentationEntry>,
    #[serde(default = "default_k")]
    pub folds: usize,
    #[serde(default)]
    pub hyper: Hyper,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Validation(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.primary.path, &mut cfg.primary.label_map, &mut cfg.pool]
            .into_iter()
            .chain([&mut cfg.corpus_dir, &mut cfg.word_lists].into_iter().flatten())
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&cfg.primary.path, &cfg.primary.label_map, &cfg.pool]
            .into_iter()
            .chain([&cfg.corpus_dir, &cfg.word_lists].into_iter().flatten())
        {
            if !p.exists() {
                return Err(PipelineError::Validation(format!("{} does not exist", p.display())));
            }
        }
        if cfg.augmentation.iter().any(|a| a.method == Method::WithinContext) && cfg.corpus_dir.is_none() {
            return Err(PipelineError::Validation("within-context runs need `corpus_dir`".into()));
        }
        for a in &cfg.augmentation {
            a.to_named(cfg.seed)
                .spec
                .validate()
                .map_err(|e| PipelineError::Validation(format!("augmentation `{}`: {e}", a.name)))?;
        }
        Ok(cfg)
    }
}
