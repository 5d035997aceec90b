//! Merging a labeled review dataset with a sample of processed issues.

mod primary;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::jsonl::{self, JsonlError};
use crate::rng::seeded;
use crate::similarity::{SimilarityRanking, DEFAULT_TOP_K};
use crate::textprep::ProcessedDocument;
use crate::{IntentClass, IntentSet};

pub use primary::{load_primary, LabelMap, LabelTarget, PrimaryDataset};

pub const DEFAULT_RATIO: f64 = 0.3;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("label map line {line}: {reason}")]
    LabelMap { line: usize, reason: String },
    #[error("row {row}: label `{label}` is not in the label map")]
    UnknownLabel { row: usize, label: String },
    #[error("invalid augmentation spec: {0}")]
    InvalidSpec(String),
    #[error("no candidate issues for {0}")]
    EmptyPool(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    WithinApp,
    WithinContext,
    BetweenApp,
}

impl FromStr for Method {
    type Err = AugmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "within-app" => Ok(Method::WithinApp),
            "within-context" => Ok(Method::WithinContext),
            "between-app" => Ok(Method::BetweenApp),
            other => Err(AugmentError::InvalidSpec(format!(
                "unknown method `{other}` (expected within-app, within-context or between-app)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub method: Method,
    pub ratio: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_app: Option<String>,
    #[serde(default = "default_top_k")]
    pub top_k_similar: usize,
    /// Within-Context only: also draw from the target app's own issues.
    #[serde(default)]
    pub include_same_app: bool,
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

impl AugmentationSpec {
    pub fn between_app(ratio: f64, seed: u64) -> Self {
        Self {
            method: Method::BetweenApp,
            ratio,
            seed,
            target_app: None,
            top_k_similar: DEFAULT_TOP_K,
            include_same_app: false,
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(AugmentError::InvalidSpec(format!("ratio {} outside [0, 1]", self.ratio)));
        }
        match (self.method, &self.target_app) {
            (Method::BetweenApp, Some(_)) => Err(AugmentError::InvalidSpec("between-app takes no target app".into())),
            (Method::WithinApp | Method::WithinContext, None) => {
                Err(AugmentError::InvalidSpec("within-app and within-context need a target app".into()))
            }
            _ => Ok(()),
        }
    }

    /// Auxiliary rows requested for a primary dataset of `primary_len` rows.
    pub fn sample_size(&self, primary_len: usize) -> usize {
        (self.ratio * primary_len as f64).round() as usize
    }
}

/// Issues eligible for sampling under `spec`, in pool order.
pub fn candidate_pool<'a>(
    pool: &'a [ProcessedDocument],
    spec: &AugmentationSpec,
    ranking: Option<&SimilarityRanking>,
) -> Result<Vec<&'a ProcessedDocument>, AugmentError> {
    spec.validate()?;
    let apps: Option<BTreeSet<&str>> = match spec.method {
        Method::BetweenApp => None,
        Method::WithinApp => Some(spec.target_app.iter().map(String::as_str).collect()),
        Method::WithinContext => {
            let target = spec.target_app.as_deref().unwrap_or_default();
            let ranking = ranking
                .filter(|r| r.query_repo == target)
                .ok_or_else(|| AugmentError::InvalidSpec(format!("within-context needs a ranking for {target}")))?;
            let mut apps: BTreeSet<&str> = ranking.top(spec.top_k_similar).collect();
            if spec.include_same_app {
                apps.insert(target);
            }
            Some(apps)
        }
    };
    Ok(pool
        .iter()
        .filter(|d| match &apps {
            None => true,
            Some(apps) => d.app_id.as_deref().is_some_and(|a| apps.contains(a)),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub rows: Vec<ProcessedDocument>,
    pub requested: usize,
    /// Rows requested but unavailable because the pool was too small.
    pub shortfall: usize,
}

impl Selection {
    pub fn empty() -> Self {
        Self {
            rows: Vec::new(),
            requested: 0,
            shortfall: 0,
        }
    }
}

/// Samples `round(r * primary_len)` candidates uniformly without
/// replacement. Takes the whole pool when it is smaller.
pub fn select_auxiliary(
    pool: &[ProcessedDocument],
    primary_len: usize,
    spec: &AugmentationSpec,
    ranking: Option<&SimilarityRanking>,
) -> Result<Selection, AugmentError> {
    let candidates = candidate_pool(pool, spec, ranking)?;
    let requested = spec.sample_size(primary_len);
    if requested == 0 {
        return Ok(Selection {
            rows: Vec::new(),
            requested,
            shortfall: 0,
        });
    }
    if candidates.is_empty() {
        let what = spec.target_app.clone().unwrap_or_else(|| "the issue pool".into());
        return Err(AugmentError::EmptyPool(what));
    }
    let take = requested.min(candidates.len());
    let shortfall = requested - take;
    if shortfall > 0 {
        tracing::warn!(requested, available = candidates.len(), "auxiliary pool smaller than requested");
    }
    let mut rng = seeded(spec.seed);
    let mut picked = index::sample(&mut rng, candidates.len(), take).into_vec();
    picked.sort_unstable();
    Ok(Selection {
        rows: picked.into_iter().map(|i| candidates[i].clone()).collect(),
        requested,
        shortfall,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Primary,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedRow {
    pub doc_id: String,
    pub origin: Origin,
    pub tokens: Vec<String>,
    pub intents: IntentSet,
}

impl AugmentedRow {
    fn from_doc(doc: &ProcessedDocument, origin: Origin) -> Self {
        Self {
            doc_id: doc.doc_id.clone(),
            origin,
            tokens: doc.tokens.clone(),
            intents: doc.intents.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDataset {
    pub spec: Option<AugmentationSpec>,
    pub rows: Vec<AugmentedRow>,
    pub shortfall: usize,
}

impl AugmentedDataset {
    pub fn count(&self, origin: Origin) -> usize {
        self.rows.iter().filter(|r| r.origin == origin).count()
    }

    /// Rows per (origin, intent). Rows without intents count under `None`.
    pub fn class_counts(&self) -> BTreeMap<(Origin, Option<IntentClass>), usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            if r.intents.is_empty() {
                *counts.entry((r.origin, None)).or_default() += 1;
            }
            for c in &r.intents {
                *counts.entry((r.origin, Some(*c))).or_default() += 1;
            }
        }
        counts
    }
}

/// Concatenates primary and auxiliary rows and shuffles them with `seed`.
pub fn augment(
    primary: &[ProcessedDocument],
    auxiliary: &Selection,
    spec: Option<&AugmentationSpec>,
    seed: u64,
) -> AugmentedDataset {
    let mut rows: Vec<AugmentedRow> = primary
        .iter()
        .map(|d| AugmentedRow::from_doc(d, Origin::Primary))
        .chain(auxiliary.rows.iter().map(|d| AugmentedRow::from_doc(d, Origin::Auxiliary)))
        .collect();
    rows.shuffle(&mut seeded(seed));
    AugmentedDataset {
        spec: spec.cloned(),
        rows,
        shortfall: auxiliary.shortfall,
    }
}

/// Builds one augmented dataset per ratio, all sharing the primary rows.
pub fn sweep(
    primary: &[ProcessedDocument],
    pool: &[ProcessedDocument],
    ratios: &[f64],
    base: &AugmentationSpec,
    ranking: Option<&SimilarityRanking>,
) -> Result<Vec<AugmentedDataset>, AugmentError> {
    ratios
        .iter()
        .map(|&ratio| {
            let spec = AugmentationSpec { ratio, ..base.clone() };
            let sel = select_auxiliary(pool, primary.len(), &spec, ranking)?;
            Ok(augment(primary, &sel, Some(&spec), spec.seed))
        })
        .collect()
}

/// Upper bound on the number of ratios a range may expand to.
const MAX_RATIO_STEPS: f64 = 10_000.0;

/// Parses `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_ratios(s: &str) -> Result<Vec<f64>, AugmentError> {
    let bad = || AugmentError::InvalidSpec(format!("bad ratio list `{s}`"));
    let values: Vec<f64> = if let [start, end, step] = s.split(':').collect::<Vec<_>>()[..] {
        let (start, end, step): (f64, f64, f64) = (
            start.trim().parse().map_err(|_| bad())?,
            end.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if step <= 0.0 || end < start {
            return Err(bad());
        }
        let steps = ((end - start) / step + 1e-9).floor();
        if !(0.0..=MAX_RATIO_STEPS).contains(&steps) {
            return Err(bad());
        }
        let steps = steps as usize;
        (0..=steps)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(bad());
    }
    Ok(values)
}

pub fn write_augmented(path: &Path, rows: &[AugmentedRow]) -> Result<(), AugmentError> {
    jsonl::write(path, rows).map_err(|source| AugmentError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_augmented(path: &Path) -> Result<Vec<AugmentedRow>, AugmentError> {
    Ok(jsonl::read(path)?)
}
