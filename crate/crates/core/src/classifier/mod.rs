//! Binary logistic-regression intent classifiers and cross-validation.

mod features;
mod folds;
mod metrics;
mod model;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::augmentation::{self, AugmentError, AugmentationSpec, AugmentedRow, Origin, Selection};
use crate::similarity::SimilarityRanking;
use crate::textprep::ProcessedDocument;
use crate::IntentClass;

pub use features::{FeatureSpace, SparseRow};
pub use folds::{stratified_folds, Fold};
pub use metrics::{Confusion, Metrics};
pub use model::{fit, loss_and_gradient, sigmoid, Hyper, LinearModel};

pub const DEFAULT_FOLDS: usize = 5;
/// The two intents that get a dedicated classifier.
pub const TARGETS: [IntentClass; 2] = [IntentClass::BugReport, IntentClass::FeatureRequest];

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("need at least {k} positive and {k} negative review rows, have {positives} and {negatives}")]
    TooFewRows { k: usize, positives: usize, negatives: usize },
    #[error("training rows for {0} contain a single class")]
    DegenerateLabels(IntentClass),
    #[error("no test rows")]
    EmptyTest,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone)]
pub struct TrainedClassifier {
    pub target: IntentClass,
    pub features: FeatureSpace,
    pub model: LinearModel,
}

impl TrainedClassifier {
    pub fn predict(&self, tokens: &[String]) -> bool {
        self.model.predict(&self.features.transform(tokens))
    }
}

/// Fits features and weights on `rows`. Input order does not matter: rows
/// are sorted by doc id first.
pub fn train(rows: &[&AugmentedRow], target: IntentClass, hyper: &Hyper) -> Result<TrainedClassifier, ClassifierError> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id).then_with(|| a.origin.cmp(&b.origin)));
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| if r.intents.contains(&target) { 1.0 } else { 0.0 })
        .collect();
    let positives = ys.iter().filter(|&&y| y == 1.0).count();
    if positives == 0 || positives == ys.len() {
        return Err(ClassifierError::DegenerateLabels(target));
    }
    let features = FeatureSpace::fit(rows.iter().map(|r| r.tokens.as_slice()), hyper.bigrams);
    let xs: Vec<SparseRow> = rows.iter().map(|r| features.transform(&r.tokens)).collect();
    let model = fit(&xs, &ys, features.len(), hyper);
    Ok(TrainedClassifier {
        target,
        features,
        model,
    })
}

pub fn evaluate(clf: &TrainedClassifier, test: &[&AugmentedRow]) -> Result<Confusion, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTest);
    }
    let mut c = Confusion::default();
    for r in test {
        c.record(clf.predict(&r.tokens), r.intents.contains(&clf.target));
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    #[serde(flatten)]
    pub confusion: Confusion,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: IntentClass,
    pub folds: Vec<FoldReport>,
    pub mean: Metrics,
    /// Wall-clock time; logged, never serialized, so reports stay
    /// reproducible.
    #[serde(skip)]
    pub runtime_secs: f64,
}

/// Stratified k-fold cross-validation of the `target` classifier.
pub fn cross_validate(
    rows: &[AugmentedRow],
    target: IntentClass,
    k: usize,
    seed: u64,
    hyper: &Hyper,
) -> Result<EvalReport, ClassifierError> {
    let start = Instant::now();
    let folds = stratified_folds(rows, target, k, seed)?;
    let mut reports = Vec::with_capacity(k);
    for fold in &folds {
        let train_rows: Vec<&AugmentedRow> = fold.train.iter().map(|&i| &rows[i]).collect();
        let test_rows: Vec<&AugmentedRow> = fold.test.iter().map(|&i| &rows[i]).collect();
        let clf = train(&train_rows, target, hyper)?;
        let confusion = evaluate(&clf, &test_rows)?;
        reports.push(FoldReport {
            metrics: Metrics::from_confusion(&confusion),
            confusion,
        });
    }
    let mean = Metrics::mean(&reports.iter().map(|r| r.metrics).collect::<Vec<_>>());
    let runtime_secs = start.elapsed().as_secs_f64();
    tracing::info!(%target, k, f1 = mean.f1, runtime_secs, "cross-validation done");
    Ok(EvalReport {
        target,
        folds: reports,
        mean,
        runtime_secs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSpec {
    pub name: String,
    #[serde(flatten)]
    pub spec: AugmentationSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    #[serde(default = "default_k")]
    pub k: usize,
    pub seed: u64,
    #[serde(default)]
    pub hyper: Hyper,
}

fn default_k() -> usize {
    DEFAULT_FOLDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub model: String,
    pub target: IntentClass,
    pub ratio: f64,
    pub primary: usize,
    pub auxiliary: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub delta_precision: f64,
    pub delta_recall: f64,
    pub delta_f1: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    pub fn get(&self, model: &str, target: IntentClass) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.model == model && r.target == target)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "model\ttarget\tratio\tprimary\tauxiliary\tprecision\trecall\tf1\tdelta_precision\tdelta_recall\tdelta_f1\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.2}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:+.4}\t{:+.4}\t{:+.4}",
                r.model,
                r.target,
                r.ratio,
                r.primary,
                r.auxiliary,
                r.precision,
                r.recall,
                r.f1,
                r.delta_precision,
                r.delta_recall,
                r.delta_f1
            );
        }
        out
    }
}

pub const BASELINE: &str = "baseline";

fn evaluate_dataset(
    rows: &[AugmentedRow],
    settings: &EvalSettings,
) -> Result<BTreeMap<IntentClass, EvalReport>, ClassifierError> {
    TARGETS
        .iter()
        .map(|&t| Ok((t, cross_validate(rows, t, settings.k, settings.seed, &settings.hyper)?)))
        .collect()
}

fn push_rows(
    report: &mut ExperimentReport,
    model: &str,
    ratio: f64,
    rows: &[AugmentedRow],
    evals: &BTreeMap<IntentClass, EvalReport>,
    baseline: Option<&BTreeMap<IntentClass, EvalReport>>,
) {
    let primary = rows.iter().filter(|r| r.origin == Origin::Primary).count();
    for (&target, e) in evals {
        let base = baseline.map(|b| b[&target].mean).unwrap_or(e.mean);
        report.rows.push(ExperimentRow {
            model: model.to_string(),
            target,
            ratio,
            primary,
            auxiliary: rows.len() - primary,
            precision: e.mean.precision,
            recall: e.mean.recall,
            f1: e.mean.f1,
            delta_precision: e.mean.precision - base.precision,
            delta_recall: e.mean.recall - base.recall,
            delta_f1: e.mean.f1 - base.f1,
        });
    }
}

/// Cross-validates a baseline on the primary rows alone and one model per
/// augmentation spec, for both targets. Folds depend only on the primary
/// rows and `settings.seed`, so every model is tested on the same folds.
pub fn run_experiment(
    primary: &[ProcessedDocument],
    pool: &[ProcessedDocument],
    specs: &[NamedSpec],
    rankings: &BTreeMap<String, SimilarityRanking>,
    settings: &EvalSettings,
) -> Result<ExperimentReport, ExperimentError> {
    let mut report = ExperimentReport::default();
    let baseline_rows = augmentation::augment(primary, &Selection::empty(), None, settings.seed).rows;
    let baseline = evaluate_dataset(&baseline_rows, settings)?;
    push_rows(&mut report, BASELINE, 0.0, &baseline_rows, &baseline, None);
    for named in specs {
        let ranking = named.spec.target_app.as_ref().and_then(|a| rankings.get(a));
        let sel = augmentation::select_auxiliary(pool, primary.len(), &named.spec, ranking)?;
        let ds = augmentation::augment(primary, &sel, Some(&named.spec), named.spec.seed);
        let evals = evaluate_dataset(&ds.rows, settings)?;
        push_rows(&mut report, &named.name, named.spec.ratio, &ds.rows, &evals, Some(&baseline));
    }
    Ok(report)
}

/// Metrics per volume ratio, one row per (ratio, target).
pub fn sweep_trend(
    primary: &[ProcessedDocument],
    pool: &[ProcessedDocument],
    ratios: &[f64],
    base: &AugmentationSpec,
    ranking: Option<&SimilarityRanking>,
    settings: &EvalSettings,
) -> Result<ExperimentReport, ExperimentError> {
    let datasets = augmentation::sweep(primary, pool, ratios, base, ranking)?;
    let mut report = ExperimentReport::default();
    let mut baseline = None;
    for (ds, &ratio) in datasets.iter().zip(ratios) {
        let evals = evaluate_dataset(&ds.rows, settings)?;
        push_rows(&mut report, &format!("r={ratio:.2}"), ratio, &ds.rows, &evals, baseline.as_ref());
        if baseline.is_none() {
            baseline = Some(evals);
        }
    }
    Ok(report)
}
