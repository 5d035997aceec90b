//! End-to-end orchestration: harvest, filter, labels, extract, preprocess,
//! augment, train-eval.

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augmentation::{self, load_primary, LabelMap};
use crate::classifier::{self, EvalSettings, ExperimentReport, NamedSpec};
use crate::extraction::{extract, ExtractedSection, ExtractionMode, ExtractionStats, PatternSet, TitleNormalizer};
use crate::ingestion::{self, filter_repos, load_corpus, write_corpus, Corpus, FilterStats};
use crate::label_norm::{assign_intents, build_label_table, IntentLexicon, LabelNormalizer};
use crate::similarity;
use crate::textprep::{admit, DocSource, Preprocessor, ProcessedDocument, WordLists};
use crate::IntentSet;

pub use config::{AugmentationEntry, ExperimentConfig, FilterConfig, PipelineConfig, PrimaryConfig};
pub use manifest::{hash_path, Manifest, ManifestEntry};

pub const RAW_DIR: &str = "raw";
pub const FILTERED_DIR: &str = "filtered";
pub const LABELS_FILE: &str = "labels.jsonl";
pub const EXTRACTED_FILE: &str = "extracted.jsonl";
pub const DOCS_FILE: &str = "docs.jsonl";
pub const AUGMENTED_FILE: &str = "augmented.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Artifacts in manifest order.
pub const ARTIFACTS: [&str; 7] = [
    RAW_DIR,
    FILTERED_DIR,
    LABELS_FILE,
    EXTRACTED_FILE,
    DOCS_FILE,
    AUGMENTED_FILE,
    REPORT_FILE,
];

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),
}

impl PipelineError {
    /// 2 for validation problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) | PipelineError::MissingArtifact(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

fn stage_err(stage: &'static str) -> impl Fn(&dyn std::fmt::Display) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Intents of one labeled-relevant issue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub issue_id: String,
    pub repo_id: String,
    pub intents: IntentSet,
}

/// An extracted section with what later stages need from its issue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedIssue {
    pub issue_id: String,
    pub repo_id: String,
    pub title: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_pattern: Option<String>,
    pub mode: ExtractionMode,
    pub intents: IntentSet,
}

/// Labeled-relevant issues in corpus order.
pub fn label_records(
    corpus: &Corpus,
    lexicon: &IntentLexicon,
    min_label_frequency: usize,
    normalizer: &LabelNormalizer,
) -> Result<Vec<LabelRecord>, crate::label_norm::LabelError> {
    let assignment = assign_intents(corpus, lexicon, min_label_frequency, normalizer)?;
    Ok(corpus
        .issues
        .iter()
        .filter_map(|i| {
            let intents = assignment.get(&i.issue_id)?;
            (!intents.is_empty()).then(|| LabelRecord {
                issue_id: i.issue_id.clone(),
                repo_id: i.repo_id.clone(),
                intents: intents.clone(),
            })
        })
        .collect())
}

/// Runs extraction over the labeled issues.
pub fn extract_issues(
    corpus: &Corpus,
    labels: &[LabelRecord],
    patterns: &PatternSet,
    prep: &Preprocessor,
) -> (Vec<ExtractedIssue>, ExtractionStats) {
    let by_id: BTreeMap<&str, &LabelRecord> = labels.iter().map(|l| (l.issue_id.as_str(), l)).collect();
    let mut stats = ExtractionStats::default();
    let mut out = Vec::new();
    for issue in &corpus.issues {
        let Some(label) = by_id.get(issue.issue_id.as_str()) else { continue };
        let e = extract(issue, patterns, prep);
        stats.record(e.as_ref());
        if let Some(ExtractedSection {
            text,
            matched_pattern,
            mode,
            ..
        }) = e
        {
            out.push(ExtractedIssue {
                issue_id: issue.issue_id.clone(),
                repo_id: issue.repo_id.clone(),
                title: issue.title.clone(),
                text,
                matched_pattern,
                mode,
                intents: label.intents.clone(),
            });
        }
    }
    (out, stats)
}

/// One body and one title document per extracted issue, each kept only if
/// admitted. Sorted by doc id.
pub fn build_documents(extracted: &[ExtractedIssue], prep: &Preprocessor) -> Vec<ProcessedDocument> {
    let mut docs = Vec::new();
    for e in extracted {
        let body = prep.preprocess(&e.text);
        if admit(&body, DocSource::IssueBody, None) {
            docs.push(ProcessedDocument {
                doc_id: format!("{}/body", e.issue_id),
                source: DocSource::IssueBody,
                app_id: Some(e.repo_id.clone()),
                tokens: body,
                intents: e.intents.clone(),
            });
        }
        let title = prep.preprocess(&e.title);
        if admit(&title, DocSource::IssueTitle, Some(&e.title)) {
            docs.push(ProcessedDocument {
                doc_id: format!("{}/title", e.issue_id),
                source: DocSource::IssueTitle,
                app_id: Some(e.repo_id.clone()),
                tokens: title,
                intents: e.intents.clone(),
            });
        }
    }
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    docs
}

/// Issue counts after each stage; never increasing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub raw_issues: usize,
    pub labeled_relevant: usize,
    pub extracted: usize,
    /// Issues with at least one admitted document.
    pub admitted: usize,
}

impl Funnel {
    pub fn counts(&self) -> [usize; 4] {
        [self.raw_issues, self.labeled_relevant, self.extracted, self.admitted]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimaryStats {
    pub name: String,
    pub rows: usize,
    pub dropped_by_label: usize,
    pub dropped_by_admit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub funnel: Funnel,
    pub filter: FilterStats,
    pub distinct_labels: usize,
    pub extraction: ExtractionStats,
    pub documents: usize,
    pub primary: PrimaryStats,
    pub experiment: ExperimentReport,
}

/// Writes an artifact through `<name>.partial`, renamed once complete. A
/// failed write leaves the partial file in place.
fn commit<E: std::fmt::Display>(
    out: &Path,
    name: &str,
    stage: &'static str,
    write: impl FnOnce(&Path) -> Result<(), E>,
) -> Result<(), PipelineError> {
    let partial = out.join(format!("{name}.partial"));
    let dest = out.join(name);
    let err = stage_err(stage);
    remove(&partial).map_err(|e| err(&e))?;
    write(&partial).map_err(|e| err(&e))?;
    remove(&dest).map_err(|e| err(&e))?;
    fs::rename(&partial, &dest).map_err(|e| err(&e))
}

fn remove(path: &Path) -> std::io::Result<()> {
    if path.is_dir() {
        fs::remove_dir_all(path)
    } else if path.exists() {
        fs::remove_file(path)
    } else {
        Ok(())
    }
}

fn jsonl<T: Serialize>(rows: &[T]) -> impl FnOnce(&Path) -> std::io::Result<()> + '_ {
    move |p| crate::jsonl::write(p, rows)
}

/// Runs every stage and writes the seven artifacts plus `manifest.json`
/// into `out`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<Manifest, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| stage_err("setup")(&e))?;

    let lists = match &cfg.word_lists {
        Some(dir) => WordLists::from_dir(dir).map_err(|e| PipelineError::Validation(e.to_string()))?,
        None => WordLists::bundled(),
    };
    let lexicon = match &cfg.lexicon {
        Some(p) => IntentLexicon::load(p).map_err(|e| PipelineError::Validation(e.to_string()))?,
        None => IntentLexicon::bundled(),
    };
    let patterns = match &cfg.patterns {
        Some(p) => PatternSet::load(p).map_err(|e| PipelineError::Validation(e.to_string()))?,
        None => PatternSet::bundled(),
    };
    let label_map = LabelMap::load(&cfg.primary.label_map).map_err(|e| PipelineError::Validation(e.to_string()))?;
    let normalizer = LabelNormalizer::new(&lists);
    lexicon
        .validate(&normalizer)
        .map_err(|e| PipelineError::Validation(e.to_string()))?;
    let titles = TitleNormalizer::new(&lists);
    let prep = Preprocessor::new(lists);

    tracing::info!(stage = "harvest", corpus = %cfg.corpus_dir.display());
    let raw = load_corpus(&cfg.corpus_dir).map_err(|e| stage_err("harvest")(&e))?;
    commit(out, RAW_DIR, "harvest", |p| write_corpus(&raw, p))?;

    tracing::info!(stage = "filter", repos = raw.repos.len());
    let filtered = filter_repos(&raw, cfg.filter.min_labeled_issues, cfg.filter.min_contributors);
    commit(out, FILTERED_DIR, "filter", |p| write_corpus(&filtered.corpus, p))?;
    let corpus = &filtered.corpus;

    tracing::info!(stage = "labels", issues = corpus.issues.len());
    let distinct_labels = build_label_table(corpus, &normalizer).len();
    let labels =
        label_records(corpus, &lexicon, cfg.min_label_frequency, &normalizer).map_err(|e| stage_err("labels")(&e))?;
    commit(out, LABELS_FILE, "labels", jsonl(&labels))?;

    tracing::info!(stage = "extract", issues = labels.len());
    let (extracted, extraction) = extract_issues(corpus, &labels, &patterns, &prep);
    commit(out, EXTRACTED_FILE, "extract", jsonl(&extracted))?;

    tracing::info!(stage = "preprocess", issues = extracted.len());
    let docs = build_documents(&extracted, &prep);
    commit(out, DOCS_FILE, "preprocess", jsonl(&docs))?;

    tracing::info!(stage = "augment", pool = docs.len());
    let primary = load_primary(&cfg.primary.path, &cfg.primary.name, &label_map, &prep)
        .map_err(|e| stage_err("augment")(&e))?;
    let specs: Vec<NamedSpec> = cfg.augmentation.iter().map(|a| a.to_named(cfg.seed)).collect();
    let mut rankings = BTreeMap::new();
    if cfg.needs_similarity() {
        let (profiles, empty) = similarity::build_profiles(&corpus.repos, &prep, &titles);
        for e in &empty {
            tracing::warn!(stage = "augment", repo = %e.0, "empty profile");
        }
        for spec in specs.iter().filter(|s| s.spec.method == augmentation::Method::WithinContext) {
            let target = spec.spec.target_app.clone().unwrap_or_default();
            let ranking = similarity::rank_similar(&target, &profiles).map_err(|e| stage_err("augment")(&e))?;
            rankings.insert(target, ranking);
        }
    }
    let first = match specs.first() {
        Some(named) => {
            let ranking = named.spec.target_app.as_ref().and_then(|a| rankings.get(a));
            let sel = augmentation::select_auxiliary(&docs, primary.rows.len(), &named.spec, ranking)
                .map_err(|e| stage_err("augment")(&e))?;
            augmentation::augment(&primary.rows, &sel, Some(&named.spec), named.spec.seed)
        }
        None => augmentation::augment(&primary.rows, &augmentation::Selection::empty(), None, cfg.seed),
    };
    commit(out, AUGMENTED_FILE, "augment", jsonl(&first.rows))?;

    tracing::info!(stage = "train-eval", models = specs.len() + 1);
    let settings = EvalSettings {
        k: cfg.folds,
        seed: cfg.seed,
        hyper: cfg.hyper,
    };
    let experiment = classifier::run_experiment(&primary.rows, &docs, &specs, &rankings, &settings)
        .map_err(|e| stage_err("train-eval")(&e))?;

    let admitted: std::collections::BTreeSet<&str> = docs
        .iter()
        .filter_map(|d| d.doc_id.rsplit_once('/').map(|(issue, _)| issue))
        .collect();
    let report = PipelineReport {
        seed: cfg.seed,
        funnel: Funnel {
            raw_issues: raw.issues.len(),
            labeled_relevant: labels.len(),
            extracted: extracted.len(),
            admitted: admitted.len(),
        },
        filter: filtered.stats,
        distinct_labels,
        extraction,
        documents: docs.len(),
        primary: PrimaryStats {
            name: primary.name.clone(),
            rows: primary.rows.len(),
            dropped_by_label: primary.dropped_by_label,
            dropped_by_admit: primary.dropped_by_admit,
        },
        experiment,
    };
    commit(out, REPORT_FILE, "report", |p| {
        let mut text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(p, text)
    })?;

    let mut manifest = Manifest::default();
    for name in ARTIFACTS {
        let sha256 = hash_path(&out.join(name)).map_err(|e| stage_err("manifest")(&e))?;
        manifest.artifacts.push(ManifestEntry {
            name: name.to_string(),
            sha256,
        });
    }
    commit(out, MANIFEST_FILE, "manifest", |p| {
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(p, text)
    })?;
    tracing::info!(stage = "done", out = %out.display());
    Ok(manifest)
}

pub fn load_report(dir: &Path) -> Result<PipelineReport, PipelineError> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(|_| PipelineError::MissingArtifact(path.clone()))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Stage {
        stage: "report",
        message: format!("{}: {e}", path.display()),
    })
}

/// Human-readable summary of a pipeline output directory.
pub fn report(dir: &Path) -> Result<String, PipelineError> {
    let r = load_report(dir)?;
    let mut s = String::new();
    let f = r.funnel;
    let _ = writeln!(s, "funnel (seed {})", r.seed);
    for (name, n) in [
        ("raw issues", f.raw_issues),
        ("labeled relevant", f.labeled_relevant),
        ("extracted", f.extracted),
        ("admitted", f.admitted),
    ] {
        let _ = writeln!(s, "  {name:<18}{n:>8}");
    }
    let _ = writeln!(
        s,
        "repositories kept {} of {}",
        r.filter.kept_repos,
        r.filter.kept_repos + r.filter.dropped_repos
    );
    let e = &r.extraction;
    let _ = writeln!(
        s,
        "extraction: {} of {} ({} section match, {} single paragraph)",
        e.extracted, e.issues, e.section_match, e.single_paragraph
    );
    if !e.pattern_hits.is_empty() {
        let hits: Vec<String> = e.pattern_hits.iter().map(|(p, n)| format!("{p}={n}")).collect();
        let _ = writeln!(s, "  pattern hits: {}", hits.join(" "));
    }
    let _ = writeln!(s, "documents: {} issue, {} review ({})", r.documents, r.primary.rows, r.primary.name);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<16}{:<9}{:>6}{:>6}{:>10}{:>10}{:>10}{:>10}",
        "model", "target", "ratio", "aux", "precision", "recall", "f1", "delta f1"
    );
    for row in &r.experiment.rows {
        let _ = writeln!(
            s,
            "{:<16}{:<9}{:>6.2}{:>6}{:>10.4}{:>10.4}{:>10.4}{:>+10.4}",
            row.model, row.target.to_string(), row.ratio, row.auxiliary, row.precision, row.recall, row.f1, row.delta_f1
        );
    }
    Ok(s)
}

/// Loads a corpus directory and rewrites it in canonical form.
pub fn harvest_local(from: &Path, to: &Path) -> Result<Corpus, ingestion::IngestError> {
    let corpus = load_corpus(from)?;
    write_corpus(&corpus, to)?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_report_is_missing_artifact() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(report(d.path()), Err(PipelineError::MissingArtifact(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::Validation("x".into()).exit_code(), 2);
        assert_eq!(
            PipelineError::Stage {
                stage: "labels",
                message: "x".into()
            }
            .exit_code(),
            3
        );
    }

    #[test]
    fn partial_file_survives_failure() {
        let d = tempfile::tempdir().unwrap();
        let err = commit(d.path(), "x.jsonl", "test", |p| {
            fs::write(p, "half")?;
            Err::<(), _>(std::io::Error::other("boom"))
        })
        .unwrap_err();
        assert!(matches!(err, PipelineError::Stage { stage: "test", .. }));
        assert!(d.path().join("x.jsonl.partial").exists());
        assert!(!d.path().join("x.jsonl").exists());
    }
}
