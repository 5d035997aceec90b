//! Issue-label normalization and mapping to [`IntentClass`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::Serialize;

use crate::ingestion::Corpus;
use crate::stem::Stemmer;
use crate::textprep::WordLists;
use crate::{IntentClass, IntentSet};

pub const DEFAULT_MIN_LABEL_FREQUENCY: usize = 11;

const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.tsv");

/// Auxiliaries absorbed by a following negative ("could not" -> "not").
/// Listed both raw and stemmed so the rule also holds on normalized input.
const AUXILIARIES: &[&str] = &[
    "can", "could", "would", "should", "will", "do", "doe", "does", "did", "is", "are", "was", "wa", "were",
    "must", "might", "need", "has", "ha", "have", "had",
];

#[derive(Debug)]
pub struct LabelNormalizer {
    stemmer: Stemmer,
    negatives: BTreeSet<String>,
}

impl LabelNormalizer {
    pub fn new(lists: &WordLists) -> Self {
        Self {
            stemmer: lists.stemmer(),
            negatives: lists.negative_modifiers.clone(),
        }
    }

    pub fn bundled() -> Self {
        Self::new(&WordLists::bundled())
    }

    /// Normalizes a label: lowercase, strip digits, symbols and non-ASCII,
    /// drop single letters, stem, unify negatives to "not".
    ///
    /// Apostrophes are deleted (`can't` -> `cant`); every other symbol
    /// separates words (`cannot-reproduce` -> `cannot reproduce`). May return
    /// an empty string.
    pub fn normalize(&self, raw: &str) -> String {
        let lowered = raw.to_lowercase();
        let mut cleaned = String::with_capacity(lowered.len());
        for c in lowered.chars() {
            match c {
                'a'..='z' => cleaned.push(c),
                '\'' | '0'..='9' => {}
                c if !c.is_ascii() => {}
                _ => cleaned.push(' '),
            }
        }

        let mut out: Vec<String> = Vec::new();
        for word in cleaned.split_whitespace().filter(|w| w.len() > 1) {
            let token = if self.negatives.contains(word) {
                "not".to_string()
            } else {
                let stem = self.stemmer.stem(word);
                if self.negatives.contains(&stem) {
                    "not".to_string()
                } else if stem.len() > 1 {
                    stem
                } else {
                    continue;
                }
            };
            if token == "not" {
                while out.last().is_some_and(|t| AUXILIARIES.contains(&t.as_str())) {
                    out.pop();
                }
                if out.last().is_some_and(|t| t == "not") {
                    continue;
                }
            }
            out.push(token);
        }
        out.join(" ")
    }
}

fn shared() -> &'static LabelNormalizer {
    static SHARED: OnceLock<LabelNormalizer> = OnceLock::new();
    SHARED.get_or_init(LabelNormalizer::bundled)
}

/// [`LabelNormalizer::normalize`] with the bundled word lists.
pub fn normalize_label(raw: &str) -> String {
    shared().normalize(raw)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedLabel {
    pub surface: String,
    pub originals: BTreeSet<String>,
    /// Distinct issues carrying any original form.
    pub frequency: usize,
}

/// Groups label originals by surface form. Sorted by descending frequency,
/// ties by surface.
pub fn build_label_table(corpus: &Corpus, normalizer: &LabelNormalizer) -> Vec<NormalizedLabel> {
    let mut cache: HashMap<&str, String> = HashMap::new();
    let mut groups: BTreeMap<String, (BTreeSet<String>, usize)> = BTreeMap::new();
    for issue in &corpus.issues {
        let mut seen = BTreeSet::new();
        for original in &issue.label_names {
            let surface = cache
                .entry(original.as_str())
                .or_insert_with(|| normalizer.normalize(original))
                .clone();
            if surface.is_empty() {
                continue;
            }
            let entry = groups.entry(surface.clone()).or_default();
            entry.0.insert(original.clone());
            if seen.insert(surface) {
                entry.1 += 1;
            }
        }
    }
    let mut table: Vec<NormalizedLabel> = groups
        .into_iter()
        .map(|(surface, (originals, frequency))| NormalizedLabel {
            surface,
            originals,
            frequency,
        })
        .collect();
    table.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.surface.cmp(&b.surface)));
    table
}

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("cannot read lexicon {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("lexicon line {line}: `{surface}` maps to both {first} and {second}")]
    Conflict {
        line: usize,
        surface: String,
        first: IntentClass,
        second: IntentClass,
    },
    #[error("lexicon key `{key}` is not normalized (normalizes to `{normalized}`)")]
    LexiconKeyNotNormalized { key: String, normalized: String },
}

/// Surface label to intent. Each key maps to exactly one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentLexicon {
    pub entries: BTreeMap<String, IntentClass>,
    pub provenance: String,
}

impl IntentLexicon {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON, "bundled:lexicon.tsv").expect("bundled lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self, LabelError> {
        let text = fs::read_to_string(path).map_err(|source| LabelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `surface<TAB>class` lines; `#` starts a comment line.
    pub fn parse(text: &str, provenance: &str) -> Result<Self, LabelError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (surface, class) = trimmed.split_once('\t').ok_or_else(|| LabelError::Malformed {
                line: line_no,
                reason: "expected `surface<TAB>class`".into(),
            })?;
            let class: IntentClass = class.parse().map_err(|e: crate::intent::UnknownIntent| LabelError::Malformed {
                line: line_no,
                reason: e.to_string(),
            })?;
            let surface = surface.trim().to_string();
            if let Some(&first) = entries.get(&surface) {
                if first != class {
                    return Err(LabelError::Conflict {
                        line: line_no,
                        surface,
                        first,
                        second: class,
                    });
                }
            }
            entries.insert(surface, class);
        }
        Ok(Self {
            entries,
            provenance: provenance.to_string(),
        })
    }

    /// Every key must already be a fixed point of normalization.
    pub fn validate(&self, normalizer: &LabelNormalizer) -> Result<(), LabelError> {
        for key in self.entries.keys() {
            let normalized = normalizer.normalize(key);
            if normalized.is_empty() || &normalized != key {
                return Err(LabelError::LexiconKeyNotNormalized {
                    key: key.clone(),
                    normalized,
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, surface: &str) -> Option<IntentClass> {
        self.entries.get(surface).copied()
    }
}

/// Intents per issue. An empty set marks the issue Unrelated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntentAssignment {
    pub intents: BTreeMap<String, IntentSet>,
}

impl IntentAssignment {
    pub fn get(&self, issue_id: &str) -> Option<&IntentSet> {
        self.intents.get(issue_id)
    }

    pub fn is_unrelated(&self, issue_id: &str) -> bool {
        self.intents.get(issue_id).is_none_or(|s| s.is_empty())
    }

    pub fn related_count(&self) -> usize {
        self.intents.values().filter(|s| !s.is_empty()).count()
    }
}

/// Gives an issue class `C` when it carries a label whose surface maps to
/// `C` and whose corpus frequency is at least `min_label_frequency`.
pub fn assign_intents(
    corpus: &Corpus,
    lexicon: &IntentLexicon,
    min_label_frequency: usize,
    normalizer: &LabelNormalizer,
) -> Result<IntentAssignment, LabelError> {
    lexicon.validate(normalizer)?;
    let frequent: HashMap<String, usize> = build_label_table(corpus, normalizer)
        .into_iter()
        .filter(|l| l.frequency >= min_label_frequency)
        .map(|l| (l.surface, l.frequency))
        .collect();
    let mut assignment = IntentAssignment::default();
    for issue in &corpus.issues {
        let intents: IntentSet = issue
            .label_names
            .iter()
            .map(|l| normalizer.normalize(l))
            .filter(|s| frequent.contains_key(s))
            .filter_map(|s| lexicon.get(&s))
            .collect();
        assignment.intents.insert(issue.issue_id.clone(), intents);
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::{RawIssue, RepoRecord};

    #[test]
    fn worked_examples() {
        assert_eq!(normalize_label("P1"), "");
        assert_eq!(normalize_label("can't reproduce"), "not reproduc");
        assert_eq!(normalize_label("Type: enhancement"), "type enhanc");
        assert_eq!(normalize_label("b: crash"), "crash");
        assert_eq!(normalize_label("[Crash]"), "crash");
        assert_eq!(normalize_label("type/enhancement"), "type enhanc");
    }

    #[test]
    fn emoji_and_digits_are_removed() {
        assert_eq!(normalize_label("🐛 Bug"), "bug");
        assert_eq!(normalize_label("v2.0"), "");
    }

    #[test]
    fn bundled_lexicon_is_normalized() {
        IntentLexicon::bundled().validate(&LabelNormalizer::bundled()).unwrap();
    }

    #[test]
    fn unnormalized_key_is_rejected() {
        let lex = IntentLexicon::parse("Enhancement\tfeature\n", "test").unwrap();
        let err = lex.validate(&LabelNormalizer::bundled()).unwrap_err();
        assert!(matches!(err, LabelError::LexiconKeyNotNormalized { .. }));
    }

    #[test]
    fn conflicting_entries_are_rejected() {
        let err = IntentLexicon::parse("bug\tbug\nbug\tfeature\n", "test").unwrap_err();
        assert!(matches!(err, LabelError::Conflict { line: 2, .. }));
    }

    fn corpus(issues: &[(&str, &[&str])]) -> Corpus {
        let mut c = Corpus::default();
        c.repos.push(RepoRecord {
            repo_id: "r".into(),
            full_name: "o/r".into(),
            contributors: 2,
            stars: 0,
            labeled_issue_count: 0,
            readme_text: None,
            about_text: None,
        });
        for (id, labels) in issues {
            c.issues.push(RawIssue {
                issue_id: id.to_string(),
                repo_id: "r".into(),
                title: String::new(),
                body: String::new(),
                label_names: labels.iter().map(|s| s.to_string()).collect(),
                created_at: String::new(),
            });
        }
        c.recount();
        c
    }

    #[test]
    fn case_variants_share_one_entry() {
        let c = corpus(&[("1", &["Bug"]), ("2", &["bug"])]);
        let table = build_label_table(&c, &LabelNormalizer::bundled());
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].surface, "bug");
        assert_eq!(table[0].frequency, 2);
        assert_eq!(table[0].originals.len(), 2);
    }

    #[test]
    fn frequency_counts_distinct_issues() {
        // "Bug" and "bug" on the same issue count once.
        let c = corpus(&[("1", &["Bug", "bug"]), ("2", &["P1"])]);
        let table = build_label_table(&c, &LabelNormalizer::bundled());
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].frequency, 1);
    }

    #[test]
    fn no_labels_no_table() {
        let c = corpus(&[("1", &[])]);
        assert!(build_label_table(&c, &LabelNormalizer::bundled()).is_empty());
    }

    #[test]
    fn assigns_union_of_intents() {
        let c = corpus(&[("1", &["crash"]), ("2", &["crash", "enhancement"]), ("3", &["priority high"])]);
        let a = assign_intents(&c, &IntentLexicon::bundled(), 1, &LabelNormalizer::bundled()).unwrap();
        assert_eq!(a.get("1").unwrap(), &IntentSet::from([IntentClass::BugReport]));
        assert_eq!(
            a.get("2").unwrap(),
            &IntentSet::from([IntentClass::BugReport, IntentClass::FeatureRequest])
        );
        assert!(a.is_unrelated("3"));
        assert_eq!(a.related_count(), 2);
    }

    #[test]
    fn rare_labels_are_ignored() {
        let c = corpus(&[("1", &["crash"]), ("2", &["bug"]), ("3", &["bug"])]);
        let a = assign_intents(&c, &IntentLexicon::bundled(), 2, &LabelNormalizer::bundled()).unwrap();
        assert!(a.is_unrelated("1"));
        assert!(!a.is_unrelated("2"));
    }
}
