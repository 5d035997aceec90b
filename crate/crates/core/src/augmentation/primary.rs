use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::AugmentError;
use crate::textprep::{admit, DocSource, Preprocessor, ProcessedDocument};
use crate::{IntentClass, IntentSet};

/// What a source label of a primary dataset becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTarget {
    Intent(IntentClass),
    Drop,
}

/// Source label to intent, per primary dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    pub entries: BTreeMap<String, LabelTarget>,
}

impl LabelMap {
    /// Parses `label<TAB>bug|feature|other|drop` lines.
    pub fn parse(text: &str) -> Result<Self, AugmentError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let bad = |reason: String| AugmentError::LabelMap { line: idx + 1, reason };
            let (label, target) = trimmed
                .split_once('\t')
                .ok_or_else(|| bad("expected `label<TAB>target`".into()))?;
            let target = match target.trim().to_ascii_lowercase().as_str() {
                "drop" => LabelTarget::Drop,
                other => LabelTarget::Intent(other.parse().map_err(|e: crate::intent::UnknownIntent| bad(e.to_string()))?),
            };
            entries.insert(label.trim().to_string(), target);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, AugmentError> {
        let text = fs::read_to_string(path).map_err(|source| AugmentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, label: &str) -> Option<LabelTarget> {
        self.entries.get(label.trim()).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryDataset {
    pub name: String,
    pub rows: Vec<ProcessedDocument>,
    pub dropped_by_label: usize,
    pub dropped_by_admit: usize,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    text: String,
    label: String,
    #[serde(default)]
    app_id: Option<String>,
}

/// Loads a `text,label[,app_id]` CSV. Row `i` (1-based, header excluded)
/// gets doc id `{name}:{i}`.
pub fn load_primary(
    path: &Path,
    name: &str,
    label_map: &LabelMap,
    prep: &Preprocessor,
) -> Result<PrimaryDataset, AugmentError> {
    let csv_err = |source: csv::Error| AugmentError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut dataset = PrimaryDataset {
        name: name.to_string(),
        rows: Vec::new(),
        dropped_by_label: 0,
        dropped_by_admit: 0,
    };
    for (idx, record) in reader.deserialize::<CsvRow>().enumerate() {
        let row_no = idx + 1;
        let record = record.map_err(csv_err)?;
        let class = match label_map.get(&record.label) {
            None => {
                return Err(AugmentError::UnknownLabel {
                    row: row_no,
                    label: record.label,
                })
            }
            Some(LabelTarget::Drop) => {
                dataset.dropped_by_label += 1;
                continue;
            }
            Some(LabelTarget::Intent(c)) => c,
        };
        let tokens = prep.tokens(&record.text);
        if !admit(&tokens, DocSource::Review, None) {
            dataset.dropped_by_admit += 1;
            continue;
        }
        dataset.rows.push(ProcessedDocument {
            doc_id: format!("{name}:{row_no}"),
            source: DocSource::Review,
            app_id: record.app_id.filter(|a| !a.is_empty()),
            tokens,
            intents: IntentSet::from([class]),
        });
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const PD3: &str = include_str!("../../data/labelmaps/pd3.tsv");
    const PD5: &str = include_str!("../../data/labelmaps/pd5.tsv");

    fn csv_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "text,label,app_id\n{body}").unwrap();
        f
    }

    #[test]
    fn maps_labels() {
        let f = csv_file("please add a dark theme option,FeatureRequest,a\n");
        let ds = load_primary(f.path(), "pd3", &LabelMap::parse(PD3).unwrap(), &Preprocessor::bundled()).unwrap();
        assert_eq!(ds.rows.len(), 1);
        assert_eq!(ds.rows[0].doc_id, "pd3:1");
        assert_eq!(ds.rows[0].intents, IntentSet::from([IntentClass::FeatureRequest]));
        assert_eq!(ds.rows[0].app_id.as_deref(), Some("a"));
    }

    #[test]
    fn drops_mapped_labels() {
        let f = csv_file("battery drains very quickly now,PERFORMANCE,\nthe app crashes on startup,BUG,\n");
        let ds = load_primary(f.path(), "pd5", &LabelMap::parse(PD5).unwrap(), &Preprocessor::bundled()).unwrap();
        assert_eq!(ds.rows.len(), 1);
        assert_eq!(ds.rows[0].doc_id, "pd5:2");
        assert_eq!(ds.dropped_by_label, 1);
        assert_eq!(ds.rows[0].app_id, None);
    }

    #[test]
    fn unknown_label_fails() {
        let f = csv_file("great app,Praise2,\n");
        let err = load_primary(f.path(), "pd3", &LabelMap::parse(PD3).unwrap(), &Preprocessor::bundled()).unwrap_err();
        assert!(matches!(err, AugmentError::UnknownLabel { row: 1, .. }));
    }

    #[test]
    fn short_reviews_are_not_admitted() {
        let f = csv_file("great app,Other,\n");
        let ds = load_primary(f.path(), "pd3", &LabelMap::parse(PD3).unwrap(), &Preprocessor::bundled()).unwrap();
        assert!(ds.rows.is_empty());
        assert_eq!(ds.dropped_by_admit, 1);
    }

    #[test]
    fn bad_label_map_line() {
        assert!(LabelMap::parse("Bug\tbogus\n").is_err());
        assert!(LabelMap::parse("no tab here\n").is_err());
    }
}
