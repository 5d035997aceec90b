//! Section splitting, template grouping and target-section extraction.

mod patterns;
mod sections;
mod template;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingestion::RawIssue;
use crate::textprep::Preprocessor;

pub use patterns::{Pattern, PatternError, PatternSet, PATTERN_COUNT};
pub use sections::{
    split_sections, split_with, split_with_preamble, title_of, BodySection, TitleNormalizer, TITLE_RETAINED,
};
pub use template::{group_template, harvest_titles, Harvest, HarvestedTitle, TemplateGroup, TemplateParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMode {
    SectionMatch,
    SingleParagraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedSection {
    pub issue_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_pattern: Option<String>,
    pub mode: ExtractionMode,
}

/// First section, in body order, whose normalized title matches any pattern.
pub fn match_target<'a>(sections: &'a [BodySection], patterns: &'a PatternSet) -> Option<(&'a BodySection, &'a str)> {
    sections
        .iter()
        .find_map(|s| patterns.first_match(&s.normalized_title).map(|name| (s, name)))
}

/// Number of maximal runs of non-blank lines.
pub fn paragraph_count(text: &str) -> usize {
    let mut count = 0;
    let mut in_para = false;
    for line in text.lines() {
        let blank = line.trim().is_empty();
        if !blank && !in_para {
            count += 1;
        }
        in_para = !blank;
    }
    count
}

/// Extracts the target section from an issue body, or the whole body when
/// it has no sections and is a single paragraph after noise stripping.
pub fn extract(issue: &RawIssue, patterns: &PatternSet, prep: &Preprocessor) -> Option<ExtractedSection> {
    let sections = split_sections(&issue.body);
    if !sections.is_empty() {
        let (section, name) = match_target(&sections, patterns)?;
        if prep.strip_noise(&section.content).trim().is_empty() {
            return None;
        }
        return Some(ExtractedSection {
            issue_id: issue.issue_id.clone(),
            text: section.content.clone(),
            matched_pattern: Some(name.to_string()),
            mode: ExtractionMode::SectionMatch,
        });
    }
    if paragraph_count(&prep.strip_noise(&issue.body)) != 1 {
        return None;
    }
    Some(ExtractedSection {
        issue_id: issue.issue_id.clone(),
        text: issue.body.trim().to_string(),
        matched_pattern: None,
        mode: ExtractionMode::SingleParagraph,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub issues: usize,
    pub extracted: usize,
    pub section_match: usize,
    pub single_paragraph: usize,
    pub pattern_hits: BTreeMap<String, usize>,
}

impl ExtractionStats {
    pub fn record(&mut self, result: Option<&ExtractedSection>) {
        self.issues += 1;
        let Some(e) = result else { return };
        self.extracted += 1;
        match e.mode {
            ExtractionMode::SectionMatch => self.section_match += 1,
            ExtractionMode::SingleParagraph => self.single_paragraph += 1,
        }
        if let Some(p) = &e.matched_pattern {
            *self.pattern_hits.entry(p.clone()).or_default() += 1;
        }
    }
}

/// Runs [`extract`] over issues, in input order.
pub fn extract_all<'a>(
    issues: impl IntoIterator<Item = &'a RawIssue>,
    patterns: &PatternSet,
    prep: &Preprocessor,
) -> (Vec<ExtractedSection>, ExtractionStats) {
    let mut stats = ExtractionStats::default();
    let mut out = Vec::new();
    for issue in issues {
        let e = extract(issue, patterns, prep);
        stats.record(e.as_ref());
        out.extend(e);
    }
    (out, stats)
}

/// An issue with its expected extraction; `gold = None` means nothing
/// should be extracted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldIssue {
    pub issue_id: String,
    pub title: String,
    pub body: String,
    pub gold: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("cannot read fixture {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("fixture line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("fixture line {line}: issue {issue_id} has no `gold` field")]
    MissingGold { line: usize, issue_id: String },
}

pub fn parse_gold(text: &str) -> Result<Vec<GoldIssue>, VerifyError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| VerifyError::Malformed { line: line_no, reason };
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let field = |name: &str| -> Result<String, VerifyError> {
            v.get(name)
                .and_then(|x| x.as_str())
                .map(str::to_string)
                .ok_or_else(|| malformed(format!("missing string field `{name}`")))
        };
        let issue_id = field("issue_id")?;
        let gold = match v.get("gold") {
            None => return Err(VerifyError::MissingGold { line: line_no, issue_id }),
            Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(malformed("`gold` must be a string or null".into())),
        };
        out.push(GoldIssue {
            title: field("title")?,
            body: field("body")?,
            issue_id,
            gold,
        });
    }
    Ok(out)
}

pub fn load_gold(path: &Path) -> Result<Vec<GoldIssue>, VerifyError> {
    let text = fs::read_to_string(path).map_err(|source| VerifyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_gold(&text)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Gold section exists, nothing extracted.
    pub missed: Vec<String>,
    /// Something other than the gold section extracted.
    pub wrong_section: Vec<String>,
    /// Extracted where nothing should have been.
    pub spurious: Vec<String>,
    pub pattern_hits: BTreeMap<String, usize>,
}

/// Fraction of fixture issues where [`extract`] returns exactly the gold
/// text (both trimmed), or nothing when gold is null.
/// Gold and extracted text agree when they are equal after noise removal,
/// ignoring whitespace layout. Leftover template comments do not count.
fn same_text(gold: &str, got: &str, prep: &Preprocessor) -> bool {
    let flat = |t: &str| prep.strip_noise(t).split_whitespace().collect::<Vec<_>>().join(" ");
    flat(gold) == flat(got)
}

pub fn verify_patterns(fixture: &[GoldIssue], patterns: &PatternSet, prep: &Preprocessor) -> VerifyReport {
    let mut report = VerifyReport {
        total: fixture.len(),
        ..Default::default()
    };
    for g in fixture {
        let issue = RawIssue {
            issue_id: g.issue_id.clone(),
            repo_id: String::new(),
            title: g.title.clone(),
            body: g.body.clone(),
            label_names: Vec::new(),
            created_at: String::new(),
        };
        let got = extract(&issue, patterns, prep);
        if let Some(p) = got.as_ref().and_then(|e| e.matched_pattern.as_ref()) {
            *report.pattern_hits.entry(p.clone()).or_default() += 1;
        }
        match (&g.gold, got) {
            (None, None) => report.correct += 1,
            (Some(gold), Some(e)) if same_text(gold, &e.text, prep) => report.correct += 1,
            (Some(_), Some(_)) => report.wrong_section.push(g.issue_id.clone()),
            (Some(_), None) => report.missed.push(g.issue_id.clone()),
            (None, Some(_)) => report.spurious.push(g.issue_id.clone()),
        }
    }
    report.accuracy = if report.total == 0 {
        0.0
    } else {
        report.correct as f64 / report.total as f64
    };
    report
}
