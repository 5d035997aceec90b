use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

pub const REPOS_FILE: &str = "repos.jsonl";
pub const ISSUES_FILE: &str = "issues.jsonl";
pub const TEMPLATES_FILE: &str = "templates.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepoRecord {
    pub repo_id: String,
    pub full_name: String,
    pub contributors: u64,
    pub stars: u64,
    /// Issues in the corpus with at least one label. Derived on load.
    #[serde(skip)]
    pub labeled_issue_count: u64,
    pub readme_text: Option<String>,
    pub about_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawIssue {
    pub issue_id: String,
    pub repo_id: String,
    pub title: String,
    pub body: String,
    /// Original label names, unnormalized.
    #[serde(rename = "labels")]
    pub label_names: Vec<String>,
    /// RFC 3339 timestamp, stored verbatim.
    pub created_at: String,
}

impl RawIssue {
    pub fn is_labeled(&self) -> bool {
        !self.label_names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TemplateFormat {
    Markdown,
    Yaml,
}

impl TemplateFormat {
    pub fn from_path(path: &str) -> Option<Self> {
        let lower = path.to_ascii_lowercase();
        if lower.ends_with(".yaml") || lower.ends_with(".yml") {
            Some(TemplateFormat::Yaml)
        } else if lower.ends_with(".md") {
            Some(TemplateFormat::Markdown)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateFile {
    pub repo_id: String,
    pub path: String,
    #[serde(skip)]
    pub format: TemplateFormat,
    pub raw_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub repos: Vec<RepoRecord>,
    pub issues: Vec<RawIssue>,
    pub templates: Vec<TemplateFile>,
}

impl Corpus {
    pub fn repo(&self, repo_id: &str) -> Option<&RepoRecord> {
        self.repos.iter().find(|r| r.repo_id == repo_id)
    }

    /// Recomputes `labeled_issue_count` for every repository.
    pub fn recount(&mut self) {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for issue in self.issues.iter().filter(|i| i.is_labeled()) {
            *counts.entry(issue.repo_id.as_str()).or_default() += 1;
        }
        let counts: HashMap<String, u64> = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for repo in &mut self.repos {
            repo.labeled_issue_count = counts.get(&repo.repo_id).copied().unwrap_or(0);
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("missing corpus file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: field `{field}`: {reason}")]
    SchemaViolation {
        file: String,
        line: usize,
        field: String,
        reason: String,
    },
    #[error("{file}:{line}: `{id}` references unknown repo `{repo_id}`")]
    DanglingRepoRef {
        file: String,
        line: usize,
        id: String,
        repo_id: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// A schema problem on one line, before file and line number are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl FieldError {
    fn new(field: &str, reason: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

fn object(line: &str) -> Result<Map<String, Value>, FieldError> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(FieldError::new("<line>", "expected a JSON object")),
        Err(e) => Err(FieldError::new("<line>", format!("invalid JSON: {e}"))),
    }
}

fn req_str(obj: &Map<String, Value>, field: &str) -> Result<String, FieldError> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(FieldError::new(field, "expected a string")),
        None => Err(FieldError::new(field, "missing")),
    }
}

fn req_id(obj: &Map<String, Value>, field: &str) -> Result<String, FieldError> {
    let id = req_str(obj, field)?;
    if id.is_empty() {
        return Err(FieldError::new(field, "must not be empty"));
    }
    Ok(id)
}

fn opt_str(obj: &Map<String, Value>, field: &str) -> Result<Option<String>, FieldError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(FieldError::new(field, "expected a string or null")),
    }
}

fn req_count(obj: &Map<String, Value>, field: &str) -> Result<u64, FieldError> {
    match obj.get(field) {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| FieldError::new(field, "expected a non-negative integer")),
        None => Err(FieldError::new(field, "missing")),
    }
}

/// Parses one line of `repos.jsonl`.
pub fn parse_repo_line(line: &str) -> Result<RepoRecord, FieldError> {
    let obj = object(line)?;
    Ok(RepoRecord {
        repo_id: req_id(&obj, "repo_id")?,
        full_name: req_str(&obj, "full_name")?,
        contributors: req_count(&obj, "contributors")?,
        stars: req_count(&obj, "stars")?,
        labeled_issue_count: 0,
        readme_text: opt_str(&obj, "readme_text")?,
        about_text: opt_str(&obj, "about_text")?,
    })
}

/// Parses one line of `issues.jsonl`. A null body reads as empty.
pub fn parse_issue_line(line: &str) -> Result<RawIssue, FieldError> {
    let obj = object(line)?;
    let body = match obj.get("body") {
        Some(Value::Null) => String::new(),
        _ => req_str(&obj, "body")?,
    };
    let labels = match obj.get("labels") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| FieldError::new("labels", "expected an array of strings"))
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(FieldError::new("labels", "expected an array of strings")),
        None => return Err(FieldError::new("labels", "missing")),
    };
    Ok(RawIssue {
        issue_id: req_id(&obj, "issue_id")?,
        repo_id: req_id(&obj, "repo_id")?,
        title: req_str(&obj, "title")?,
        body,
        label_names: labels,
        created_at: req_str(&obj, "created_at")?,
    })
}

/// Parses one line of `templates.jsonl`; the format follows the extension.
pub fn parse_template_line(line: &str) -> Result<TemplateFile, FieldError> {
    let obj = object(line)?;
    let path = req_str(&obj, "path")?;
    let format = TemplateFormat::from_path(&path)
        .ok_or_else(|| FieldError::new("path", "template must end in .md, .yml or .yaml"))?;
    Ok(TemplateFile {
        repo_id: req_id(&obj, "repo_id")?,
        path,
        format,
        raw_text: req_str(&obj, "raw_text")?,
    })
}

fn read_lines<T>(
    path: &Path,
    parse: impl Fn(&str) -> Result<T, FieldError>,
) -> Result<Vec<(usize, T)>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row = parse(&line).map_err(|e| IngestError::SchemaViolation {
            file: path.display().to_string(),
            line: idx + 1,
            field: e.field,
            reason: e.reason,
        })?;
        rows.push((idx + 1, row));
    }
    Ok(rows)
}

fn duplicate(path: &Path, line: usize, field: &str, id: &str) -> IngestError {
    IngestError::SchemaViolation {
        file: path.display().to_string(),
        line,
        field: field.to_string(),
        reason: format!("duplicate id `{id}`"),
    }
}

/// Loads a corpus directory containing `repos.jsonl`, `issues.jsonl` and
/// optionally `templates.jsonl`. Rows keep file order.
pub fn load_corpus(dir: &Path) -> Result<Corpus, IngestError> {
    let repos_path = dir.join(REPOS_FILE);
    let issues_path = dir.join(ISSUES_FILE);
    let templates_path = dir.join(TEMPLATES_FILE);
    for required in [&repos_path, &issues_path] {
        if !required.is_file() {
            return Err(IngestError::MissingFile(required.clone()));
        }
    }

    let mut repo_ids = HashSet::new();
    let mut repos = Vec::new();
    for (line, repo) in read_lines(&repos_path, parse_repo_line)? {
        if !repo_ids.insert(repo.repo_id.clone()) {
            return Err(duplicate(&repos_path, line, "repo_id", &repo.repo_id));
        }
        repos.push(repo);
    }

    let mut issue_ids = HashSet::new();
    let mut issues = Vec::new();
    for (line, issue) in read_lines(&issues_path, parse_issue_line)? {
        if !issue_ids.insert(issue.issue_id.clone()) {
            return Err(duplicate(&issues_path, line, "issue_id", &issue.issue_id));
        }
        if !repo_ids.contains(&issue.repo_id) {
            return Err(IngestError::DanglingRepoRef {
                file: issues_path.display().to_string(),
                line,
                id: issue.issue_id,
                repo_id: issue.repo_id,
            });
        }
        issues.push(issue);
    }

    let mut templates = Vec::new();
    if templates_path.is_file() {
        for (line, template) in read_lines(&templates_path, parse_template_line)? {
            if !repo_ids.contains(&template.repo_id) {
                return Err(IngestError::DanglingRepoRef {
                    file: templates_path.display().to_string(),
                    line,
                    id: template.path,
                    repo_id: template.repo_id,
                });
            }
            templates.push(template);
        }
    }

    let mut corpus = Corpus {
        repos,
        issues,
        templates,
    };
    corpus.recount();
    Ok(corpus)
}

/// Writes the three corpus files in `load_corpus` schema, creating `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<(), IngestError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let repos = dir.join(REPOS_FILE);
    crate::jsonl::write(&repos, &corpus.repos).map_err(io_err(&repos))?;
    let issues = dir.join(ISSUES_FILE);
    crate::jsonl::write(&issues, &corpus.issues).map_err(io_err(&issues))?;
    let templates = dir.join(TEMPLATES_FILE);
    crate::jsonl::write(&templates, &corpus.templates).map_err(io_err(&templates))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_title_reports_field() {
        let err = parse_issue_line(r#"{"issue_id":"1","repo_id":"r","body":"","labels":[],"created_at":"x"}"#)
            .unwrap_err();
        assert_eq!(err.field, "title");
    }

    #[test]
    fn null_body_reads_as_empty() {
        let issue = parse_issue_line(
            r#"{"issue_id":"1","repo_id":"r","title":"t","body":null,"labels":["bug"],"created_at":"2023-01-01T00:00:00Z"}"#,
        )
        .unwrap();
        assert_eq!(issue.body, "");
        assert!(issue.is_labeled());
    }

    #[test]
    fn negative_counts_are_rejected() {
        let err = parse_repo_line(r#"{"repo_id":"r","full_name":"a/b","contributors":-1,"stars":0}"#).unwrap_err();
        assert_eq!(err.field, "contributors");
    }

    #[test]
    fn template_format_follows_extension() {
        assert_eq!(TemplateFormat::from_path("bug.YML"), Some(TemplateFormat::Yaml));
        assert_eq!(TemplateFormat::from_path("x/feature.yaml"), Some(TemplateFormat::Yaml));
        assert_eq!(TemplateFormat::from_path("crash_report.md"), Some(TemplateFormat::Markdown));
        assert_eq!(TemplateFormat::from_path("notes.txt"), None);
        assert!(parse_template_line(r#"{"repo_id":"r","path":"a.txt","raw_text":""}"#).is_err());
    }

    #[test]
    fn rejects_non_objects() {
        assert_eq!(parse_repo_line("[1,2]").unwrap_err().field, "<line>");
        assert_eq!(parse_repo_line("{oops").unwrap_err().field, "<line>");
    }
}
