use serde::Serialize;
use serde_yaml::Value;

use super::sections::{split_sections, TitleNormalizer};
use crate::ingestion::{TemplateFile, TemplateFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TemplateGroup {
    Bug,
    Feature,
    Other,
    Issue,
    Deleted,
}

#[derive(Debug, thiserror::Error)]
#[error("template {path}: {reason}")]
pub struct TemplateParseError {
    pub path: String,
    pub reason: String,
}

const KEYWORDS: &[(TemplateGroup, &[&str])] = &[
    (TemplateGroup::Bug, &["bug", "crash", "defect"]),
    (TemplateGroup::Feature, &["feature", "enhancement", "request", "idea", "suggest"]),
    (TemplateGroup::Other, &["question", "support", "faq"]),
    (TemplateGroup::Issue, &["issue"]),
];

fn group_of_words(text: &str) -> Option<TemplateGroup> {
    let lower = text.to_lowercase();
    let words: Vec<&str> = lower.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()).collect();
    KEYWORDS
        .iter()
        .find(|(_, keys)| words.iter().any(|w| keys.iter().any(|k| w.starts_with(k))))
        .map(|(g, _)| *g)
}

/// Parsed template header and body.
struct Parsed {
    name: String,
    description: String,
    /// Section titles in declaration order.
    titles: Vec<String>,
}

fn yaml_str(v: &Value, key: &str) -> String {
    v.get(key).and_then(Value::as_str).unwrap_or_default().to_string()
}

fn parse(tf: &TemplateFile) -> Result<Parsed, TemplateParseError> {
    let err = |reason: String| TemplateParseError {
        path: tf.path.clone(),
        reason,
    };
    match tf.format {
        TemplateFormat::Yaml => {
            let doc: Value = serde_yaml::from_str(&tf.raw_text).map_err(|e| err(e.to_string()))?;
            if !doc.is_mapping() {
                return Err(err("top level is not a mapping".into()));
            }
            let mut titles = Vec::new();
            if let Some(items) = doc.get("body").and_then(Value::as_sequence) {
                for item in items {
                    if item.get("type").and_then(Value::as_str) == Some("markdown") {
                        continue;
                    }
                    if let Some(label) = item.get("attributes").and_then(|a| a.get("label")).and_then(Value::as_str) {
                        titles.push(label.trim().to_string());
                    }
                }
            }
            Ok(Parsed {
                name: yaml_str(&doc, "name"),
                description: yaml_str(&doc, "description"),
                titles,
            })
        }
        TemplateFormat::Markdown => {
            let (header, body) = split_front_matter(&tf.raw_text);
            let (name, description) = match header {
                Some(h) if !h.trim().is_empty() => {
                    let doc: Value = serde_yaml::from_str(h).map_err(|e| err(e.to_string()))?;
                    (yaml_str(&doc, "name"), yaml_str(&doc, "about"))
                }
                _ => (String::new(), String::new()),
            };
            let titles = split_sections(body).into_iter().map(|s| s.raw_title).collect();
            Ok(Parsed {
                name,
                description,
                titles,
            })
        }
    }
}

fn split_front_matter(text: &str) -> (Option<&str>, &str) {
    let Some(rest) = text.strip_prefix("---\n").or_else(|| text.strip_prefix("---\r\n")) else {
        return (None, text);
    };
    match rest.find("\n---") {
        Some(end) => {
            let after = &rest[end + 4..];
            let body = after.split_once('\n').map(|(_, b)| b).unwrap_or("");
            (Some(&rest[..end]), body)
        }
        None => (None, text),
    }
}

/// Classifies a template by its file name, then by its declared name and
/// description. Unmatched templates are [`TemplateGroup::Deleted`].
pub fn group_template(tf: &TemplateFile) -> Result<TemplateGroup, TemplateParseError> {
    let parsed = parse(tf)?;
    let file_name = tf.path.rsplit('/').next().unwrap_or(&tf.path);
    let stem = file_name.rsplit_once('.').map(|(s, _)| s).unwrap_or(file_name);
    Ok(group_of_words(stem)
        .or_else(|| group_of_words(&parsed.name))
        .or_else(|| group_of_words(&parsed.description))
        .unwrap_or(TemplateGroup::Deleted))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarvestedTitle {
    pub repo_id: String,
    pub path: String,
    pub group: TemplateGroup,
    pub raw_title: String,
    pub normalized_title: String,
}

#[derive(Debug, Default)]
pub struct Harvest {
    pub titles: Vec<HarvestedTitle>,
    pub parse_errors: Vec<TemplateParseError>,
    pub deleted: usize,
}

/// Collects section titles from every non-deleted template. Malformed
/// templates are counted and skipped.
pub fn harvest_titles(templates: &[TemplateFile], normalizer: &TitleNormalizer) -> Harvest {
    let mut harvest = Harvest::default();
    for tf in templates {
        let group = match group_template(tf) {
            Ok(TemplateGroup::Deleted) => {
                harvest.deleted += 1;
                continue;
            }
            Ok(g) => g,
            Err(e) => {
                harvest.parse_errors.push(e);
                continue;
            }
        };
        // parse cannot fail here: group_template already parsed it
        let Ok(parsed) = parse(tf) else { continue };
        for raw_title in parsed.titles {
            harvest.titles.push(HarvestedTitle {
                repo_id: tf.repo_id.clone(),
                path: tf.path.clone(),
                group,
                normalized_title: normalizer.normalize(&raw_title),
                raw_title,
            });
        }
    }
    harvest
}
