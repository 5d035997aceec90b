use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::stem::Stemmer;
use crate::textprep::{fence_closer, fence_opener, WordLists};

/// Stopwords kept in normalized titles; several patterns depend on them.
pub const TITLE_RETAINED: [&str; 3] = ["what", "about", "should"];

/// Longest `Label:` line still treated as a section title.
const MAX_LABEL_WORDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BodySection {
    pub raw_title: String,
    pub normalized_title: String,
    pub content: String,
    pub order: usize,
}

/// Lowercases, stems and drops stopwords (except [`TITLE_RETAINED`]).
#[derive(Debug)]
pub struct TitleNormalizer {
    stemmer: Stemmer,
    stopwords: BTreeSet<String>,
}

impl TitleNormalizer {
    pub fn new(lists: &WordLists) -> Self {
        let stopwords = lists
            .stopwords
            .iter()
            .filter(|w| !TITLE_RETAINED.contains(&w.as_str()))
            .cloned()
            .collect();
        Self {
            stemmer: lists.stemmer(),
            stopwords,
        }
    }

    pub fn bundled() -> Self {
        Self::new(&WordLists::bundled())
    }

    pub fn normalize(&self, title: &str) -> String {
        let lowered = title.to_lowercase();
        let cleaned: String = lowered
            .chars()
            .map(|c| if c.is_ascii_lowercase() { c } else { ' ' })
            .collect();
        cleaned
            .split_whitespace()
            .filter(|w| !self.stopwords.contains(*w))
            .map(|w| self.stemmer.stem(w))
            .filter(|s| !self.stopwords.contains(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub(crate) fn shared_normalizer() -> &'static TitleNormalizer {
    static SHARED: OnceLock<TitleNormalizer> = OnceLock::new();
    SHARED.get_or_init(TitleNormalizer::bundled)
}

struct TitleRules {
    atx: Regex,
    bold: Regex,
    label: Regex,
}

fn rules() -> &'static TitleRules {
    static R: OnceLock<TitleRules> = OnceLock::new();
    R.get_or_init(|| TitleRules {
        atx: Regex::new(r"^ {0,3}#{1,6}[ \t]+(.*?)(?:[ \t]+#+)?[ \t]*$").unwrap(),
        bold: Regex::new(r"^\s*(?:\*\*(.+?)\*\*|__(.+?)__)\s*:?\s*$").unwrap(),
        label: Regex::new(r"^([A-Z][^:]*):\s*$").unwrap(),
    })
}

/// Returns the title text if `line` is a section title.
pub fn title_of(line: &str) -> Option<String> {
    let r = rules();
    let title = if let Some(c) = r.atx.captures(line) {
        c[1].to_string()
    } else if let Some(c) = r.bold.captures(line) {
        c.get(1).or_else(|| c.get(2))?.as_str().to_string()
    } else {
        let c = r.label.captures(line)?;
        let text = c[1].to_string();
        if text.split_whitespace().count() > MAX_LABEL_WORDS {
            return None;
        }
        text
    };
    let title = title.trim().trim_end_matches(':').trim();
    if title.is_empty() {
        None
    } else {
        Some(title.to_string())
    }
}

/// Splits a body into titled sections. Text before the first title is
/// discarded; see [`split_with_preamble`] to keep it.
pub fn split_sections(body: &str) -> Vec<BodySection> {
    split_with_preamble(body).1
}

/// Like [`split_sections`] but also returns the text before the first
/// title, trimmed.
pub fn split_with_preamble(body: &str) -> (String, Vec<BodySection>) {
    split_with(body, shared_normalizer())
}

pub fn split_with(body: &str, normalizer: &TitleNormalizer) -> (String, Vec<BodySection>) {
    let mut preamble: Vec<&str> = Vec::new();
    let mut sections: Vec<(String, Vec<&str>)> = Vec::new();
    let mut fence: Option<(char, usize)> = None;

    for line in body.lines() {
        let title = match fence {
            Some(open) => {
                if fence_closer(line, open) {
                    fence = None;
                }
                None
            }
            None => {
                fence = fence_opener(line);
                if fence.is_some() {
                    None
                } else {
                    title_of(line)
                }
            }
        };
        match (title, sections.last_mut()) {
            (Some(t), _) => sections.push((t, Vec::new())),
            (None, Some((_, content))) => content.push(line),
            (None, None) => preamble.push(line),
        }
    }

    let sections = sections
        .into_iter()
        .enumerate()
        .map(|(order, (raw_title, content))| BodySection {
            normalized_title: normalizer.normalize(&raw_title),
            raw_title,
            content: content.join("\n").trim().to_string(),
            order,
        })
        .collect();
    (preamble.join("\n").trim().to_string(), sections)
}
