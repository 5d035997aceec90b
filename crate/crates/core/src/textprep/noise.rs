//! Removal of markup and boilerplate that never appears in a user review.

use std::sync::OnceLock;

use regex::Regex;

use super::WordLists;

const MARK: char = '\u{0}';

struct Patterns {
    html_comment: Regex,
    checklist: Regex,
    stack_frame: Regex,
    exception_line: Regex,
    error_line: Regex,
    inline_code: Regex,
    html_tag: Regex,
    url: Regex,
    underscored: Regex,
    mention: Regex,
    issue_ref: Regex,
}

fn patterns() -> &'static Patterns {
    static PATTERNS: OnceLock<Patterns> = OnceLock::new();
    PATTERNS.get_or_init(|| Patterns {
        html_comment: Regex::new(r"(?s)<!--.*?(?:-->|\z)").unwrap(),
        checklist: Regex::new(r"^\s*(?:[-*+]|\d+[.)])\s+\[[ xX]\]").unwrap(),
        stack_frame: Regex::new(r"^\s*at\s+[\w$]+(?:\.[\w$<>]+)+").unwrap(),
        exception_line: Regex::new(r"^\s*(?:Caused by:\s*)?(?:[\w$]+\.)*[\w$]*Exception\b").unwrap(),
        error_line: Regex::new(r"^\s*(?:[\w$]+\.)*[\w$]*Error:").unwrap(),
        inline_code: Regex::new(r"`+[^`\n]*`+").unwrap(),
        html_tag: Regex::new(r"</?[A-Za-z][A-Za-z0-9-]*(?:\s[^<>\n]*)?/?>").unwrap(),
        url: Regex::new(r"(?i)\b(?:https?|ftp)://\S+|\bwww\.\S+").unwrap(),
        underscored: Regex::new(r"(^|\s)_[^_\s][^_\n]*_($|[\s.,;:!?)])").unwrap(),
        mention: Regex::new(r"(^|[^\w.@/])@[A-Za-z0-9][A-Za-z0-9-]*").unwrap(),
        issue_ref: Regex::new(r"(^|[^\w&/#])#\d+\b").unwrap(),
    })
}

/// Compiled noise filter. Building one compiles the special-phrase regex,
/// so reuse it across documents.
#[derive(Debug, Clone)]
pub struct NoiseFilter {
    special_phrases: Option<Regex>,
}

impl NoiseFilter {
    pub fn new(lists: &WordLists) -> Self {
        let alternatives: Vec<String> = lists
            .special_phrases
            .iter()
            .map(|p| {
                p.split_whitespace()
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"\s+")
            })
            .filter(|p| !p.is_empty())
            .collect();
        let special_phrases = (!alternatives.is_empty())
            .then(|| Regex::new(&format!(r"(?i)\b(?:{})\b", alternatives.join("|"))).unwrap());
        Self { special_phrases }
    }

    /// Removes checklists, HTML tags and comments, URLs, fenced and inline
    /// code, mentions, issue references, stack-trace and error-message
    /// lines, the configured special phrases and `_underscore-wrapped_`
    /// phrases.
    ///
    /// Lines untouched by any rule are returned verbatim. A line emptied by
    /// a removal is dropped rather than left blank, so removals never split
    /// a paragraph in two.
    pub fn strip(&self, text: &str) -> String {
        let p = patterns();
        let marked;
        let text = if text.contains("<!--") {
            marked = p.html_comment.replace_all(text, MARK.to_string().as_str()).into_owned();
            marked.as_str()
        } else {
            text
        };

        let mut out: Vec<String> = Vec::new();
        let mut fence: Option<(char, usize)> = None;
        for line in text.split('\n') {
            if let Some(open) = fence {
                if closes_fence(line, open) {
                    fence = None;
                }
                continue;
            }
            if let Some(open) = opens_fence(line) {
                fence = Some(open);
                continue;
            }
            if p.checklist.is_match(line)
                || p.stack_frame.is_match(line)
                || p.exception_line.is_match(line)
                || p.error_line.is_match(line)
            {
                continue;
            }
            let cleaned = self.strip_inline(line);
            if cleaned == line && !line.contains(MARK) {
                out.push(line.to_string());
                continue;
            }
            let collapsed = cleaned
                .split(|c: char| c.is_whitespace() || c == MARK)
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            if !collapsed.is_empty() {
                out.push(collapsed);
            }
        }
        out.join("\n")
    }

    fn strip_inline(&self, line: &str) -> String {
        let p = patterns();
        let mut s = p.inline_code.replace_all(line, "").into_owned();
        s = p.html_tag.replace_all(&s, "").into_owned();
        s = p.url.replace_all(&s, "").into_owned();
        s = p.underscored.replace_all(&s, "$1$2").into_owned();
        s = p.mention.replace_all(&s, "$1").into_owned();
        s = p.issue_ref.replace_all(&s, "$1").into_owned();
        if let Some(re) = &self.special_phrases {
            s = re.replace_all(&s, "").into_owned();
        }
        s
    }
}

fn fence_marker(line: &str) -> Option<(char, usize, &str)> {
    let indent = line.len() - line.trim_start_matches(' ').len();
    if indent > 3 {
        return None;
    }
    let rest = &line[indent..];
    let ch = rest.chars().next()?;
    if ch != '`' && ch != '~' {
        return None;
    }
    let len = rest.chars().take_while(|&c| c == ch).count();
    (len >= 3).then(|| (ch, len, &rest[len..]))
}

fn opens_fence(line: &str) -> Option<(char, usize)> {
    let (ch, len, info) = fence_marker(line)?;
    if ch == '`' && info.contains('`') {
        return None;
    }
    Some((ch, len))
}

fn closes_fence(line: &str, (open_ch, open_len): (char, usize)) -> bool {
    matches!(fence_marker(line), Some((ch, len, rest)) if ch == open_ch && len >= open_len && rest.trim().is_empty())
}

/// Returns the `(fence char, length)` of a code-fence opener, shared with
/// section splitting so both agree on what is code.
pub(crate) fn fence_opener(line: &str) -> Option<(char, usize)> {
    opens_fence(line)
}

pub(crate) fn fence_closer(line: &str, open: (char, usize)) -> bool {
    closes_fence(line, open)
}
