use std::fs;
use std::path::Path;

use fancy_regex::Regex;

use crate::IntentClass;

pub const PATTERN_COUNT: usize = 19;

const BUNDLED_PATTERNS: &str = include_str!("../../data/patterns.tsv");

#[derive(Debug, Clone)]
pub struct Pattern {
    pub name: String,
    pub source: String,
    /// Intents the pattern is typically seen with. Informational only.
    pub intents: Vec<IntentClass>,
    regex: Regex,
}

impl Pattern {
    pub fn is_match(&self, normalized_title: &str) -> bool {
        self.regex.is_match(normalized_title).unwrap_or(false)
    }
}

/// The ordered linguistic patterns P1..P19 over normalized section titles.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
}

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("cannot read pattern file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("pattern line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("pattern {name}: {source}")]
    Regex { name: String, source: Box<fancy_regex::Error> },
    #[error("expected patterns P1..P{PATTERN_COUNT} in order, found {found:?}")]
    WrongNames { found: Vec<String> },
}

impl PatternSet {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_PATTERNS).expect("bundled patterns are valid")
    }

    pub fn load(path: &Path) -> Result<Self, PatternError> {
        let text = fs::read_to_string(path).map_err(|source| PatternError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `name<TAB>regex<TAB>flags` lines. Each regex is anchored at
    /// the start of the title.
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let mut patterns = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(name), Some(source)) = (cols.next(), cols.next()) else {
                return Err(PatternError::Malformed {
                    line: line_no,
                    reason: "expected `name<TAB>regex<TAB>flags`".into(),
                });
            };
            let flags = cols.next().unwrap_or("");
            let mut intents = Vec::new();
            for f in flags.trim().chars() {
                intents.push(match f {
                    'B' => IntentClass::BugReport,
                    'F' => IntentClass::FeatureRequest,
                    'O' => IntentClass::Other,
                    other => {
                        return Err(PatternError::Malformed {
                            line: line_no,
                            reason: format!("unknown intent flag `{other}`"),
                        })
                    }
                });
            }
            let regex = Regex::new(&format!("^(?:{source})")).map_err(|e| PatternError::Regex {
                name: name.to_string(),
                source: Box::new(e),
            })?;
            patterns.push(Pattern {
                name: name.trim().to_string(),
                source: source.to_string(),
                intents,
                regex,
            });
        }
        let expected: Vec<String> = (1..=PATTERN_COUNT).map(|i| format!("P{i}")).collect();
        let found: Vec<String> = patterns.iter().map(|p| p.name.clone()).collect();
        if found != expected {
            return Err(PatternError::WrongNames { found });
        }
        Ok(Self { patterns })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    /// Name of the first pattern matching the title.
    pub fn first_match(&self, normalized_title: &str) -> Option<&str> {
        self.patterns
            .iter()
            .find(|p| p.is_match(normalized_title))
            .map(|p| p.name.as_str())
    }
}
