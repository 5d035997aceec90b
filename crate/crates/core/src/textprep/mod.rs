//! Text preprocessing for issue text, issue titles and reviews.
//!
//! The full pipeline is: noise stripping, `have to` fusion, tokenization,
//! lowercasing, removal of numbers and symbols, negative-modifier
//! unification, stopword removal and lemmatization. Reviews and repository
//! profiles skip the noise-stripping step ([`Preprocessor::tokens`]).

mod noise;
mod wordlists;

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::stem::Stemmer;
use crate::IntentSet;

pub use noise::NoiseFilter;
pub(crate) use noise::{fence_closer, fence_opener};
pub(crate) use wordlists::strip_apostrophes;
pub use wordlists::{WordListError, WordLists, NEGATIVE_MODIFIER_COUNT};

/// Token emitted for every negative modifier.
pub const NOT: &str = "not";
/// Fused form of "have to"; survives stopword removal.
pub const HAVE_TO: &str = "have-to";
/// Minimum token count for a document to enter a dataset.
pub const MIN_TOKENS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocSource {
    Review,
    IssueTitle,
    IssueBody,
}

/// The unit of training data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedDocument {
    pub doc_id: String,
    pub source: DocSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_id: Option<String>,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub intents: IntentSet,
}

struct TokenPatterns {
    have_to: Regex,
    token: Regex,
    identifier: Regex,
}

fn token_patterns() -> &'static TokenPatterns {
    static P: OnceLock<TokenPatterns> = OnceLock::new();
    P.get_or_init(|| TokenPatterns {
        have_to: Regex::new(r"(?i)\bhave\s+to\b").unwrap(),
        token: Regex::new(r"(?i)have-to|[a-z]+").unwrap(),
        identifier: Regex::new(concat!(
            r"\b[a-z]+[A-Z][A-Za-z0-9]*\b",          // camelCase
            r"|\b[A-Z][a-z0-9]+[A-Z][A-Za-z0-9]*\b", // PascalCase with an inner capital
            r"|\b[A-Za-z0-9]+_[A-Za-z0-9_]*[A-Za-z0-9]\b", // snake_case
            r"|\b[A-Za-z_]\w+\.[A-Za-z_]\w+",       // dotted path
            r"|\b\w+\(\)",                           // call syntax
        ))
        .unwrap(),
    })
}

/// Preprocessing pipeline bound to one set of word lists.
#[derive(Debug)]
pub struct Preprocessor {
    lists: WordLists,
    stemmer: Stemmer,
    noise: NoiseFilter,
    lemma_values: HashSet<String>,
}

impl Preprocessor {
    pub fn new(lists: WordLists) -> Self {
        Self {
            stemmer: lists.stemmer(),
            noise: NoiseFilter::new(&lists),
            lemma_values: lists.lemmas.values().cloned().collect(),
            lists,
        }
    }

    pub fn bundled() -> Self {
        Self::new(WordLists::bundled())
    }

    pub fn lists(&self) -> &WordLists {
        &self.lists
    }

    pub fn stemmer(&self) -> &Stemmer {
        &self.stemmer
    }

    pub fn strip_noise(&self, text: &str) -> String {
        self.noise.strip(text)
    }

    /// Full pipeline, used for extracted issue text and issue titles.
    pub fn preprocess(&self, text: &str) -> Vec<String> {
        self.tokens(&self.noise.strip(text))
    }

    /// Pipeline without noise stripping, used for reviews and profiles.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let p = token_patterns();
        let fused = p.have_to.replace_all(text, HAVE_TO);
        let cleaned = strip_apostrophes(&fused);
        let mut out = Vec::new();
        for m in p.token.find_iter(&cleaned) {
            let token = m.as_str().to_ascii_lowercase();
            if self.lists.is_negative(&token) {
                out.push(NOT.to_string());
                continue;
            }
            if self.lists.is_removable_stopword(&token) {
                continue;
            }
            let lemma = self.lemmatize(&token);
            // A lemma that lands on a stopword or negative is dropped so
            // that the output is stable under re-processing.
            if self.lists.is_negative(&lemma) || self.lists.is_removable_stopword(&lemma) {
                continue;
            }
            out.push(lemma);
        }
        out
    }

    /// Dictionary lemma, falling back to the stemmer for unknown words.
    /// Iterated to a fixed point.
    pub fn lemmatize(&self, token: &str) -> String {
        if token == HAVE_TO {
            return token.to_string();
        }
        let mut current = token.to_string();
        for _ in 0..8 {
            let next = match self.lists.lemmas.get(&current) {
                Some(lemma) => lemma.clone(),
                None if self.is_lemma(&current) => current.clone(),
                None => self.stemmer.stem(&current),
            };
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    fn is_lemma(&self, word: &str) -> bool {
        self.lemma_values.contains(word)
    }
}

fn shared() -> &'static Preprocessor {
    static SHARED: OnceLock<Preprocessor> = OnceLock::new();
    SHARED.get_or_init(Preprocessor::bundled)
}

/// Strips noise with the given word lists.
pub fn strip_noise(text: &str, lists: &WordLists) -> String {
    if *lists == shared().lists {
        shared().strip_noise(text)
    } else {
        NoiseFilter::new(lists).strip(text)
    }
}

/// Runs the full pipeline with the given word lists.
pub fn preprocess(text: &str, lists: &WordLists) -> Vec<String> {
    if *lists == shared().lists {
        shared().preprocess(text)
    } else {
        Preprocessor::new(lists.clone()).preprocess(text)
    }
}

/// True when `raw` contains an identifier-like token: camelCase,
/// snake_case, a dotted path or call syntax.
pub fn has_identifier(raw: &str) -> bool {
    token_patterns().identifier.is_match(raw)
}

/// Admission rule for datasets: at least three tokens, and issue titles
/// must not mention identifiers.
pub fn admit(tokens: &[String], source: DocSource, title_raw: Option<&str>) -> bool {
    if tokens.len() < MIN_TOKENS {
        return false;
    }
    !(source == DocSource::IssueTitle && title_raw.is_some_and(has_identifier))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(text: &str) -> Vec<String> {
        Preprocessor::bundled().preprocess(text)
    }

    #[test]
    fn negated_contraction_becomes_not() {
        assert_eq!(pp("doesn't work"), ["not", "work"]);
        assert_eq!(pp("I can't login"), ["not", "login"]);
    }

    #[test]
    fn have_to_is_fused() {
        assert_eq!(pp("You have to restart"), ["have-to", "restart"]);
        assert_eq!(pp("you HAVE\nto restart"), ["have-to", "restart"]);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(pp("").is_empty());
    }

    #[test]
    fn drops_numbers_symbols_and_stopwords() {
        assert_eq!(pp("The app crashed 3 times!!! $$"), ["app", "crash", "time"]);
    }

    #[test]
    fn keeps_modal_verbs() {
        assert_eq!(pp("It would be nice if we could export"), ["would", "nice", "could", "export"]);
    }

    #[test]
    fn lemma_table_then_stemmer() {
        let p = Preprocessor::bundled();
        assert_eq!(p.lemmatize("crashes"), "crash");
        assert_eq!(p.lemmatize("went"), "go");
        assert_eq!(p.lemmatize("notification"), "notification");
        assert_eq!(p.lemmatize("connectivity"), "connect");
    }

    #[test]
    fn admission_rule() {
        let t = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(!admit(&t(&["app", "crash"]), DocSource::Review, None));
        assert!(admit(&t(&["app", "crash", "rotate"]), DocSource::IssueTitle, Some("App crash on rotate")));
        assert!(!admit(
            &t(&["nullpointerexcept", "oncreat", "crash"]),
            DocSource::IssueTitle,
            Some("NullPointerException in onCreate()")
        ));
        // Identifier rule applies to titles only.
        assert!(admit(&t(&["app", "crash", "rotate"]), DocSource::IssueBody, Some("onCreate")));
    }

    #[test]
    fn identifier_detection() {
        assert!(has_identifier("crash in onCreate"));
        assert!(has_identifier("MainActivity leaks"));
        assert!(has_identifier("max_cache_size ignored"));
        assert!(has_identifier("org.example.Player fails"));
        assert!(!has_identifier("App crashes when rotating"));
        assert!(!has_identifier("Add dark mode, e.g. for OLED"));
    }

    #[test]
    fn title_source_serializes_snake_case() {
        assert_eq!(serde_json::to_string(&DocSource::IssueTitle).unwrap(), "\"issue_title\"");
    }
}
