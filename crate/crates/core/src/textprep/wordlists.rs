use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::stem::Stemmer;

/// Number of negative modifiers in the bundled list.
pub const NEGATIVE_MODIFIER_COUNT: usize = 44;

const NEGATIVE_MODIFIERS: &str = include_str!("../../data/negative_modifiers.txt");
const SPECIAL_PHRASES: &str = include_str!("../../data/special_phrases.txt");
const STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const RETAINED_WORDS: &str = include_str!("../../data/retained_words.txt");
const LEMMAS: &str = include_str!("../../data/lemmas.tsv");
const STEM_OVERRIDES: &str = include_str!("../../data/stem_overrides.tsv");

#[derive(Debug, thiserror::Error)]
pub enum WordListError {
    #[error("cannot read word list {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{file}:{line}: expected `form<TAB>replacement`")]
    Malformed { file: String, line: usize },
    #[error("negative modifier list has {0} entries, expected {NEGATIVE_MODIFIER_COUNT}")]
    NegativeCount(usize),
    #[error("lemma `{lemma}` (for `{form}`) is itself mapped to `{other}`")]
    LemmaNotFixedPoint {
        form: String,
        lemma: String,
        other: String,
    },
}

/// Word lists that drive preprocessing. Each list is a plain-text file so
/// it can be edited without touching code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLists {
    pub negative_modifiers: BTreeSet<String>,
    pub special_phrases: Vec<String>,
    /// Stored without apostrophes (`don't` becomes `dont`), matching the
    /// tokenizer, which deletes apostrophes before splitting.
    pub stopwords: BTreeSet<String>,
    pub retained_words: BTreeSet<String>,
    /// Inflected form to lemma.
    pub lemmas: BTreeMap<String, String>,
    /// Post-stemming corrections, e.g. `reproduct -> reproduc`.
    pub stem_overrides: BTreeMap<String, String>,
}

impl WordLists {
    pub fn bundled() -> Self {
        Self::from_sources(
            NEGATIVE_MODIFIERS,
            SPECIAL_PHRASES,
            STOPWORDS,
            RETAINED_WORDS,
            LEMMAS,
            STEM_OVERRIDES,
        )
        .expect("bundled word lists are valid")
    }

    /// Loads a word-list directory. `lemmas.tsv` and `stem_overrides.tsv`
    /// are optional; the other four files are required.
    pub fn from_dir(dir: &Path) -> Result<Self, WordListError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| WordListError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let read_optional = |name: &str| {
            let path = dir.join(name);
            if path.exists() {
                read(name)
            } else {
                Ok(String::new())
            }
        };
        Self::from_sources(
            &read("negative_modifiers.txt")?,
            &read("special_phrases.txt")?,
            &read("stopwords.txt")?,
            &read("retained_words.txt")?,
            &read_optional("lemmas.tsv")?,
            &read_optional("stem_overrides.tsv")?,
        )
    }

    pub fn from_sources(
        negative_modifiers: &str,
        special_phrases: &str,
        stopwords: &str,
        retained_words: &str,
        lemmas: &str,
        stem_overrides: &str,
    ) -> Result<Self, WordListError> {
        let negative_modifiers: BTreeSet<String> = lines(negative_modifiers)
            .map(|w| w.to_lowercase())
            .collect();
        if negative_modifiers.len() != NEGATIVE_MODIFIER_COUNT {
            return Err(WordListError::NegativeCount(negative_modifiers.len()));
        }
        let lemmas = pairs(lemmas, "lemmas.tsv")?;
        for (form, lemma) in &lemmas {
            if let Some(other) = lemmas.get(lemma) {
                if other != lemma {
                    return Err(WordListError::LemmaNotFixedPoint {
                        form: form.clone(),
                        lemma: lemma.clone(),
                        other: other.clone(),
                    });
                }
            }
        }
        Ok(Self {
            negative_modifiers,
            special_phrases: lines(special_phrases).map(|p| p.to_lowercase()).collect(),
            stopwords: lines(stopwords).map(|w| strip_apostrophes(&w.to_lowercase())).collect(),
            retained_words: lines(retained_words).map(|w| w.to_lowercase()).collect(),
            lemmas,
            stem_overrides: pairs(stem_overrides, "stem_overrides.tsv")?,
        })
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative_modifiers.contains(word)
    }

    /// True for stopwords that preprocessing deletes: everything in the
    /// stopword list except negative modifiers and the retained modals.
    pub fn is_removable_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word) && !self.is_negative(word) && !self.retained_words.contains(word)
    }

    pub fn stemmer(&self) -> Stemmer {
        Stemmer::new(
            self.stem_overrides
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect::<HashMap<_, _>>(),
        )
    }
}

pub(crate) fn strip_apostrophes(word: &str) -> String {
    word.chars().filter(|c| !matches!(c, '\'' | '\u{2019}' | '\u{2018}')).collect()
}

fn lines(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
}

fn pairs(text: &str, file: &str) -> Result<BTreeMap<String, String>, WordListError> {
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (form, target) = line.split_once('\t').ok_or(WordListError::Malformed {
            file: file.to_string(),
            line: idx + 1,
        })?;
        out.insert(form.trim().to_lowercase(), target.trim().to_lowercase());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lists_have_expected_sizes() {
        let lists = WordLists::bundled();
        assert_eq!(lists.negative_modifiers.len(), 44);
        // "its" and "it's" coincide once apostrophes are stripped
        assert_eq!(lists.stopwords.len(), 178);
        assert_eq!(lists.special_phrases.len(), 6);
        assert!(lists.retained_words.contains("should"));
    }

    #[test]
    fn negatives_and_modals_are_not_removable() {
        let lists = WordLists::bundled();
        assert!(!lists.is_removable_stopword("not"));
        assert!(!lists.is_removable_stopword("dont"));
        assert!(!lists.is_removable_stopword("should"));
        assert!(lists.is_removable_stopword("the"));
        assert!(lists.is_removable_stopword("youre"));
    }

    #[test]
    fn rejects_wrong_modifier_count() {
        let err = WordLists::from_sources("no\nnot\n", "", "", "", "", "").unwrap_err();
        assert!(matches!(err, WordListError::NegativeCount(2)));
    }

    #[test]
    fn rejects_chained_lemmas() {
        let negatives = WordLists::bundled()
            .negative_modifiers
            .into_iter()
            .collect::<Vec<_>>()
            .join("\n");
        let err = WordLists::from_sources(&negatives, "", "", "", "ran\trun\nrun\tgo\n", "").unwrap_err();
        assert!(matches!(err, WordListError::LemmaNotFixedPoint { .. }));
    }
}
