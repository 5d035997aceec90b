//! Porter2 (Snowball English) stemming with a small override table.

use std::collections::HashMap;
use std::fmt;

use rust_stemmers::{Algorithm, Stemmer as SnowballStemmer};

const MAX_PASSES: usize = 8;

/// Stemmer shared by label normalization, title normalization and the
/// lemmatizer fallback.
///
/// Output is a fixed point: `stem(stem(w)) == stem(w)`. Plain Porter2 is not
/// idempotent (`agreed -> agre -> agr`), so stemming is repeated until the
/// word stops changing. Overrides are applied after every pass.
pub struct Stemmer {
    inner: SnowballStemmer,
    overrides: HashMap<String, String>,
}

impl Stemmer {
    pub fn new(overrides: HashMap<String, String>) -> Self {
        Self {
            inner: SnowballStemmer::create(Algorithm::English),
            overrides,
        }
    }

    pub fn plain() -> Self {
        Self::new(HashMap::new())
    }

    pub fn stem(&self, word: &str) -> String {
        let mut current = word.to_string();
        for _ in 0..MAX_PASSES {
            let next = self.stem_once(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    fn stem_once(&self, word: &str) -> String {
        let stemmed = self.inner.stem(word);
        match self.overrides.get(stemmed.as_ref()) {
            Some(replacement) => replacement.clone(),
            None => stemmed.into_owned(),
        }
    }
}

impl fmt::Debug for Stemmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stemmer")
            .field("algorithm", &"porter2")
            .field("overrides", &self.overrides)
            .finish()
    }
}
