use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

/// Sparse row: (feature index, value), sorted by index.
pub type SparseRow = Vec<(usize, f64)>;

/// tf-idf feature space fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSpace {
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub bigrams: bool,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

fn terms(tokens: &[String], bigrams: bool) -> Vec<String> {
    let mut out = tokens.to_vec();
    if bigrams {
        out.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    out
}

impl FeatureSpace {
    /// idf = ln(N / df) + 1 over the given documents.
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a [String]>, bigrams: bool) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n = 0usize;
        for doc in docs {
            n += 1;
            let uniq: BTreeSet<String> = terms(doc, bigrams).into_iter().collect();
            for t in uniq {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut vocabulary = Vec::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (term, count) in df {
            idf.push((n as f64 / count as f64).ln() + 1.0);
            vocabulary.push(term);
        }
        let index = vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            vocabulary,
            idf,
            bigrams,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    /// L2-normalized tf-idf row. Unknown terms are ignored.
    pub fn transform(&self, tokens: &[String]) -> SparseRow {
        let all = terms(tokens, self.bigrams);
        let len = all.len().max(1) as f64;
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &all {
            if let Some(&i) = self.index.get(t) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let mut row: SparseRow = counts
            .into_iter()
            .map(|(i, c)| (i, c as f64 / len * self.idf[i]))
            .collect();
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut row {
                *v /= norm;
            }
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn vocabulary_is_sorted_and_rows_unit_length() {
        let docs = [t("b a a"), t("c a")];
        let fs = FeatureSpace::fit(docs.iter().map(|d| d.as_slice()), false);
        assert_eq!(fs.vocabulary, ["a", "b", "c"]);
        let row = fs.transform(&docs[0]);
        let norm: f64 = row.iter().map(|(_, v)| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(fs.transform(&t("zzz")).is_empty());
    }

    #[test]
    fn bigrams_extend_vocabulary() {
        let docs = [t("not work")];
        let fs = FeatureSpace::fit(docs.iter().map(|d| d.as_slice()), true);
        assert_eq!(fs.vocabulary, ["not", "not work", "work"]);
    }
}
