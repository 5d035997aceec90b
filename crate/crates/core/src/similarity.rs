//! Repository profiles and tf-idf cosine ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::extraction::{split_with, TitleNormalizer};
use crate::ingestion::RepoRecord;
use crate::textprep::Preprocessor;

/// ReadMe section titles that describe what a project does.
pub const PROFILE_SECTION_TITLES: [&str; 9] = [
    "introduction",
    "description",
    "features",
    "what it does",
    "about",
    "about the project",
    "overview",
    "summary",
    "todo",
];

pub const DEFAULT_TOP_K: usize = 3;

pub type SparseVector = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("repository {0} has no usable profile text")]
pub struct EmptyProfile(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoProfile {
    pub repo_id: String,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub vector: SparseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRanking {
    pub query_repo: String,
    pub ranked: Vec<(String, f64)>,
}

impl SimilarityRanking {
    pub fn top(&self, k: usize) -> impl Iterator<Item = &str> {
        self.ranked.iter().take(k).map(|(id, _)| id.as_str())
    }
}

/// Tokens of About text, the ReadMe text before its first heading and the
/// ReadMe sections titled like [`PROFILE_SECTION_TITLES`].
pub fn build_profile(
    repo: &RepoRecord,
    prep: &Preprocessor,
    titles: &TitleNormalizer,
) -> Result<RepoProfile, EmptyProfile> {
    let wanted: BTreeSet<String> = PROFILE_SECTION_TITLES.iter().map(|t| titles.normalize(t)).collect();
    let mut parts: Vec<String> = Vec::new();
    if let Some(about) = &repo.about_text {
        parts.push(about.clone());
    }
    if let Some(readme) = &repo.readme_text {
        let (preamble, sections) = split_with(readme, titles);
        parts.push(preamble);
        parts.extend(
            sections
                .into_iter()
                .filter(|s| wanted.contains(&s.normalized_title))
                .map(|s| s.content),
        );
    }
    let tokens = prep.tokens(&parts.join("\n"));
    if tokens.is_empty() {
        return Err(EmptyProfile(repo.repo_id.clone()));
    }
    Ok(RepoProfile {
        repo_id: repo.repo_id.clone(),
        tokens,
        vector: SparseVector::new(),
    })
}

/// tf = count / length, idf = ln(N / df) + 1.
pub fn tfidf(docs: &[Vec<String>]) -> Vec<SparseVector> {
    let n = docs.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let uniq: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in uniq {
            *df.entry(t).or_default() += 1;
        }
    }
    docs.iter()
        .map(|doc| {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for t in doc {
                *counts.entry(t.as_str()).or_default() += 1;
            }
            let len = doc.len() as f64;
            counts
                .into_iter()
                .map(|(t, c)| {
                    let idf = (n / df[t] as f64).ln() + 1.0;
                    (t.to_string(), c as f64 / len * idf)
                })
                .collect()
        })
        .collect()
}

pub fn norm(v: &SparseVector) -> f64 {
    v.values().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity clamped to [0, 1]; 0 when either vector is zero.
pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let dot: f64 = small.iter().filter_map(|(t, x)| large.get(t).map(|y| x * y)).sum();
    let denom = norm(u) * norm(v);
    if denom == 0.0 {
        return 0.0;
    }
    (dot / denom).clamp(0.0, 1.0)
}

/// Fills in the tf-idf vector of every profile, with the profile set as
/// the document collection.
pub fn vectorize(profiles: &mut [RepoProfile]) {
    let docs: Vec<Vec<String>> = profiles.iter().map(|p| p.tokens.clone()).collect();
    for (p, v) in profiles.iter_mut().zip(tfidf(&docs)) {
        p.vector = v;
    }
}

/// Ranks every other non-empty profile by cosine similarity to `query`,
/// descending, ties by repo id.
pub fn rank_similar(query: &str, profiles: &[RepoProfile]) -> Result<SimilarityRanking, EmptyProfile> {
    let q = profiles
        .iter()
        .find(|p| p.repo_id == query && norm(&p.vector) > 0.0)
        .ok_or_else(|| EmptyProfile(query.to_string()))?;
    let mut ranked: Vec<(String, f64)> = profiles
        .iter()
        .filter(|p| p.repo_id != query && norm(&p.vector) > 0.0)
        .map(|p| (p.repo_id.clone(), cosine(&q.vector, &p.vector)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    Ok(SimilarityRanking {
        query_repo: query.to_string(),
        ranked,
    })
}

/// Builds and vectorizes profiles for all repositories, skipping those
/// without usable text.
pub fn build_profiles(
    repos: &[RepoRecord],
    prep: &Preprocessor,
    titles: &TitleNormalizer,
) -> (Vec<RepoProfile>, Vec<EmptyProfile>) {
    let mut profiles = Vec::new();
    let mut empty = Vec::new();
    for repo in repos {
        match build_profile(repo, prep, titles) {
            Ok(p) => profiles.push(p),
            Err(e) => empty.push(e),
        }
    }
    vectorize(&mut profiles);
    (profiles, empty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn repo(readme: Option<&str>, about: Option<&str>) -> RepoRecord {
        RepoRecord {
            repo_id: "o/r".into(),
            full_name: "o/r".into(),
            contributors: 2,
            stars: 0,
            labeled_issue_count: 0,
            readme_text: readme.map(str::to_string),
            about_text: about.map(str::to_string),
        }
    }

    fn profile_of(r: &RepoRecord) -> Result<RepoProfile, EmptyProfile> {
        build_profile(r, &Preprocessor::bundled(), &TitleNormalizer::bundled())
    }

    #[test]
    fn single_document_weights_are_tf() {
        let v = tfidf(&[toks("a b b c")]);
        assert_eq!(v[0]["a"], 0.25);
        assert_eq!(v[0]["b"], 0.5);
    }

    #[test]
    fn identical_documents_identical_vectors() {
        let v = tfidf(&[toks("x y"), toks("x y")]);
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn three_document_hand_computed() {
        let v = tfidf(&[toks("a b"), toks("a c"), toks("c c d")]);
        let idf_a = (3.0f64 / 2.0).ln() + 1.0;
        let idf_b = 3.0f64.ln() + 1.0;
        assert!((v[0]["a"] - 0.5 * idf_a).abs() < 1e-12);
        assert!((v[0]["b"] - 0.5 * idf_b).abs() < 1e-12);
        assert!((v[2]["c"] - 2.0 / 3.0 * idf_a).abs() < 1e-12);
    }

    #[test]
    fn cosine_extremes() {
        let v = tfidf(&[toks("a b"), toks("a b"), toks("c d")]);
        assert!((cosine(&v[0], &v[1]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&v[0], &v[2]), 0.0);
    }

    #[test]
    fn features_section_and_preamble_form_the_profile() {
        let p = profile_of(&repo(Some("Music player\n## Install\ngradle build\n## Features\nplaylists\n## License\nMIT"), None)).unwrap();
        assert!(p.tokens.contains(&"music".to_string()));
        assert!(p.tokens.contains(&"playlist".to_string()));
        assert!(!p.tokens.iter().any(|t| t == "gradl" || t == "gradle" || t == "mit"));
    }

    #[test]
    fn empty_profile() {
        assert!(profile_of(&repo(Some(""), Some(""))).is_err());
        assert!(profile_of(&repo(None, None)).is_err());
    }

    #[test]
    fn ranking_excludes_query_and_empty() {
        let mut profiles: Vec<RepoProfile> = [("a", "x y"), ("b", "x y"), ("c", "z"), ("d", "")]
            .iter()
            .map(|(id, t)| RepoProfile {
                repo_id: id.to_string(),
                tokens: toks(t),
                vector: SparseVector::new(),
            })
            .collect();
        vectorize(&mut profiles);
        let r = rank_similar("a", &profiles).unwrap();
        let ids: Vec<_> = r.ranked.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["b", "c"]);
        assert!(rank_similar("d", &profiles).is_err());
    }

    fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(prop::collection::vec("[a-e]", 1..8), 2..6)
    }

    proptest! {
        #[test]
        fn cosine_self_is_one_and_symmetric(docs in corpus()) {
            let v = tfidf(&docs);
            for a in &v {
                prop_assert!((cosine(a, a) - 1.0).abs() < 1e-12);
                for b in &v {
                    prop_assert_eq!(cosine(a, b), cosine(b, a));
                }
            }
        }

        #[test]
        fn scaling_counts_keeps_cosine(docs in corpus(), k in 2usize..4) {
            let mut scaled = docs.clone();
            scaled[0] = docs[0].iter().flat_map(|t| std::iter::repeat_n(t.clone(), k)).collect();
            let v = tfidf(&docs);
            let w = tfidf(&scaled);
            for j in 1..docs.len() {
                prop_assert!((cosine(&v[0], &v[j]) - cosine(&w[0], &w[j])).abs() < 1e-12);
            }
        }
    }
}
