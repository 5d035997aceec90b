use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Corpus;

pub const DEFAULT_MIN_LABELED_ISSUES: u64 = 30;
pub const DEFAULT_MIN_CONTRIBUTORS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub kept_repos: usize,
    pub dropped_repos: usize,
    pub kept_issues: usize,
    pub dropped_issues: usize,
    pub dropped_templates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtered {
    pub corpus: Corpus,
    pub stats: FilterStats,
}

/// Keeps repositories with strictly more than `min_labeled_issues` labeled
/// issues and at least `min_contributors` contributors, together with their
/// issues and templates.
pub fn filter_repos(corpus: &Corpus, min_labeled_issues: u64, min_contributors: u64) -> Filtered {
    let repos: Vec<_> = corpus
        .repos
        .iter()
        .filter(|r| r.labeled_issue_count > min_labeled_issues && r.contributors >= min_contributors)
        .cloned()
        .collect();
    let kept: HashSet<&str> = repos.iter().map(|r| r.repo_id.as_str()).collect();
    let issues: Vec<_> = corpus
        .issues
        .iter()
        .filter(|i| kept.contains(i.repo_id.as_str()))
        .cloned()
        .collect();
    let templates: Vec<_> = corpus
        .templates
        .iter()
        .filter(|t| kept.contains(t.repo_id.as_str()))
        .cloned()
        .collect();
    let stats = FilterStats {
        kept_repos: repos.len(),
        dropped_repos: corpus.repos.len() - repos.len(),
        kept_issues: issues.len(),
        dropped_issues: corpus.issues.len() - issues.len(),
        dropped_templates: corpus.templates.len() - templates.len(),
    };
    Filtered {
        corpus: Corpus {
            repos,
            issues,
            templates,
        },
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::{RawIssue, RepoRecord};

    fn corpus(specs: &[(&str, u64, u64)]) -> Corpus {
        let mut c = Corpus::default();
        for &(id, labeled, contributors) in specs {
            c.repos.push(RepoRecord {
                repo_id: id.into(),
                full_name: format!("org/{id}"),
                contributors,
                stars: 0,
                labeled_issue_count: 0,
                readme_text: None,
                about_text: None,
            });
            for n in 0..labeled {
                c.issues.push(RawIssue {
                    issue_id: format!("{id}#{n}"),
                    repo_id: id.into(),
                    title: "t".into(),
                    body: String::new(),
                    label_names: vec!["bug".into()],
                    created_at: "2023-01-01T00:00:00Z".into(),
                });
            }
            // One unlabeled issue that must not count.
            c.issues.push(RawIssue {
                issue_id: format!("{id}#u"),
                repo_id: id.into(),
                title: "t".into(),
                body: String::new(),
                label_names: vec![],
                created_at: "2023-01-01T00:00:00Z".into(),
            });
        }
        c.recount();
        c
    }

    #[test]
    fn boundary_cases() {
        let c = corpus(&[("a", 30, 2), ("b", 31, 1), ("c", 31, 2)]);
        let f = filter_repos(&c, 30, 2);
        let ids: Vec<_> = f.corpus.repos.iter().map(|r| r.repo_id.as_str()).collect();
        assert_eq!(ids, ["c"]);
        assert_eq!(f.stats.dropped_repos, 2);
        assert_eq!(f.stats.kept_issues, 32);
        assert_eq!(f.stats.dropped_issues, 31 + 32);
    }

    #[test]
    fn filtering_to_empty_is_legal() {
        let c = corpus(&[("a", 1, 1)]);
        let f = filter_repos(&c, 30, 2);
        assert!(f.corpus.repos.is_empty());
        assert!(f.corpus.issues.is_empty());
    }
}
