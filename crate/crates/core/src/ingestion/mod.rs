//! Corpus acquisition: on-disk JSONL exports, an optional live client, and
//! the repository filters.

mod corpus;
mod filter;
pub mod remote;

pub use corpus::{
    load_corpus, parse_issue_line, parse_repo_line, parse_template_line, write_corpus, Corpus, FieldError,
    IngestError, RawIssue, RepoRecord, TemplateFile, TemplateFormat, ISSUES_FILE, REPOS_FILE, TEMPLATES_FILE,
};
pub use filter::{filter_repos, FilterStats, Filtered, DEFAULT_MIN_CONTRIBUTORS, DEFAULT_MIN_LABELED_ISSUES};
pub use remote::{fetch_remote, FetchConfig, FetchError, FetchSummary};
