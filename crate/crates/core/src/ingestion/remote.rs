//! Optional live client for the GitHub REST API.
//!
//! Whatever the client fetches is materialized in the same on-disk schema
//! that [`load_corpus`](super::load_corpus) reads, so every later stage
//! runs offline.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::Value;
use tracing::{info, warn};

use super::{write_corpus, Corpus, IngestError, RawIssue, RepoRecord, TemplateFile, TemplateFormat};

pub const DEFAULT_BASE_URL: &str = "https://api.github.com";
const TEMPLATE_DIR: &str = ".github/ISSUE_TEMPLATE";

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub base_url: String,
    pub token: Option<String>,
    pub requests_per_hour: u32,
    pub parallel: usize,
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub per_page: u32,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self {
            base_url: DEFAULT_BASE_URL.to_string(),
            token: None,
            requests_per_hour: 5000,
            parallel: 4,
            max_retries: 5,
            initial_backoff: Duration::from_secs(2),
            per_page: 100,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("authentication failed ({0})")]
    AuthFailure(String),
    #[error("rate limited on {url} after {retries} retries")]
    RateLimited { url: String, retries: u32 },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("request to {url} failed: {reason}")]
    Http { url: String, reason: String },
    #[error("unexpected response from {url}: {reason}")]
    Decode { url: String, reason: String },
    #[error(transparent)]
    Write(#[from] IngestError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct FetchSummary {
    pub repos: usize,
    pub issues: usize,
    pub templates: usize,
    pub skipped_pull_requests: usize,
    /// Repositories that returned 404 and were skipped.
    pub not_found: Vec<String>,
}

/// Spaces requests evenly to stay under the hourly budget.
struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(requests_per_hour: u32) -> Self {
        let per_hour = requests_per_hour.max(1) as f64;
        Self {
            interval: Duration::from_secs_f64(3600.0 / per_hour),
            next: Mutex::new(Instant::now()),
        }
    }

    fn acquire(&self) {
        let wait = {
            let mut next = self.next.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            slot.saturating_duration_since(now)
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

struct Page {
    body: String,
    next: Option<String>,
}

struct Client<'a> {
    cfg: &'a FetchConfig,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

impl<'a> Client<'a> {
    fn new(cfg: &'a FetchConfig) -> Self {
        Self {
            cfg,
            agent: ureq::AgentBuilder::new().timeout(Duration::from_secs(60)).build(),
            limiter: RateLimiter::new(cfg.requests_per_hour),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.cfg.base_url.trim_end_matches('/'), path)
    }

    /// GET with retry. `Ok(None)` means 404.
    fn get(&self, url: &str, accept: &str) -> Result<Option<Page>, FetchError> {
        let mut backoff = self.cfg.initial_backoff;
        let mut attempt = 0;
        loop {
            self.limiter.acquire();
            let mut req = self
                .agent
                .get(url)
                .set("Accept", accept)
                .set("User-Agent", "issueforge")
                .set("X-GitHub-Api-Version", "2022-11-28");
            if let Some(token) = &self.cfg.token {
                req = req.set("Authorization", &format!("Bearer {token}"));
            }
            let retry_after = match req.call() {
                Ok(resp) => {
                    let next = resp.header("link").and_then(parse_next_link);
                    let body = resp.into_string().map_err(|e| FetchError::Decode {
                        url: url.to_string(),
                        reason: e.to_string(),
                    })?;
                    return Ok(Some(Page { body, next }));
                }
                Err(ureq::Error::Status(404, _)) => return Ok(None),
                Err(ureq::Error::Status(401, _)) => return Err(FetchError::AuthFailure(url.to_string())),
                Err(ureq::Error::Status(code, resp)) if is_rate_limited(code, &resp) => retry_hint(&resp),
                Err(ureq::Error::Status(code, _)) if code >= 500 => None,
                Err(ureq::Error::Status(403, _)) => return Err(FetchError::AuthFailure(url.to_string())),
                Err(ureq::Error::Status(code, _)) => {
                    return Err(FetchError::Http {
                        url: url.to_string(),
                        reason: format!("status {code}"),
                    })
                }
                Err(ureq::Error::Transport(t)) => {
                    warn!(url, error = %t, "transport error");
                    None
                }
            };
            if attempt >= self.cfg.max_retries {
                return Err(FetchError::RateLimited {
                    url: url.to_string(),
                    retries: attempt,
                });
            }
            let wait = retry_after.map_or(backoff, |hint| hint.max(backoff));
            warn!(url, attempt, wait_ms = wait.as_millis() as u64, "backing off");
            thread::sleep(wait);
            backoff = backoff.saturating_mul(2);
            attempt += 1;
        }
    }

    fn get_json(&self, path: &str) -> Result<Option<Value>, FetchError> {
        let url = self.url(path);
        match self.get(&url, "application/vnd.github+json")? {
            None => Ok(None),
            Some(page) => serde_json::from_str(&page.body).map(Some).map_err(|e| FetchError::Decode {
                url,
                reason: e.to_string(),
            }),
        }
    }

    fn get_raw(&self, path: &str) -> Result<Option<String>, FetchError> {
        Ok(self.get(&self.url(path), "application/vnd.github.raw")?.map(|p| p.body))
    }

    /// Follows `Link: rel="next"` until exhaustion.
    fn get_all(&self, path: &str) -> Result<Option<Vec<Value>>, FetchError> {
        let mut url = self.url(path);
        let mut items = Vec::new();
        loop {
            let Some(page) = self.get(&url, "application/vnd.github+json")? else {
                return Ok(if items.is_empty() { None } else { Some(items) });
            };
            if !page.body.trim().is_empty() {
                let value: Value = serde_json::from_str(&page.body).map_err(|e| FetchError::Decode {
                    url: url.clone(),
                    reason: e.to_string(),
                })?;
                match value {
                    Value::Array(batch) => items.extend(batch),
                    _ => {
                        return Err(FetchError::Decode {
                            url,
                            reason: "expected a JSON array".into(),
                        })
                    }
                }
            }
            match page.next {
                Some(next) => url = next,
                None => return Ok(Some(items)),
            }
        }
    }
}

fn is_rate_limited(code: u16, resp: &ureq::Response) -> bool {
    code == 429 || (code == 403 && (resp.header("x-ratelimit-remaining") == Some("0") || resp.header("retry-after").is_some()))
}

fn retry_hint(resp: &ureq::Response) -> Option<Duration> {
    if let Some(secs) = resp.header("retry-after").and_then(|v| v.trim().parse::<u64>().ok()) {
        return Some(Duration::from_secs(secs));
    }
    let reset = resp.header("x-ratelimit-reset")?.trim().parse::<u64>().ok()?;
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok()?.as_secs();
    // Cap so a bogus reset header cannot stall the run for hours.
    Some(Duration::from_secs(reset.saturating_sub(now).min(900)))
}

/// Extracts the `rel="next"` target from a `Link` header.
pub fn parse_next_link(header: &str) -> Option<String> {
    header.split(',').find_map(|part| {
        let mut pieces = part.split(';');
        let target = pieces.next()?.trim();
        let is_next = pieces.any(|p| {
            let p = p.trim();
            p == "rel=\"next\"" || p == "rel=next"
        });
        (is_next && target.starts_with('<') && target.ends_with('>'))
            .then(|| target[1..target.len() - 1].to_string())
    })
}

type RepoOutcome = Result<Option<RepoData>, FetchError>;

struct RepoData {
    repo: RepoRecord,
    issues: Vec<RawIssue>,
    templates: Vec<TemplateFile>,
    skipped_pull_requests: usize,
}

fn str_field(v: &Value, key: &str) -> Option<String> {
    v.get(key).and_then(Value::as_str).map(str::to_string)
}

fn fetch_repo(client: &Client<'_>, full_name: &str) -> Result<Option<RepoData>, FetchError> {
    let per_page = client.cfg.per_page;
    let Some(meta) = client.get_json(&format!("/repos/{full_name}"))? else {
        return Ok(None);
    };
    let repo_id = str_field(&meta, "full_name").unwrap_or_else(|| full_name.to_string());
    let contributors = client
        .get_all(&format!("/repos/{full_name}/contributors?per_page={per_page}&anon=true"))?
        .map_or(0, |c| c.len() as u64);
    let readme_text = client.get_raw(&format!("/repos/{full_name}/readme"))?;

    let mut issues = Vec::new();
    let mut skipped_pull_requests = 0;
    for item in client
        .get_all(&format!("/repos/{full_name}/issues?state=all&per_page={per_page}"))?
        .unwrap_or_default()
    {
        if item.get("pull_request").is_some() {
            skipped_pull_requests += 1;
            continue;
        }
        let number = item.get("number").and_then(Value::as_u64).unwrap_or_default();
        let labels = item
            .get("labels")
            .and_then(Value::as_array)
            .map(|ls| {
                ls.iter()
                    .filter_map(|l| l.get("name").and_then(Value::as_str).or_else(|| l.as_str()))
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        issues.push(RawIssue {
            issue_id: format!("{repo_id}#{number}"),
            repo_id: repo_id.clone(),
            title: str_field(&item, "title").unwrap_or_default(),
            body: str_field(&item, "body").unwrap_or_default(),
            label_names: labels,
            created_at: str_field(&item, "created_at").unwrap_or_default(),
        });
    }

    let mut templates = Vec::new();
    if let Some(Value::Array(entries)) = client.get_json(&format!("/repos/{full_name}/contents/{TEMPLATE_DIR}"))? {
        for entry in entries {
            let Some(path) = str_field(&entry, "path") else { continue };
            let Some(format) = TemplateFormat::from_path(&path) else { continue };
            if let Some(raw_text) = client.get_raw(&format!("/repos/{full_name}/contents/{path}"))? {
                templates.push(TemplateFile {
                    repo_id: repo_id.clone(),
                    path,
                    format,
                    raw_text,
                });
            }
        }
    }

    Ok(Some(RepoData {
        repo: RepoRecord {
            repo_id,
            full_name: str_field(&meta, "full_name").unwrap_or_else(|| full_name.to_string()),
            contributors,
            stars: meta.get("stargazers_count").and_then(Value::as_u64).unwrap_or(0),
            labeled_issue_count: 0,
            readme_text,
            about_text: str_field(&meta, "description"),
        },
        issues,
        templates,
        skipped_pull_requests,
    }))
}

/// Fetches repositories, issues (pull requests excluded), README, About text
/// and issue templates, then writes a corpus directory sorted by
/// `(repo_id, issue_id)`.
///
/// Unknown repositories are logged and skipped. Authentication failures and
/// exhausted rate-limit retries abort the whole run.
pub fn fetch_remote(repo_list: &[String], cfg: &FetchConfig, out_dir: &Path) -> Result<FetchSummary, FetchError> {
    let client = Client::new(cfg);
    let cursor = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, RepoOutcome)>> = Mutex::new(Vec::new());
    let width = cfg.parallel.clamp(1, repo_list.len().max(1));

    thread::scope(|scope| {
        for _ in 0..width {
            scope.spawn(|| loop {
                let idx = cursor.fetch_add(1, Ordering::SeqCst);
                let Some(name) = repo_list.get(idx) else { break };
                info!(repo = %name, "fetching repository");
                let outcome = fetch_repo(&client, name.trim());
                results.lock().expect("results poisoned").push((idx, outcome));
            });
        }
    });

    let mut results = results.into_inner().expect("results poisoned");
    results.sort_by_key(|(idx, _)| *idx);

    let mut summary = FetchSummary::default();
    let mut corpus = Corpus::default();
    for (idx, outcome) in results {
        match outcome? {
            None => {
                warn!(repo = %repo_list[idx], "repository not found, skipping");
                summary.not_found.push(repo_list[idx].clone());
            }
            Some(data) => {
                summary.skipped_pull_requests += data.skipped_pull_requests;
                corpus.repos.push(data.repo);
                corpus.issues.extend(data.issues);
                corpus.templates.extend(data.templates);
            }
        }
    }
    corpus.repos.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));
    corpus.repos.dedup_by(|a, b| a.repo_id == b.repo_id);
    corpus.issues.sort_by(|a, b| (&a.repo_id, &a.issue_id).cmp(&(&b.repo_id, &b.issue_id)));
    corpus.templates.sort_by(|a, b| (&a.repo_id, &a.path).cmp(&(&b.repo_id, &b.path)));
    corpus.recount();

    summary.repos = corpus.repos.len();
    summary.issues = corpus.issues.len();
    summary.templates = corpus.templates.len();
    write_corpus(&corpus, out_dir)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_link_is_extracted() {
        let header = r#"<https://api.github.com/repos/a/b/issues?page=2>; rel="next", <https://api.github.com/repos/a/b/issues?page=5>; rel="last""#;
        assert_eq!(
            parse_next_link(header).as_deref(),
            Some("https://api.github.com/repos/a/b/issues?page=2")
        );
        assert_eq!(parse_next_link(r#"<https://x/?page=1>; rel="prev""#), None);
        assert_eq!(parse_next_link(""), None);
    }
}
