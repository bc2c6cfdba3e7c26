//! Repository discovery through a code-host search API.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use log::{info, warn};
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Description pattern a repository must match to be considered.
pub const REPO_PATTERN: &str = r"(?i)micro( |-)?services?( |-)(architecture|system|application)";

pub const DEFAULT_MIN_STARS: u64 = 10;
pub const TOKEN_ENV: &str = "MONOEMBED_GH_TOKEN";
pub const DEFAULT_API_BASE: &str = "https://api.github.com";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoCandidate {
    pub url: String,
    pub stars: u64,
    pub has_java: bool,
    pub matched_query: String,
}

impl RepoCandidate {
    /// `owner__repo` style name derived from the clone URL.
    pub fn repo_name(&self) -> String {
        repo_name_from_url(&self.url)
    }
}

pub fn repo_name_from_url(url: &str) -> String {
    let trimmed = url.trim_end_matches('/').trim_end_matches(".git");
    let parts: Vec<&str> = trimmed.rsplit(['/', ':']).take(2).collect();
    match parts.as_slice() {
        [repo, owner] if !owner.is_empty() => format!("{owner}__{repo}"),
        [repo, ..] => repo.to_string(),
        [] => trimmed.to_string(),
    }
}

/// One search hit in the GitHub REST search schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchItem {
    pub full_name: String,
    pub clone_url: String,
    #[serde(rename = "stargazers_count")]
    pub stars: u64,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub language: Option<String>,
    /// Not part of the search API; filled in by clients that fetch READMEs.
    #[serde(default)]
    pub readme: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchPage {
    #[serde(default)]
    pub total_count: u64,
    pub items: Vec<SearchItem>,
}

pub trait SearchClient {
    fn search(&self, query: &str, page: u32) -> Result<SearchPage>;
}

pub fn repo_pattern() -> Regex {
    Regex::new(REPO_PATTERN).expect("static regex")
}

fn accept(item: &SearchItem, pattern: &Regex, min_stars: u64) -> bool {
    let text_matches = item.description.as_deref().is_some_and(|d| pattern.is_match(d))
        || item.readme.as_deref().is_some_and(|r| pattern.is_match(r));
    let has_java = item
        .language
        .as_deref()
        .is_some_and(|l| l.eq_ignore_ascii_case("java"));
    text_matches && has_java && item.stars >= min_stars
}

/// Runs every query page by page and keeps matching repositories,
/// deduplicated by URL in first-seen order.
pub fn discover_repos(
    client: &dyn SearchClient,
    queries: &[String],
    min_stars: u64,
    max_pages: u32,
) -> Result<Vec<RepoCandidate>> {
    let pattern = repo_pattern();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for query in queries {
        for page in 1..=max_pages.max(1) {
            let result = client.search(query, page)?;
            let last = result.items.is_empty()
                || u64::from(page) * PER_PAGE >= result.total_count.min(1000);
            for item in result.items {
                if !accept(&item, &pattern, min_stars) || !seen.insert(item.clone_url.clone()) {
                    continue;
                }
                out.push(RepoCandidate {
                    url: item.clone_url,
                    stars: item.stars,
                    has_java: true,
                    matched_query: query.clone(),
                });
            }
            if last {
                break;
            }
        }
    }
    Ok(out)
}

const PER_PAGE: u64 = 100;

/// Default search queries; the description regex does the real filtering.
pub fn default_queries(min_stars: u64) -> Vec<String> {
    ["microservices architecture", "microservice system", "microservices application"]
        .iter()
        .map(|q| format!("{q} language:java stars:>={min_stars}"))
        .collect()
}

/// Serves search pages from files in the GitHub response schema. Every
/// query gets the same pages: `page-1.json`, `page-2.json`, ... or a single
/// file for page 1.
pub struct FixtureSearchClient {
    pages: Vec<PathBuf>,
}

impl FixtureSearchClient {
    pub fn new(pages: Vec<PathBuf>) -> Self {
        Self { pages }
    }
}

impl SearchClient for FixtureSearchClient {
    fn search(&self, _query: &str, page: u32) -> Result<SearchPage> {
        let Some(path) = self.pages.get(page as usize - 1) else {
            return Ok(SearchPage {
                total_count: 0,
                items: Vec::new(),
            });
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// GitHub REST search client with an on-disk response cache.
pub struct GithubClient {
    pub api_base: String,
    pub token: Option<String>,
    pub cache_dir: Option<PathBuf>,
    /// Never touch the network; cache misses are errors.
    pub offline: bool,
    pub retries: u32,
    pub backoff: Duration,
    /// Upper bound on a single rate-limit wait.
    pub max_rate_limit_wait: Duration,
    http: reqwest::blocking::Client,
}

impl GithubClient {
    pub fn new(api_base: impl Into<String>) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .user_agent(concat!("monoembed/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(Self {
            api_base: api_base.into().trim_end_matches('/').to_string(),
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            cache_dir: None,
            offline: false,
            retries: 3,
            backoff: Duration::from_millis(500),
            max_rate_limit_wait: Duration::from_secs(120),
            http,
        })
    }

    fn cache_path(&self, key: &str) -> Option<PathBuf> {
        let digest = Sha256::digest(key.as_bytes());
        self.cache_dir
            .as_ref()
            .map(|d| d.join(format!("{}.json", hex::encode(digest))))
    }

    /// GETs `path_and_query` relative to the API base, going through the cache.
    pub fn get_json(&self, path_and_query: &str) -> Result<String> {
        let url = format!("{}{path_and_query}", self.api_base);
        // Cache keys ignore the host so a cache can be replayed against any base.
        let cache = self.cache_path(path_and_query);
        if let Some(path) = &cache {
            if let Ok(text) = std::fs::read_to_string(path) {
                return Ok(text);
            }
        }
        if self.offline {
            return Err(Error::Network(format!("offline and no cached response for {url}")));
        }
        let text = self.fetch(&url)?;
        if let Some(path) = &cache {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
        }
        Ok(text)
    }

    fn fetch(&self, url: &str) -> Result<String> {
        let mut attempt = 0;
        let mut rate_waits = 0;
        loop {
            let mut req = self
                .http
                .get(url)
                .header("Accept", "application/vnd.github+json");
            if let Some(token) = &self.token {
                req = req.bearer_auth(token);
            }
            let failure = match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp.text().map_err(|e| Error::Network(e.to_string()));
                    }
                    if status.as_u16() == 401 {
                        return Err(Error::Network(format!(
                            "authentication failed for {url} (401); check {TOKEN_ENV}"
                        )));
                    }
                    if let Some(wait) = rate_limit_wait(&resp) {
                        if rate_waits < 5 {
                            rate_waits += 1;
                            let wait = wait.min(self.max_rate_limit_wait);
                            info!("rate limited, waiting {wait:?}");
                            std::thread::sleep(wait);
                            continue;
                        }
                    }
                    format!("{url}: HTTP {status}")
                }
                Err(e) => format!("{url}: {e}"),
            };
            attempt += 1;
            if attempt > self.retries {
                return Err(Error::Network(format!(
                    "{failure} (gave up after {} retries)",
                    self.retries
                )));
            }
            warn!("{failure}; retrying");
            std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
        }
    }
}

fn rate_limit_wait(resp: &reqwest::blocking::Response) -> Option<Duration> {
    let status = resp.status().as_u16();
    if status != 403 && status != 429 {
        return None;
    }
    let header = |name: &str| {
        resp.headers()
            .get(name)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse::<u64>().ok())
    };
    if let Some(secs) = header("retry-after") {
        return Some(Duration::from_secs(secs));
    }
    if header("x-ratelimit-remaining") == Some(0) {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let reset = header("x-ratelimit-reset").unwrap_or(now + 60);
        return Some(Duration::from_secs(reset.saturating_sub(now) + 1));
    }
    None
}

impl SearchClient for GithubClient {
    fn search(&self, query: &str, page: u32) -> Result<SearchPage> {
        let q: String = url_encode(query);
        let text = self.get_json(&format!(
            "/search/repositories?q={q}&per_page={PER_PAGE}&page={page}"
        ))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn url_encode(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                out.push(b as char)
            }
            b' ' => out.push('+'),
            _ => out.push_str(&format!("%{b:02X}")),
        }
    }
    out
}
