use serde::Deserialize;
use std::time::Duration;

use super::{BackendError, HarvestedFile, SearchBackend, SearchPage, SearchQuery, SortOrder};

pub const DEFAULT_API_URL: &str = "https://api.github.com";
/// Environment variable holding the API token.
pub const TOKEN_VAR: &str = "GITHUB_TOKEN";

const PAGE_SIZE: u64 = 100;
const CAP: u64 = 1000;

/// GitHub code search. Each hit's contents are fetched from its contents
/// URL as raw bytes.
pub struct GithubBackend {
    agent: ureq::Agent,
    base_url: String,
    token: Option<String>,
}

#[derive(Deserialize)]
struct SearchResponse {
    total_count: u64,
    items: Vec<Item>,
}

#[derive(Deserialize)]
struct Item {
    path: String,
    url: String,
    repository: Repository,
}

#[derive(Deserialize)]
struct Repository {
    full_name: String,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    stargazers_count: Option<u64>,
}

impl GithubBackend {
    pub fn new(base_url: &str, token: Option<String>) -> GithubBackend {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .user_agent("alias-census")
            .build()
            .into();
        GithubBackend { agent, base_url: base_url.trim_end_matches('/').to_string(), token }
    }

    /// Uses `GITHUB_TOKEN` when set.
    pub fn from_env(base_url: Option<&str>) -> GithubBackend {
        let token = std::env::var(TOKEN_VAR).ok().filter(|t| !t.is_empty());
        GithubBackend::new(base_url.unwrap_or(DEFAULT_API_URL), token)
    }

    fn get(&self, url: &str, accept: &str) -> ureq::RequestBuilder<ureq::typestate::WithoutBody> {
        let req = self.agent.get(url).header("Accept", accept).header("X-GitHub-Api-Version", "2022-11-28");
        match &self.token {
            Some(t) => req.header("Authorization", &format!("Bearer {t}")),
            None => req,
        }
    }

    fn fetch_contents(&self, url: &str) -> Result<Vec<u8>, BackendError> {
        let mut resp = self.get(url, "application/vnd.github.raw+json").call().map_err(transport)?;
        check_status(resp.status().as_u16(), 0)?;
        resp.body_mut().read_to_vec().map_err(transport)
    }
}

fn transport(e: ureq::Error) -> BackendError {
    BackendError::Transient(e.to_string())
}

fn check_status(status: u16, page: u64) -> Result<(), BackendError> {
    match status {
        200..=299 => Ok(()),
        // secondary rate limits answer 403
        403 | 429 => Err(BackendError::Transient(format!("rate limited (HTTP {status})"))),
        422 if page > 0 => Err(BackendError::PageOutOfRange { page }),
        500..=599 => Err(BackendError::Transient(format!("HTTP {status}"))),
        _ => Err(BackendError::Fatal(format!("HTTP {status}"))),
    }
}

impl SearchBackend for GithubBackend {
    fn page_size(&self) -> u64 {
        PAGE_SIZE
    }

    fn cap(&self) -> u64 {
        CAP
    }

    fn search(&mut self, query: &SearchQuery, order: SortOrder, page: u64) -> Result<SearchPage, BackendError> {
        if page == 0 || page > CAP / PAGE_SIZE {
            return Err(BackendError::PageOutOfRange { page });
        }
        let direction = match order {
            SortOrder::Newest => "desc",
            SortOrder::Oldest => "asc",
        };
        let url = format!("{}/search/code", self.base_url);
        let mut resp = self
            .get(&url, "application/vnd.github+json")
            .query("q", query.query_string())
            .query("sort", "indexed")
            .query("order", direction)
            .query("per_page", PAGE_SIZE.to_string())
            .query("page", page.to_string())
            .call()
            .map_err(transport)?;
        check_status(resp.status().as_u16(), page)?;
        let body: SearchResponse =
            resp.body_mut().read_json().map_err(|e| BackendError::Fatal(format!("bad search response: {e}")))?;
        let mut items = Vec::with_capacity(body.items.len());
        for it in body.items {
            let bytes = self.fetch_contents(&it.url)?;
            items.push(HarvestedFile {
                repo: it.repository.full_name,
                path: it.path,
                description: it.repository.description,
                stars: it.repository.stargazers_count,
                size: bytes.len() as u64,
                contents: String::from_utf8_lossy(&bytes).into_owned(),
            });
        }
        Ok(SearchPage { total_count: body.total_count, items })
    }
}
