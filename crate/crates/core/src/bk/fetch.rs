//! Client for the graph's edge-query endpoint.
//!
//! The HTTP layer is a [`Transport`] supplied by the caller so the client can
//! be driven by a recorded stub in tests.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::Value;
use thiserror::Error;

use crate::term::is_constant_symbol;

use super::{normalize_symbol, BkOptions, KnowledgeEdge, Snapshot};

const RELATION_ID: &str = "/r/RelatedTo";
const FRAGMENT_LEN: usize = 160;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// A failure below HTTP: DNS, connect, timeout, reset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error("{word}: network error after {attempts} attempts: {message}")]
    Network {
        word: String,
        attempts: u32,
        message: String,
    },
    #[error("{word}: rate limited after {attempts} attempts")]
    RateLimited { word: String, attempts: u32 },
    #[error("{word}: HTTP status {status}")]
    Status { word: String, status: u16 },
    #[error("{word}: malformed response near `{fragment}`")]
    Malformed { word: String, fragment: String },
}

impl FetchError {
    pub fn word(&self) -> &str {
        match self {
            FetchError::Network { word, .. }
            | FetchError::RateLimited { word, .. }
            | FetchError::Status { word, .. }
            | FetchError::Malformed { word, .. } => word,
        }
    }

    /// Whether the endpoint could not be reached at all, as opposed to
    /// answering with something unusable.
    pub fn is_network(&self) -> bool {
        matches!(self, FetchError::Network { .. } | FetchError::RateLimited { .. })
    }
}

/// Bounded exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

/// Concurrency limits for [`fetch_many`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FetchPolicy {
    pub max_in_flight: usize,
    /// Minimum gap between the starts of two requests.
    pub spacing: Duration,
    pub retry: RetryPolicy,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            max_in_flight: 4,
            spacing: Duration::from_millis(250),
            retry: RetryPolicy::default(),
        }
    }
}

pub fn query_url(endpoint: &str, word: &str, options: &BkOptions) -> String {
    let limit = options.max_related_per_word.saturating_mul(5).min(1000);
    format!(
        "{}/query?node=/c/en/{word}&rel={RELATION_ID}&limit={limit}",
        endpoint.trim_end_matches('/')
    )
}

fn fragment(body: &str) -> String {
    body.chars().take(FRAGMENT_LEN).collect()
}

/// English term of a node id such as `/c/en/phone_call/n`.
fn english_term(id: &str) -> Option<String> {
    let mut parts = id.split('/');
    if parts.next() != Some("") || parts.next() != Some("c") || parts.next() != Some("en") {
        return None;
    }
    let raw = parts.next()?.to_ascii_lowercase().replace(' ', "_");
    let sym = normalize_symbol(&raw);
    is_constant_symbol(&sym).then_some(sym)
}

/// Extracts `word`'s related edges from an edge-list response body.
pub fn parse_response(word: &str, body: &str, options: &BkOptions) -> Result<Vec<KnowledgeEdge>, FetchError> {
    let malformed = || FetchError::Malformed {
        word: word.to_string(),
        fragment: fragment(body),
    };
    let json: Value = serde_json::from_str(body).map_err(|_| malformed())?;
    let edges = json.get("edges").and_then(Value::as_array).ok_or_else(malformed)?;
    let mut out: Vec<KnowledgeEdge> = Vec::new();
    for e in edges {
        let id = |side: &str| {
            e.get(side)
                .and_then(|n| n.get("@id"))
                .and_then(Value::as_str)
        };
        let rel = e.get("rel").and_then(|r| r.get("@id")).and_then(Value::as_str);
        let (Some(start), Some(end), Some(rel)) = (id("start"), id("end"), rel) else {
            return Err(FetchError::Malformed {
                word: word.to_string(),
                fragment: fragment(&e.to_string()),
            });
        };
        let weight = e.get("weight").and_then(Value::as_f64).unwrap_or(0.0);
        if rel != RELATION_ID || weight < options.min_weight {
            continue;
        }
        let (Some(start), Some(end)) = (english_term(start), english_term(end)) else {
            continue;
        };
        let other = if start == word {
            end
        } else if end == word {
            start
        } else {
            continue;
        };
        let Ok(edge) = KnowledgeEdge::related(word, &other, weight) else {
            continue;
        };
        match out.iter_mut().find(|x| x.tail == edge.tail) {
            Some(x) if x.weight >= edge.weight => {}
            Some(x) => x.weight = edge.weight,
            None => out.push(edge),
        }
    }
    out.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.tail.cmp(&b.tail)));
    out.truncate(options.max_related_per_word);
    Ok(out)
}

fn fetch_paced(
    word: &str,
    endpoint: &str,
    options: &BkOptions,
    transport: &dyn Transport,
    retry: &RetryPolicy,
    pace: &dyn Fn(),
) -> Result<Vec<KnowledgeEdge>, FetchError> {
    let url = query_url(endpoint, word, options);
    let attempts = retry.attempts.max(1);
    let mut last = FetchError::Network {
        word: word.to_string(),
        attempts: 0,
        message: "no attempt made".into(),
    };
    for attempt in 0..attempts {
        if attempt > 0 {
            thread::sleep(retry.base_delay * 2u32.pow(attempt - 1));
        }
        pace();
        log::debug!("GET {url} (attempt {})", attempt + 1);
        match transport.get(&url) {
            Ok(r) if r.status == 200 => return parse_response(word, &r.body, options),
            Ok(r) if r.status == 429 => {
                last = FetchError::RateLimited {
                    word: word.to_string(),
                    attempts: attempt + 1,
                }
            }
            Ok(r) if r.status >= 500 => {
                last = FetchError::Network {
                    word: word.to_string(),
                    attempts: attempt + 1,
                    message: format!("HTTP status {}", r.status),
                }
            }
            Ok(r) => {
                return Err(FetchError::Status {
                    word: word.to_string(),
                    status: r.status,
                })
            }
            Err(e) => {
                last = FetchError::Network {
                    word: word.to_string(),
                    attempts: attempt + 1,
                    message: e.0,
                }
            }
        }
    }
    Err(last)
}

/// Fetches the related edges of one word, retrying network failures, rate
/// limiting and server errors.
pub fn fetch_related(
    word: &str,
    endpoint: &str,
    options: &BkOptions,
    transport: &dyn Transport,
    retry: &RetryPolicy,
) -> Result<Vec<KnowledgeEdge>, FetchError> {
    fetch_paced(word, endpoint, options, transport, retry, &|| {})
}

/// Results of [`fetch_many`], in input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FetchReport {
    pub fetched: Vec<(String, Vec<KnowledgeEdge>)>,
    pub failures: Vec<FetchError>,
}

impl FetchReport {
    /// Adds every fetched word and its edges to `snapshot`.
    pub fn merge_into(&self, snapshot: &mut Snapshot) {
        for (word, edges) in &self.fetched {
            snapshot.mark_fetched(word);
            for e in edges {
                snapshot.insert(e.clone()).expect("fetched edges are valid");
            }
        }
    }
}

type WordResult = Result<Vec<KnowledgeEdge>, FetchError>;

/// Fetches many words with at most `max_in_flight` concurrent requests and at
/// least `spacing` between request starts.
pub fn fetch_many(
    words: &[String],
    endpoint: &str,
    options: &BkOptions,
    transport: &dyn Transport,
    policy: &FetchPolicy,
) -> FetchReport {
    let next = AtomicUsize::new(0);
    let slot: Mutex<Option<Instant>> = Mutex::new(None);
    let results: Mutex<Vec<Option<WordResult>>> = Mutex::new(vec![None; words.len()]);
    let pace = || {
        let wait = {
            let mut last = slot.lock().unwrap();
            let now = Instant::now();
            let start = match *last {
                Some(t) if t + policy.spacing > now => t + policy.spacing,
                _ => now,
            };
            *last = Some(start);
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    };
    let workers = policy.max_in_flight.max(1).min(words.len());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(word) = words.get(i) else {
                    break;
                };
                let r = fetch_paced(word, endpoint, options, transport, &policy.retry, &pace);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut report = FetchReport::default();
    for (word, r) in words.iter().zip(results.into_inner().unwrap()) {
        match r.expect("every word is fetched") {
            Ok(edges) => report.fetched.push((word.clone(), edges)),
            Err(e) => report.failures.push(e),
        }
    }
    report
}
