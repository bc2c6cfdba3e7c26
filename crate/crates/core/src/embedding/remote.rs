//! HTTP client for OpenAI-style embedding endpoints.
//!
//! Wire format: `POST {"model": str, "input": [str, ...]}` answered by
//! `{"data": [{"index": int, "embedding": [float, ...]}, ...]}` where
//! `index` refers to the position within the request's `input`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::code_model::LabeledCorpus;
use crate::{Error, Result};

pub const REMOTE_KEY_ENV: &str = "MONOEMBED_REMOTE_KEY";
pub const DEFAULT_INSTRUCTION: &str = "Given the source code, retrieve the bounded contexts;";
pub const DEFAULT_MAX_CHARS: usize = 12_000;
pub const DEFAULT_CONCURRENCY: usize = 4;
pub const DEFAULT_RETRIES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model_name: String,
    /// Prepended to every payload, followed by a newline.
    pub instruction: Option<String>,
    pub batch_size: usize,
    pub max_chars: usize,
    pub concurrency: usize,
    /// Retries after the first attempt of each batch.
    pub retries: u32,
    /// First backoff delay; doubles on each retry.
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            instruction: None,
            batch_size: 16,
            max_chars: DEFAULT_MAX_CHARS,
            concurrency: DEFAULT_CONCURRENCY,
            retries: DEFAULT_RETRIES,
            backoff_ms: 200,
            timeout_ms: 60_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.endpoint.is_empty() || self.model_name.is_empty() {
            return Err(Error::invalid("remote provider requires an endpoint and a model name"));
        }
        if self.batch_size == 0 || self.concurrency == 0 {
            return Err(Error::invalid("batch size and concurrency must be positive"));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    index: usize,
    embedding: Vec<f64>,
}

/// Optional instruction line plus the class source cut to `max_chars` characters.
pub fn payload(source: &str, instruction: Option<&str>, max_chars: usize) -> String {
    let body: String = match source.char_indices().nth(max_chars) {
        Some((cut, _)) => source[..cut].to_string(),
        None => source.to_string(),
    };
    match instruction {
        Some(prefix) => format!("{prefix}\n{body}"),
        None => body,
    }
}

enum Failure {
    Retryable(String),
    Fatal(Error),
}

fn post_batch(http: &reqwest::blocking::Client, cfg: &RemoteConfig, key: Option<&str>, input: &[String]) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    let mut req = http.post(&cfg.endpoint).json(&EmbedRequest {
        model: &cfg.model_name,
        input,
    });
    if let Some(key) = key {
        req = req.bearer_auth(key);
    }
    let resp = req.send().map_err(|e| Failure::Retryable(e.to_string()))?;
    let status = resp.status();
    if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
        return Err(Failure::Fatal(Error::Network(format!(
            "authentication rejected by {} ({status}); check {REMOTE_KEY_ENV}",
            cfg.endpoint
        ))));
    }
    if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
        return Err(Failure::Retryable(format!("HTTP {status}")));
    }
    if !status.is_success() {
        return Err(Failure::Fatal(Error::Network(format!("HTTP {status} from {}", cfg.endpoint))));
    }
    let body: EmbedResponse = resp
        .json()
        .map_err(|e| Failure::Retryable(format!("undecodable response: {e}")))?;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; input.len()];
    for datum in body.data {
        match rows.get_mut(datum.index) {
            Some(slot @ None) => *slot = Some(datum.embedding),
            _ => {
                return Err(Failure::Fatal(Error::invalid(format!(
                    "response index {} is out of range or repeated",
                    datum.index
                ))))
            }
        }
    }
    rows.into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Failure::Fatal(Error::invalid("response is missing embeddings for some inputs")))
}

fn embed_batch(http: &reqwest::blocking::Client, cfg: &RemoteConfig, key: Option<&str>, ids: &[usize], input: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut delay = Duration::from_millis(cfg.backoff_ms);
    let mut last = String::new();
    for attempt in 0..=cfg.retries {
        if attempt > 0 {
            log::warn!("retrying classes {ids:?} in {delay:?} ({last})");
            thread::sleep(delay);
            delay *= 2;
        }
        match post_batch(http, cfg, key, input) {
            Ok(rows) => return Ok(rows),
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::Retryable(msg)) => last = msg,
        }
    }
    Err(Error::Network(format!(
        "embedding request failed after {} attempts for classes {ids:?}: {last}",
        cfg.retries + 1
    )))
}

/// Embeds every class through the remote endpoint. Batches run on up to
/// `cfg.concurrency` threads; rows are reassembled in class-id order and all
/// must share the dimension of the first batch.
pub fn embed_remote(corpus: &LabeledCorpus, cfg: &RemoteConfig) -> Result<EmbeddingMatrix> {
    cfg.validate()?;
    let key = std::env::var(REMOTE_KEY_ENV).ok().filter(|k| !k.is_empty());
    let http = reqwest::blocking::Client::builder()
        .timeout(Duration::from_millis(cfg.timeout_ms))
        .build()
        .map_err(|e| Error::Network(e.to_string()))?;
    let payloads: Vec<String> = corpus
        .classes
        .iter()
        .map(|c| payload(&c.source, cfg.instruction.as_deref(), cfg.max_chars))
        .collect();
    let ids: Vec<usize> = (0..payloads.len()).collect();
    let batches: Vec<(&[usize], &[String])> = ids
        .chunks(cfg.batch_size)
        .zip(payloads.chunks(cfg.batch_size))
        .collect();

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<Vec<f64>>>>>> =
        Mutex::new((0..batches.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..cfg.concurrency.min(batches.len()) {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::SeqCst);
                let Some((batch_ids, input)) = batches.get(b) else {
                    break;
                };
                let out = embed_batch(&http, cfg, key.as_deref(), batch_ids, input);
                let failed = out.is_err();
                results.lock().expect("result lock")[b] = Some(out);
                if failed {
                    // let the remaining workers drain quickly
                    next.fetch_add(batches.len(), Ordering::SeqCst);
                }
            });
        }
    });

    let mut rows = Vec::with_capacity(payloads.len());
    let mut dim = None;
    for result in results.into_inner().expect("result lock") {
        let Some(batch) = result else {
            // a worker stopped early after another batch failed
            continue;
        };
        for row in batch? {
            let expected = *dim.get_or_insert(row.len());
            if row.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    got: row.len(),
                });
            }
            rows.push(row);
        }
    }
    if rows.len() != payloads.len() {
        return Err(Error::Network("embedding run aborted before all batches completed".into()));
    }
    EmbeddingMatrix::from_rows(&corpus.app_name, "remote", rows)
}
