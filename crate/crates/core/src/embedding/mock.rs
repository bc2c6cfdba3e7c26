//! Local embedding server speaking the remote wire format, for offline tests.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tokio::sync::oneshot;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockMode {
    Normal,
    /// The first request answered gets `dim - 1` dimensions, later ones `dim`.
    DimSwitch,
    /// Every request fails with HTTP 500.
    AlwaysFail,
}

impl std::str::FromStr for MockMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(MockMode::Normal),
            "dim-switch" => Ok(MockMode::DimSwitch),
            "always-fail" => Ok(MockMode::AlwaysFail),
            other => Err(Error::invalid(format!("unknown mock mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MockConfig {
    pub mode: MockMode,
    pub dim: usize,
    /// Upper bound of the random per-request delay.
    pub max_delay_ms: u64,
    /// Fail this many requests with HTTP 503 before answering normally.
    pub fail_first: usize,
    pub seed: u64,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            mode: MockMode::Normal,
            dim: 4,
            max_delay_ms: 0,
            fail_first: 0,
            seed: 0,
        }
    }
}

/// Deterministic unit vector for `text`, derived from its SHA-256 digest.
pub fn mock_embedding(text: &str, dim: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(dim);
    let mut block = 0u32;
    while values.len() < dim {
        let digest = Sha256::new()
            .chain_update(block.to_le_bytes())
            .chain_update(text.as_bytes())
            .finalize();
        for pair in digest.chunks(2) {
            if values.len() == dim {
                break;
            }
            let v = u16::from_le_bytes([pair[0], pair[1]]) as f64 / 65535.0;
            values.push(2.0 * v - 1.0);
        }
        block += 1;
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    values
}

struct Shared {
    cfg: MockConfig,
    requests: Arc<AtomicUsize>,
}

#[derive(Deserialize)]
struct Request {
    #[allow(dead_code)]
    model: String,
    input: Vec<String>,
}

async fn embeddings(State(shared): State<Arc<Shared>>, Json(req): Json<Request>) -> (StatusCode, Json<Value>) {
    let nth = shared.requests.fetch_add(1, Ordering::SeqCst);
    let cfg = &shared.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (nth as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    if cfg.max_delay_ms > 0 {
        tokio::time::sleep(Duration::from_millis(rng.random_range(0..=cfg.max_delay_ms))).await;
    }
    if cfg.mode == MockMode::AlwaysFail {
        return (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({"error": "always-fail"})));
    }
    if nth < cfg.fail_first {
        return (StatusCode::SERVICE_UNAVAILABLE, Json(json!({"error": "warming up"})));
    }
    let dim = match cfg.mode {
        MockMode::DimSwitch if nth == cfg.fail_first => cfg.dim.saturating_sub(1).max(1),
        _ => cfg.dim,
    };
    let mut data: Vec<Value> = req
        .input
        .iter()
        .enumerate()
        .map(|(i, text)| json!({"index": i, "embedding": mock_embedding(text, dim)}))
        .collect();
    data.shuffle(&mut rng);
    (StatusCode::OK, Json(json!({"object": "list", "data": data})))
}

pub fn router(cfg: MockConfig, requests: Arc<AtomicUsize>) -> Router {
    Router::new()
        .route("/v1/embeddings", post(embeddings))
        .route("/embeddings", post(embeddings))
        .with_state(Arc::new(Shared { cfg, requests }))
}

/// A running mock server; stopped on drop.
pub struct MockServer {
    pub addr: SocketAddr,
    requests: Arc<AtomicUsize>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl MockServer {
    /// Binds an ephemeral localhost port and serves on a background thread.
    pub fn start(cfg: MockConfig) -> Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        let listener = runtime
            .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
            .map_err(|e| Error::Network(format!("cannot bind mock server: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Error::Network(e.to_string()))?;
        let requests = Arc::new(AtomicUsize::new(0));
        let app = router(cfg, requests.clone());
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(Self {
            addr,
            requests,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}/v1/embeddings", self.addr)
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Serves on `addr` until the process is killed.
pub fn serve_forever(addr: SocketAddr, cfg: MockConfig) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Network(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Error::Network(format!("cannot bind {addr}: {e}")))?;
        log::info!("mock embedding server on http://{}/v1/embeddings", listener.local_addr().map_err(|e| Error::Network(e.to_string()))?);
        axum::serve(listener, router(cfg, Arc::new(AtomicUsize::new(0))))
            .await
            .map_err(|e| Error::Network(e.to_string()))
    })
}
