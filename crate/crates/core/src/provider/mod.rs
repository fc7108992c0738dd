//! Completion gateway: a pluggable chat backend behind a response cache and
//! a bounded worker pool.

mod cache;
mod http;
mod simulated;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub use cache::ResponseCache;
pub use http::HttpChat;
pub use simulated::{Bias, SimulatedAnnotator, SimulatedAnnotatorParams};

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::personas::Persona;
use crate::prompting::{RenderedPrompt, Variant, WorkItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HttpChat,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Wait before retry `i` is `backoff_ms[min(i, len - 1)]`.
    pub backoff_ms: Vec<u64>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            backoff_ms: vec![1_000, 2_000, 4_000, 8_000, 16_000],
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> std::time::Duration {
        let ms = self
            .backoff_ms
            .get(retry as usize)
            .or(self.backoff_ms.last())
            .copied()
            .unwrap_or(0);
        std::time::Duration::from_millis(ms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint_url: Option<String>,
    pub model_name: String,
    /// Environment variable holding the bearer token; `None` sends no auth.
    pub api_key_env: Option<String>,
    pub max_parallel: usize,
    pub retry: RetryPolicy,
    /// Extra request fields, empty for provider defaults.
    pub params: Map<String, Value>,
    pub reasoning_effort: Option<String>,
    pub timeout_secs: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Simulated,
            endpoint_url: None,
            model_name: "simulated".into(),
            api_key_env: Some("AUDIT_API_KEY".into()),
            max_parallel: 4,
            retry: RetryPolicy::default(),
            params: Map::new(),
            reasoning_effort: None,
            timeout_secs: 120,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_parallel == 0 {
            return Err(Error::Config("max_parallel must be at least 1".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(Error::Config("retry.max_attempts must be at least 1".into()));
        }
        if self.kind == ProviderKind::HttpChat {
            if self.endpoint_url.as_deref().is_none_or(str::is_empty) {
                return Err(Error::Config("http_chat provider needs endpoint_url".into()));
            }
            if self.model_name.is_empty() {
                return Err(Error::Config("http_chat provider needs model_name".into()));
            }
        }
        Ok(())
    }

    /// Sampling parameters as sent on the wire, including reasoning effort.
    pub fn effective_params(&self) -> Map<String, Value> {
        let mut p = self.params.clone();
        if let Some(effort) = &self.reasoning_effort {
            p.insert("reasoning_effort".into(), Value::String(effort.clone()));
        }
        p
    }
}

/// Everything a backend may need to answer one work item.
#[derive(Debug, Clone, Copy)]
pub struct Request<'a> {
    pub item: &'a WorkItem,
    pub instance: &'a Instance,
    pub persona: &'a Persona,
    pub prompt: &'a RenderedPrompt,
    pub variant: Variant,
}

/// Backend reply before caching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub attempt: u32,
}

pub trait ChatBackend: Send + Sync {
    fn model_name(&self) -> &str;
    /// Parameters that change the output; part of the cache key.
    fn cache_params(&self) -> Value;
    fn call(&self, req: &Request<'_>) -> Result<Completion>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub key: String,
    pub work_item_key: String,
    pub model_name: String,
    pub text: String,
    pub latency_secs: f64,
    pub attempt: u32,
    pub timestamp_ms: u64,
}

/// Digest of (model, params, prompt, run) addressing a cached response.
pub fn cache_key(model_name: &str, params: &Value, prompt: &str, run: u32) -> String {
    let material = serde_json::to_vec(&(model_name, params, prompt, run)).expect("tuple serializes");
    hex::encode(Sha256::digest(material))
}

/// Routes requests through the cache to a backend with at most
/// `max_parallel` calls in flight.
pub struct Gateway {
    backend: Box<dyn ChatBackend>,
    cache: Option<ResponseCache>,
    max_parallel: usize,
    hits: AtomicUsize,
    calls: AtomicUsize,
}

impl Gateway {
    pub fn new(backend: Box<dyn ChatBackend>, max_parallel: usize) -> Self {
        Gateway {
            backend,
            cache: None,
            max_parallel: max_parallel.max(1),
            hits: AtomicUsize::new(0),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn model_name(&self) -> &str {
        self.backend.model_name()
    }

    pub fn cache_hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn backend_calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn key_for(&self, req: &Request<'_>) -> String {
        cache_key(self.backend.model_name(), &self.backend.cache_params(), &req.prompt.text, req.item.run)
    }

    pub fn complete(&self, req: &Request<'_>) -> Result<RawResponse> {
        let key = self.key_for(req);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let done = self.backend.call(req)?;
        let resp = RawResponse {
            key,
            work_item_key: req.item.key(),
            model_name: self.backend.model_name().to_string(),
            text: done.text,
            latency_secs: start.elapsed().as_secs_f64(),
            attempt: done.attempt,
            timestamp_ms: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64),
        };
        if let Some(c) = &self.cache {
            c.put(&resp)?;
        }
        Ok(resp)
    }

    /// Completes every request; results line up with `reqs`. Completion
    /// order across workers is unspecified.
    pub fn complete_all(&self, reqs: &[Request<'_>]) -> Vec<Result<RawResponse>> {
        let slots: Vec<Mutex<Option<Result<RawResponse>>>> = reqs.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..self.max_parallel.min(reqs.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(req) = reqs.get(i) else { break };
                    let out = self.complete(req);
                    *slots[i].lock().expect("slot lock") = Some(out);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().expect("slot lock").expect("every slot filled"))
            .collect()
    }
}

/// Backend that only serves from cache; any miss is an error.
pub struct CacheOnly {
    pub model_name: String,
    pub params: Value,
}

impl ChatBackend for CacheOnly {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn cache_params(&self) -> Value {
        self.params.clone()
    }

    fn call(&self, req: &Request<'_>) -> Result<Completion> {
        Err(Error::CacheMiss(req.item.key()))
    }
}

/// Backend described by `config`; `sim` parameterizes the simulated kind.
pub fn build_backend(config: &ProviderConfig, sim: &SimulatedAnnotatorParams) -> Result<Box<dyn ChatBackend>> {
    config.validate()?;
    Ok(match config.kind {
        ProviderKind::Simulated => Box::new(SimulatedAnnotator::new(sim.clone())?),
        ProviderKind::HttpChat => Box::new(HttpChat::from_config(config)?),
    })
}
