//! Completion endpoint client with retries and an on-disk response cache.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::io::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BodyStyle {
    /// `{model, prompt, ...}` answered by `choices[0].text`.
    #[default]
    Completion,
    /// `{model, messages: [{role: user, content}], ...}` answered by
    /// `choices[0].message.content`.
    Chat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Environment variable holding the bearer credential.
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Retries after the first attempt.
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub style: BodyStyle,
    /// JSON pointer to the completion text; overrides the style default.
    #[serde(default)]
    pub response_pointer: Option<String>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_max_tokens() -> u32 {
    256
}
fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    2
}
fn default_backoff() -> u64 {
    1000
}
fn default_in_flight() -> usize {
    4
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>, api_key_env: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            model: model.into(),
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            api_key_env: api_key_env.into(),
            timeout_secs: default_timeout(),
            retries: default_retries(),
            backoff_ms: default_backoff(),
            style: BodyStyle::Completion,
            response_pointer: None,
            max_in_flight: default_in_flight(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.timeout_secs > 0.0) {
            return Err(format!("timeout_secs must be positive, got {}", self.timeout_secs));
        }
        if self.api_key_env.is_empty() {
            return Err("api_key_env is empty".into());
        }
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        Ok(())
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        match self.style {
            BodyStyle::Completion => json!({
                "model": self.model,
                "prompt": prompt,
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            }),
            BodyStyle::Chat => json!({
                "model": self.model,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            }),
        }
    }

    fn response_pointer(&self) -> &str {
        match (&self.response_pointer, self.style) {
            (Some(p), _) => p,
            (None, BodyStyle::Completion) => "/choices/0/text",
            (None, BodyStyle::Chat) => "/choices/0/message/content",
        }
    }

    /// Digest of everything that determines the completion.
    pub fn cache_key(&self, prompt: &str) -> String {
        let material = json!({
            "model": self.model,
            "style": self.style,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "prompt": prompt,
        });
        sha256_hex(material.to_string().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("transport: {0}")]
    Other(String),
}

pub trait Transport: Send + Sync {
    fn post(
        &self,
        url: &str,
        headers: &[(&str, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportError>;
}

/// Blocking HTTP over `ureq`.
#[derive(Debug, Default)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post(
        &self,
        url: &str,
        headers: &[(&str, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportError> {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        let mut req = agent.post(url);
        for (k, v) in headers {
            req = req.set(k, v);
        }
        let read = |resp: ureq::Response| {
            let status = resp.status();
            let body = resp.into_string().map_err(|e| TransportError::Other(e.to_string()))?;
            Ok(HttpResponse { status, body })
        };
        match req.send_string(body) {
            Ok(resp) => read(resp),
            Err(ureq::Error::Status(_, resp)) => read(resp),
            Err(ureq::Error::Transport(t)) => {
                let timed_out = std::error::Error::source(&t)
                    .and_then(|s| s.downcast_ref::<std::io::Error>())
                    .is_some_and(|e| matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock));
                if timed_out {
                    Err(TransportError::Timeout)
                } else {
                    Err(TransportError::Other(t.to_string()))
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("credential variable {env} is not set")]
    MissingCredential { env: String },
    #[error("authentication rejected (HTTP {status}); check {env}")]
    Auth { status: u16, env: String },
    #[error("rate limited (HTTP {status}) after {attempts} attempts")]
    RateLimit { status: u16, attempts: u32 },
    #[error("timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("server error (HTTP {status}) after {attempts} attempts")]
    Server { status: u16, attempts: u32 },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unreadable response: {0}")]
    Response(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("cache {path}: {message}")]
    Cache { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model: String,
    pub completion: String,
    pub timestamp: String,
}

/// Content-addressed completion store. Entries are created once and never
/// replaced, so every reader of a key sees the same text.
#[derive(Debug, Clone)]
pub struct CompletionCache {
    dir: PathBuf,
}

impl CompletionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CompletionCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    fn err(&self, path: &Path, e: impl std::fmt::Display) -> ClientError {
        ClientError::Cache {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn get(&self, key: &str) -> Result<Option<CacheEntry>, ClientError> {
        let path = self.path(key);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map(Some).map_err(|e| self.err(&path, e)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(self.err(&path, e)),
        }
    }

    /// Stores `entry` unless the key exists; returns the entry now on disk.
    pub fn put(&self, entry: CacheEntry) -> Result<CacheEntry, ClientError> {
        let path = self.path(&entry.key);
        let dir = path.parent().expect("cache paths have a parent");
        fs::create_dir_all(dir).map_err(|e| self.err(dir, e))?;
        let tmp = dir.join(format!(
            ".{}.{}.{:?}.tmp",
            entry.key,
            std::process::id(),
            std::thread::current().id()
        ));
        let bytes = serde_json::to_vec_pretty(&entry).expect("entry serializes");
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()
        };
        write().map_err(|e| self.err(&tmp, e))?;
        let linked = fs::hard_link(&tmp, &path);
        let _ = fs::remove_file(&tmp);
        match linked {
            Ok(()) => Ok(entry),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                self.get(&entry.key)?.ok_or_else(|| self.err(&path, "entry vanished"))
            }
            Err(e) => Err(self.err(&path, e)),
        }
    }

    pub fn len(&self) -> usize {
        let Ok(shards) = fs::read_dir(&self.dir) else {
            return 0;
        };
        shards
            .flatten()
            .filter_map(|s| fs::read_dir(s.path()).ok())
            .flat_map(|d| d.flatten())
            .filter(|f| f.path().extension().is_some_and(|x| x == "json"))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct Client<T: Transport = UreqTransport> {
    pub config: EndpointConfig,
    transport: T,
    cache: Option<CompletionCache>,
    network_calls: AtomicUsize,
}

impl<T: Transport> Client<T> {
    pub fn new(config: EndpointConfig, transport: T, cache: Option<CompletionCache>) -> Self {
        Client {
            config,
            transport,
            cache,
            network_calls: AtomicUsize::new(0),
        }
    }

    /// HTTP requests sent so far, retries included.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    /// Cached text on a key hit; otherwise a request with retries on
    /// 429, 5xx and timeouts.
    pub fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let key = self.config.cache_key(prompt);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&key)? {
                tracing::debug!(stage = "llm", key = %key, "cache hit");
                return Ok(hit.completion);
            }
        }
        let env = &self.config.api_key_env;
        let credential = std::env::var(env)
            .ok()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| ClientError::MissingCredential { env: env.clone() })?;
        let body = self.config.request_body(prompt).to_string();
        let headers = [
            ("Authorization", format!("Bearer {credential}")),
            ("Content-Type", "application/json".to_string()),
        ];
        let timeout = Duration::from_secs_f64(self.config.timeout_secs);
        let attempts = self.config.retries + 1;
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                let wait = self.config.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(wait));
            }
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            let outcome = self.transport.post(&self.config.url, &headers, &body, timeout);
            let transient = match outcome {
                Ok(resp) if (200..300).contains(&resp.status) => {
                    let text = self.extract(&resp.body)?;
                    return self.store(key, text);
                }
                Ok(resp) if resp.status == 401 || resp.status == 403 => {
                    return Err(ClientError::Auth {
                        status: resp.status,
                        env: env.clone(),
                    })
                }
                Ok(resp) if resp.status == 429 => ClientError::RateLimit {
                    status: 429,
                    attempts,
                },
                Ok(resp) if resp.status >= 500 => ClientError::Server {
                    status: resp.status,
                    attempts,
                },
                Ok(resp) => {
                    return Err(ClientError::Http {
                        status: resp.status,
                        body: resp.body,
                    })
                }
                Err(TransportError::Timeout) => ClientError::Timeout { attempts },
                Err(TransportError::Other(m)) => return Err(ClientError::Transport(m)),
            };
            tracing::warn!(stage = "llm", attempt = attempt + 1, error = %transient, "transient failure");
            last = Some(transient);
        }
        Err(last.expect("at least one attempt"))
    }

    fn extract(&self, body: &str) -> Result<String, ClientError> {
        let v: Value = serde_json::from_str(body).map_err(|e| ClientError::Response(e.to_string()))?;
        let pointer = self.config.response_pointer();
        v.pointer(pointer)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Response(format!("no string at {pointer}")))
    }

    fn store(&self, key: String, text: String) -> Result<String, ClientError> {
        match &self.cache {
            Some(cache) => cache
                .put(CacheEntry {
                    key,
                    model: self.config.model.clone(),
                    completion: text,
                    timestamp: chrono::Utc::now().to_rfc3339(),
                })
                .map(|e| e.completion),
            None => Ok(text),
        }
    }
}
