mod support;

use std::time::Duration;

use eaqa::llm::{BodyStyle, CacheEntry, Client, ClientError, CompletionCache, EndpointConfig, UreqTransport};
use support::*;

/// Each test owns its credential variable so parallel tests never race on it.
fn config(url: &str, env: &str) -> EndpointConfig {
    let mut c = EndpointConfig::new(url, "stub-model", env);
    c.backoff_ms = 1;
    c
}

fn with_key(env: &str) {
    std::env::set_var(env, "secret");
}

#[test]
fn success_is_cached_once() {
    let server = StubServer::start(|_, _| StubReply::Respond(200, completion_body("artifact: oil")));
    let env = "EAQA_T_SUCCESS";
    with_key(env);
    let dir = tempfile::tempdir().unwrap();
    let client = Client::new(config(&server.url, env), UreqTransport, Some(CompletionCache::new(dir.path())));
    assert_eq!(client.complete("prompt").unwrap(), "artifact: oil");
    assert_eq!(client.complete("prompt").unwrap(), "artifact: oil");
    assert_eq!(server.hits(), 1);
    assert_eq!(client.network_calls(), 1);
    assert_eq!(CompletionCache::new(dir.path()).len(), 1);

    let req = &server.requests.lock().unwrap()[0];
    assert_eq!(req.authorization.as_deref(), Some("Bearer secret"));
    let body: serde_json::Value = serde_json::from_str(&req.body).unwrap();
    assert_eq!(body["prompt"], "prompt");
    assert_eq!(body["model"], "stub-model");
}

#[test]
fn auth_failure_names_the_variable() {
    let server = StubServer::start(|_, _| StubReply::Respond(401, "{\"error\":\"bad key\"}".into()));
    let env = "EAQA_T_AUTH";
    with_key(env);
    let client = Client::new(config(&server.url, env), UreqTransport, None);
    let err = client.complete("p").unwrap_err();
    assert!(matches!(err, ClientError::Auth { status: 401, .. }), "{err:?}");
    assert!(err.to_string().contains(env));
    assert_eq!(server.hits(), 1);
}

#[test]
fn rate_limit_is_retried() {
    let server = StubServer::start(|i, _| {
        if i == 0 {
            StubReply::Respond(429, "{}".into())
        } else {
            StubReply::Respond(200, completion_body("done"))
        }
    });
    let env = "EAQA_T_RATE";
    with_key(env);
    let dir = tempfile::tempdir().unwrap();
    let client = Client::new(config(&server.url, env), UreqTransport, Some(CompletionCache::new(dir.path())));
    assert_eq!(client.complete("p").unwrap(), "done");
    assert_eq!(server.hits(), 2);
    assert_eq!(CompletionCache::new(dir.path()).len(), 1);
}

#[test]
fn server_errors_exhaust_retries() {
    let server = StubServer::start(|_, _| StubReply::Respond(503, "{}".into()));
    let env = "EAQA_T_5XX";
    with_key(env);
    let mut cfg = config(&server.url, env);
    cfg.retries = 3;
    let client = Client::new(cfg, UreqTransport, None);
    let err = client.complete("p").unwrap_err();
    assert!(matches!(err, ClientError::Server { status: 503, attempts: 4 }), "{err:?}");
    assert_eq!(server.hits(), 4);
}

#[test]
fn timeouts_are_retried_then_reported() {
    let server = StubServer::start(|_, _| StubReply::Hang(Duration::from_millis(800)));
    let env = "EAQA_T_TIMEOUT";
    with_key(env);
    let mut cfg = config(&server.url, env);
    cfg.timeout_secs = 0.1;
    cfg.retries = 1;
    let client = Client::new(cfg, UreqTransport, None);
    let err = client.complete("p").unwrap_err();
    assert!(matches!(err, ClientError::Timeout { attempts: 2 }), "{err:?}");
    assert_eq!(client.network_calls(), 2);
}

#[test]
fn other_client_errors_are_not_retried() {
    let server = StubServer::start(|_, _| StubReply::Respond(400, "bad request".into()));
    let env = "EAQA_T_400";
    with_key(env);
    let client = Client::new(config(&server.url, env), UreqTransport, None);
    assert!(matches!(client.complete("p"), Err(ClientError::Http { status: 400, .. })));
    assert_eq!(server.hits(), 1);
}

#[test]
fn missing_credential_fails_before_any_request() {
    let server = StubServer::start(|_, _| StubReply::Respond(200, completion_body("x")));
    let env = "EAQA_T_UNSET";
    std::env::remove_var(env);
    let client = Client::new(config(&server.url, env), UreqTransport, None);
    let err = client.complete("p").unwrap_err();
    assert!(matches!(&err, ClientError::MissingCredential { env: e } if e == env), "{err:?}");
    assert_eq!(server.hits(), 0);
}

#[test]
fn cache_hits_need_no_credential_or_network() {
    let dir = tempfile::tempdir().unwrap();
    let env = "EAQA_T_CACHED";
    std::env::remove_var(env);
    let cfg = config("http://127.0.0.1:9/unreachable", env);
    let cache = CompletionCache::new(dir.path());
    cache
        .put(CacheEntry {
            key: cfg.cache_key("p"),
            model: cfg.model.clone(),
            completion: "from cache".into(),
            timestamp: "2024-01-01T00:00:00Z".into(),
        })
        .unwrap();
    let client = Client::new(cfg, UreqTransport, Some(CompletionCache::new(dir.path())));
    assert_eq!(client.complete("p").unwrap(), "from cache");
    assert_eq!(client.network_calls(), 0);
}

#[test]
fn cache_entries_are_never_replaced() {
    let dir = tempfile::tempdir().unwrap();
    let cache = CompletionCache::new(dir.path());
    let entry = |text: &str| CacheEntry {
        key: "ab".repeat(32),
        model: "m".into(),
        completion: text.into(),
        timestamp: "t".into(),
    };
    assert_eq!(cache.put(entry("first")).unwrap().completion, "first");
    assert_eq!(cache.put(entry("second")).unwrap().completion, "first");
    assert_eq!(cache.get(&"ab".repeat(32)).unwrap().unwrap().completion, "first");
    assert_eq!(cache.len(), 1);
}

#[test]
fn cache_key_covers_every_request_setting() {
    let base = EndpointConfig::new("http://x", "m", "K");
    let key = base.cache_key("p");
    assert_eq!(key, base.cache_key("p"));
    assert_ne!(key, base.cache_key("q"));
    let mut other = base.clone();
    other.temperature = 0.7;
    assert_ne!(key, other.cache_key("p"));
    let mut other = base.clone();
    other.model = "n".into();
    assert_ne!(key, other.cache_key("p"));
    let mut other = base.clone();
    other.style = BodyStyle::Chat;
    assert_ne!(key, other.cache_key("p"));
    let mut other = base;
    other.url = "http://elsewhere".into();
    assert_eq!(key, other.cache_key("p"));
}

#[test]
fn chat_style_reads_message_content() {
    let server = StubServer::start(|_, body| {
        let v: serde_json::Value = serde_json::from_str(body).unwrap();
        let echoed = v["messages"][0]["content"].as_str().unwrap().to_uppercase();
        StubReply::Respond(200, serde_json::json!({"choices": [{"message": {"content": echoed}}]}).to_string())
    });
    let env = "EAQA_T_CHAT";
    with_key(env);
    let mut cfg = config(&server.url, env);
    cfg.style = BodyStyle::Chat;
    let client = Client::new(cfg, UreqTransport, None);
    assert_eq!(client.complete("hello").unwrap(), "HELLO");
}

#[test]
fn unreadable_response_is_an_error() {
    let server = StubServer::start(|_, _| StubReply::Respond(200, "{\"choices\": []}".into()));
    let env = "EAQA_T_SHAPE";
    with_key(env);
    let client = Client::new(config(&server.url, env), UreqTransport, None);
    assert!(matches!(client.complete("p"), Err(ClientError::Response(_))));
}
