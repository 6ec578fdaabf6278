//! Random corpora, predictions and fixture loaders shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use eaqa::corpus_io;
use eaqa_core::scoring::PredictionRecord;
use eaqa_core::{AnnotatedDocument, ArgumentAnnotation, Document, EventInstance, Ontology, Span};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const VOCAB: &[&str] = &[
    "the", "army", "city", "said", "oil", "men", "to", "of", "river", "bank", "aid", "talks",
];

pub const SYSTEM: &str = "sys";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn fixture_ontology() -> Ontology {
    corpus_io::read_ontology(&fixture("ontology.json")).expect("fixture ontology")
}

pub fn fixture_corpus() -> Vec<AnnotatedDocument> {
    let ontology = fixture_ontology();
    corpus_io::read_corpus(&fixture("corpus.jsonl"), Some(&ontology)).expect("fixture corpus")
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Two event types over five roles, sharing `r2`.
pub fn random_ontology() -> Ontology {
    let mut roles = BTreeMap::new();
    roles.insert("t0".to_string(), vec!["r0".into(), "r1".into(), "r2".into()]);
    roles.insert("t1".to_string(), vec!["r2".into(), "r3".into(), "r4".into()]);
    Ontology::new(roles).expect("ontology")
}

fn free(occupied: &[bool], span: Span) -> bool {
    span.to_range().all(|i| !occupied[i])
}

fn take(occupied: &mut [bool], span: Span) {
    for i in span.to_range() {
        occupied[i] = true;
    }
}

/// A span of `len` tokens inside `sentence`, clear of every annotation so far.
fn place(
    rng: &mut StdRng,
    doc: &Document,
    occupied: &[bool],
    sentence: usize,
    len: usize,
) -> Option<Span> {
    let range = doc.sentences[sentence].clone();
    if range.len() < len {
        return None;
    }
    for _ in 0..8 {
        let start = rng.gen_range(range.start..=range.end - len);
        let span = Span::new(start, start + len - 1);
        if free(occupied, span) {
            return Some(span);
        }
    }
    None
}

/// A small document whose annotations are pairwise disjoint. Roughly half
/// of the arguments share their trigger's sentence; some roles get two
/// arguments.
pub fn random_document(rng: &mut StdRng, doc_id: &str, ontology: &Ontology) -> AnnotatedDocument {
    let sentence_count = rng.gen_range(1..=5);
    let sentences: Vec<Vec<String>> = (0..sentence_count)
        .map(|_| {
            let n = rng.gen_range(3..=8);
            let mut s: Vec<String> = (0..n - 1)
                .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string())
                .collect();
            s.push(".".into());
            s
        })
        .collect();
    let document = Document::from_sentences(doc_id, &sentences);
    let mut occupied = vec![false; document.token_count()];
    let types: Vec<&str> = ontology.event_types().collect();
    let mut events = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let event_type = types[rng.gen_range(0..types.len())];
        let home = rng.gen_range(0..sentence_count);
        let trigger_len = if rng.gen_bool(0.2) { 2 } else { 1 };
        let Some(trigger) = place(rng, &document, &occupied, home, trigger_len) else {
            continue;
        };
        take(&mut occupied, trigger);
        let mut arguments = Vec::new();
        for role in ontology.roles_for(event_type).unwrap_or(&[]) {
            if !rng.gen_bool(0.6) {
                continue;
            }
            let copies = if rng.gen_bool(0.15) { 2 } else { 1 };
            for _ in 0..copies {
                let sentence = if rng.gen_bool(0.5) {
                    home
                } else {
                    rng.gen_range(0..sentence_count)
                };
                let len = rng.gen_range(1..=3);
                if let Some(span) = place(rng, &document, &occupied, sentence, len) {
                    take(&mut occupied, span);
                    arguments.push(ArgumentAnnotation::new(role.clone(), span));
                }
            }
        }
        events.push(EventInstance::new(event_type, trigger, arguments));
    }
    AnnotatedDocument::new(document, events)
}

pub fn random_corpus(rng: &mut StdRng, max_docs: usize, prefix: &str, ontology: &Ontology) -> Vec<AnnotatedDocument> {
    let n = rng.gen_range(1..=max_docs);
    (0..n)
        .map(|i| random_document(rng, &format!("{prefix}{i}"), ontology))
        .collect()
}

fn random_span(rng: &mut StdRng, token_count: usize) -> Span {
    let start = rng.gen_range(0..token_count);
    let end = (start + rng.gen_range(0..3)).min(token_count - 1);
    Span::new(start, end)
}

/// At most one prediction per (doc, event, role): skipped, abstained, a gold
/// span, a span overlapping gold, or a random span. Roles outside the event
/// type are predicted now and then.
pub fn random_predictions(rng: &mut StdRng, gold: &[AnnotatedDocument], ontology: &Ontology) -> Vec<PredictionRecord> {
    let all_roles: Vec<&str> = ontology.all_roles().into_iter().collect();
    let mut out = Vec::new();
    for item in gold {
        let n = item.document.token_count();
        for (e, event) in item.events.iter().enumerate() {
            let mut roles: Vec<&str> = ontology
                .roles_for(&event.event_type)
                .unwrap_or(&[])
                .iter()
                .map(String::as_str)
                .collect();
            if rng.gen_bool(0.2) {
                let extra = all_roles[rng.gen_range(0..all_roles.len())];
                if !roles.contains(&extra) {
                    roles.push(extra);
                }
            }
            for role in roles {
                let golds: Vec<Span> = event.spans_for(role).collect();
                let span = match rng.gen_range(0..5) {
                    0 => continue,
                    1 => None,
                    2 if !golds.is_empty() => Some(golds[rng.gen_range(0..golds.len())]),
                    3 if !golds.is_empty() => {
                        let g = golds[rng.gen_range(0..golds.len())];
                        Some(Span::new(g.start, (g.end + 1).min(n - 1)))
                    }
                    _ => Some(random_span(rng, n)),
                };
                out.push(PredictionRecord::new(item.doc_id(), e, role, span, SYSTEM));
            }
        }
    }
    out
}

/// Every gold argument as a prediction; the first argument per role only,
/// matching the one-prediction-per-role rule.
pub fn gold_oracle(gold: &[AnnotatedDocument]) -> Vec<PredictionRecord> {
    let mut out = Vec::new();
    for item in gold {
        for (e, event) in item.events.iter().enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for arg in &event.arguments {
                if seen.insert(arg.role.as_str()) {
                    out.push(PredictionRecord::new(item.doc_id(), e, &arg.role, Some(arg.span), SYSTEM));
                }
            }
        }
    }
    out
}

/// Gold with every role holding one argument, so the oracle can reach F1 = 1.
pub fn single_instance(mut gold: Vec<AnnotatedDocument>) -> Vec<AnnotatedDocument> {
    for item in &mut gold {
        for event in &mut item.events {
            let mut seen = std::collections::BTreeSet::new();
            event.arguments.retain(|a| seen.insert(a.role.clone()));
        }
    }
    gold
}

/// What the stub endpoint does with one request.
pub enum StubReply {
    Respond(u16, String),
    /// Hold the connection open without answering.
    Hang(std::time::Duration),
}

#[derive(Debug, Clone)]
pub struct StubRequest {
    pub authorization: Option<String>,
    pub body: String,
}

/// A local HTTP endpoint answering POSTs through a closure that sees the
/// zero-based request number and the request body.
pub struct StubServer {
    pub url: String,
    pub requests: std::sync::Arc<std::sync::Mutex<Vec<StubRequest>>>,
}

impl StubServer {
    pub fn start<F>(respond: F) -> StubServer
    where
        F: Fn(usize, &str) -> StubReply + Send + Sync + 'static,
    {
        use std::io::{BufRead, BufReader, Read, Write};
        use std::sync::{Arc, Mutex};

        let listener = std::net::TcpListener::bind("127.0.0.1:0").expect("bind stub");
        let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
        let requests: Arc<Mutex<Vec<StubRequest>>> = Arc::default();
        let log = Arc::clone(&requests);
        let respond = Arc::new(respond);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let log = Arc::clone(&log);
                let respond = Arc::clone(&respond);
                std::thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
                    let mut length = 0usize;
                    let mut authorization = None;
                    loop {
                        let mut line = String::new();
                        if reader.read_line(&mut line).unwrap_or(0) == 0 {
                            return;
                        }
                        let line = line.trim_end();
                        if line.is_empty() {
                            break;
                        }
                        if let Some((k, v)) = line.split_once(':') {
                            let v = v.trim().to_string();
                            match k.to_ascii_lowercase().as_str() {
                                "content-length" => length = v.parse().unwrap_or(0),
                                "authorization" => authorization = Some(v),
                                _ => {}
                            }
                        }
                    }
                    let mut body = vec![0u8; length];
                    if reader.read_exact(&mut body).is_err() {
                        return;
                    }
                    let body = String::from_utf8_lossy(&body).into_owned();
                    let index = {
                        let mut log = log.lock().unwrap();
                        log.push(StubRequest {
                            authorization,
                            body: body.clone(),
                        });
                        log.len() - 1
                    };
                    match respond(index, &body) {
                        StubReply::Respond(status, text) => {
                            let head = format!(
                                "HTTP/1.1 {status} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                                text.len()
                            );
                            let _ = stream.write_all(head.as_bytes());
                            let _ = stream.write_all(text.as_bytes());
                        }
                        StubReply::Hang(d) => std::thread::sleep(d),
                    }
                });
            }
        });
        StubServer { url, requests }
    }

    pub fn hits(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

/// A completion-style response body carrying `text`.
pub fn completion_body(text: &str) -> String {
    serde_json::json!({ "choices": [{ "text": text }] }).to_string()
}

/// The prompt inside a completion-style request body.
pub fn prompt_of(body: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(body).expect("request json");
    v["prompt"].as_str().unwrap_or_default().to_string()
}
