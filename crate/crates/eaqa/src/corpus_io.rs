//! Canonical corpus JSONL, ontology JSON and the coreference sidecar.

use std::collections::BTreeMap;
use std::path::Path;

use eaqa_core::corpus::{resolve_coref_chains, validate_document};
use eaqa_core::{AnnotatedDocument, ArgumentAnnotation, CorefChain, Document, EventInstance, Ontology, Span};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocRecord {
    pub doc_id: String,
    pub tokens: Vec<String>,
    /// Half-open `[start, end)` token ranges.
    pub sentences: Vec<[usize; 2]>,
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub event_type: String,
    /// Inclusive `[start, end]`.
    pub trigger: [usize; 2],
    pub arguments: Vec<ArgRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgRecord {
    pub role: String,
    pub start: usize,
    pub end: usize,
}

impl From<&AnnotatedDocument> for DocRecord {
    fn from(item: &AnnotatedDocument) -> Self {
        let doc = &item.document;
        DocRecord {
            doc_id: doc.doc_id.clone(),
            tokens: doc.tokens.clone(),
            sentences: doc.sentences.iter().map(|r| [r.start, r.end]).collect(),
            events: item
                .events
                .iter()
                .map(|e| EventRecord {
                    event_type: e.event_type.clone(),
                    trigger: [e.trigger.start, e.trigger.end],
                    arguments: e
                        .arguments
                        .iter()
                        .map(|a| ArgRecord {
                            role: a.role.clone(),
                            start: a.span.start,
                            end: a.span.end,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl DocRecord {
    /// Converts and validates; the error names the offending field.
    pub fn into_document(self, ontology: Option<&Ontology>) -> std::result::Result<AnnotatedDocument, String> {
        for (e, ev) in self.events.iter().enumerate() {
            if ev.trigger[0] > ev.trigger[1] {
                return Err(format!("events[{e}].trigger: start {} after end {}", ev.trigger[0], ev.trigger[1]));
            }
            for (a, arg) in ev.arguments.iter().enumerate() {
                if arg.start > arg.end {
                    return Err(format!("events[{e}].arguments[{a}]: start {} after end {}", arg.start, arg.end));
                }
                if arg.end >= self.tokens.len() {
                    return Err(format!(
                        "events[{e}].arguments[{a}].end: {} not below token count {}",
                        arg.end,
                        self.tokens.len()
                    ));
                }
            }
        }
        let document = Document::new(
            self.doc_id,
            self.tokens,
            self.sentences.iter().map(|[s, e]| *s..*e).collect(),
        );
        let events: Vec<EventInstance> = self
            .events
            .into_iter()
            .map(|ev| {
                EventInstance::new(
                    ev.event_type,
                    Span::new(ev.trigger[0], ev.trigger[1]),
                    ev.arguments
                        .into_iter()
                        .map(|a| ArgumentAnnotation::new(a.role, Span::new(a.start, a.end)))
                        .collect(),
                )
            })
            .collect();
        let violations = validate_document(&document, &events, ontology);
        if let Some(v) = violations.first() {
            return Err(v.to_string());
        }
        Ok(AnnotatedDocument::new(document, events))
    }
}

/// Parses canonical JSONL text; `path` only labels errors.
pub fn parse_corpus_str(path: &Path, text: &str, ontology: Option<&Ontology>) -> Result<Vec<AnnotatedDocument>> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line, raw) in io::lines(text) {
        let record: DocRecord = io::parse_line(path, line, raw)?;
        let record_err = |message: String| Error::Record {
            path: path.to_path_buf(),
            line,
            message,
        };
        if !seen.insert(record.doc_id.clone()) {
            return Err(record_err(format!("doc_id: duplicate {}", record.doc_id)));
        }
        out.push(record.into_document(ontology).map_err(record_err)?);
    }
    Ok(out)
}

pub fn read_corpus(path: &Path, ontology: Option<&Ontology>) -> Result<Vec<AnnotatedDocument>> {
    parse_corpus_str(path, &io::read_to_string(path)?, ontology)
}

pub fn corpus_to_string(corpus: &[AnnotatedDocument]) -> String {
    io::to_jsonl(corpus.iter().map(DocRecord::from))
}

pub fn write_corpus(path: &Path, corpus: &[AnnotatedDocument]) -> Result<()> {
    io::write_atomic(path, corpus_to_string(corpus).as_bytes())
}

pub fn parse_ontology_str(text: &str) -> std::result::Result<Ontology, String> {
    let map: BTreeMap<String, Vec<String>> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Ontology::new(map).map_err(|e| e.to_string())
}

pub fn read_ontology(path: &Path) -> Result<Ontology> {
    let text = io::read_to_string(path)?;
    parse_ontology_str(&text).map_err(|m| Error::Data(format!("{}: {m}", path.display())))
}

pub fn ontology_to_string(ontology: &Ontology) -> String {
    let map: BTreeMap<&str, &[String]> = ontology.entries().collect();
    io::to_pretty_json(&map)
}

/// Event types and roles observed in a corpus, in first-seen role order.
pub fn ontology_from_corpus(corpus: &[AnnotatedDocument]) -> Result<Ontology> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for item in corpus {
        for ev in &item.events {
            let roles = map.entry(ev.event_type.clone()).or_default();
            for a in &ev.arguments {
                if !roles.contains(&a.role) {
                    roles.push(a.role.clone());
                }
            }
        }
    }
    map.retain(|_, roles| !roles.is_empty());
    Ontology::new(map).map_err(Error::data)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MentionRecord {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainRecord {
    pub doc_id: String,
    pub chains: Vec<Vec<MentionRecord>>,
}

pub type ChainMap = BTreeMap<String, Vec<CorefChain>>;

/// Reads the sidecar and validates every mention against the corpus.
pub fn read_coref_chains(path: &Path, corpus: &[AnnotatedDocument]) -> Result<ChainMap> {
    let mut raw = Vec::new();
    for (line, rec) in io::read_jsonl::<ChainRecord>(path)? {
        let mut chains = Vec::new();
        for (c, chain) in rec.chains.iter().enumerate() {
            let mut spans = Vec::new();
            for (m, mention) in chain.iter().enumerate() {
                if mention.start > mention.end {
                    return Err(Error::Record {
                        path: path.to_path_buf(),
                        line,
                        message: format!("chains[{c}][{m}]: start after end"),
                    });
                }
                spans.push(Span::new(mention.start, mention.end));
            }
            chains.push(spans);
        }
        raw.push((rec.doc_id, chains));
    }
    resolve_coref_chains(corpus, &raw).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn coref_to_string(chains: &ChainMap) -> String {
    io::to_jsonl(chains.iter().map(|(doc_id, cs)| ChainRecord {
        doc_id: doc_id.clone(),
        chains: cs
            .iter()
            .map(|c| {
                c.mentions
                    .iter()
                    .map(|m| MentionRecord {
                        start: m.span.start,
                        end: m.span.end,
                    })
                    .collect()
            })
            .collect(),
    }))
}
