//! Declarative import profiles for upstream corpus layouts.
//!
//! A profile maps an upstream JSON record onto the canonical document with
//! JSON pointers (RFC 6901), so upstream schema drift is a config edit.

use std::path::Path;

use eaqa_core::{AnnotatedDocument, Ontology};
use regex::Regex;
use serde::Deserialize;
use serde_json::Value;

use crate::corpus_io::{self, ArgRecord, DocRecord, EventRecord};
use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub name: String,
    pub doc_id: String,
    /// Array of sentences.
    pub sentences: String,
    /// Token array within one sentence entry ("" for the entry itself).
    pub sentence_tokens: String,
    /// Token string within one token entry; `None` when entries are strings.
    pub token_text: Option<String>,
    pub events: String,
    pub trigger_start: String,
    pub trigger_end: String,
    pub trigger_end_exclusive: bool,
    pub event_type: String,
    /// Capture group 1 becomes the role name.
    pub role_pattern: Option<String>,
    pub arguments: ArgumentSource,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArgumentSource {
    /// Document-level (trigger, argument, role) links.
    Links {
        path: String,
        trigger_start: String,
        trigger_end: String,
        start: String,
        end: String,
        end_exclusive: bool,
        role: String,
    },
    /// Arguments nested in each event, pointing at an entity table.
    Nested {
        path: String,
        role: String,
        entity_ref: String,
        entities: String,
        entity_id: String,
        start: String,
        end: String,
        end_exclusive: bool,
    },
}

pub const BUILTIN: &[(&str, &str)] = &[
    ("rams", include_str!("../profiles/rams.json")),
    ("wikievents", include_str!("../profiles/wikievents.json")),
];

pub const CANONICAL: &str = "canonical";

impl Profile {
    pub fn builtin(name: &str) -> Option<Profile> {
        BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| serde_json::from_str(text).expect("bundled profiles parse"))
    }

    /// A bundled profile name or a path to a profile JSON file.
    pub fn load(name_or_path: &str) -> Result<Profile> {
        if let Some(p) = Profile::builtin(name_or_path) {
            return Ok(p);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(Error::Config(format!("unknown profile {name_or_path}")));
        }
        serde_json::from_str(&io::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("profile {name_or_path}: {e}")))
    }

    /// Maps one upstream record to the canonical layout.
    pub fn convert(&self, record: &Value) -> std::result::Result<DocRecord, String> {
        let pattern = match &self.role_pattern {
            Some(p) => Some(Regex::new(p).map_err(|e| format!("role_pattern: {e}"))?),
            None => None,
        };
        let role_name = |raw: &str| -> String {
            pattern
                .as_ref()
                .and_then(|re| re.captures(raw))
                .and_then(|c| c.get(1))
                .map_or_else(|| raw.to_string(), |m| m.as_str().to_string())
        };

        let doc_id = match get(record, &self.doc_id)? {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut tokens = Vec::new();
        let mut sentences = Vec::new();
        for (i, sent) in array(record, &self.sentences)?.iter().enumerate() {
            let start = tokens.len();
            let toks = array(sent, &self.sentence_tokens).map_err(|e| format!("sentences[{i}]: {e}"))?;
            for (j, tok) in toks.iter().enumerate() {
                let t = match &self.token_text {
                    Some(p) => get(tok, p),
                    None => Ok(tok),
                };
                let t = t
                    .and_then(|v| v.as_str().ok_or_else(|| "token is not a string".to_string()))
                    .map_err(|e| format!("sentences[{i}] token {j}: {e}"))?;
                tokens.push(t.to_string());
            }
            sentences.push([start, tokens.len()]);
        }

        let inclusive = |end: usize, exclusive: bool| -> std::result::Result<usize, String> {
            if exclusive {
                end.checked_sub(1).ok_or_else(|| "empty span".to_string())
            } else {
                Ok(end)
            }
        };
        let mut events = Vec::new();
        for (e, ev) in array(record, &self.events)?.iter().enumerate() {
            let ctx = |m: String| format!("{}[{e}]: {m}", self.events);
            let ts = index(ev, &self.trigger_start).map_err(ctx)?;
            let te = inclusive(index(ev, &self.trigger_end).map_err(ctx)?, self.trigger_end_exclusive).map_err(ctx)?;
            let event_type = get(ev, &self.event_type)
                .and_then(|v| v.as_str().map(str::to_string).ok_or_else(|| "event type is not a string".into()))
                .map_err(ctx)?;
            let mut arguments = Vec::new();
            if let ArgumentSource::Nested {
                path,
                role,
                entity_ref,
                entities,
                entity_id,
                start,
                end,
                end_exclusive,
            } = &self.arguments
            {
                let table = array(record, entities)?;
                for (a, arg) in array(ev, path).map_err(ctx)?.iter().enumerate() {
                    let actx = |m: String| format!("{}[{e}]{path}[{a}]: {m}", self.events);
                    let r = string(arg, role).map_err(actx)?;
                    let id = get(arg, entity_ref).map_err(actx)?;
                    let ent = table
                        .iter()
                        .find(|ent| get(ent, entity_id).ok() == Some(id))
                        .ok_or_else(|| actx(format!("unknown entity {id}")))?;
                    let s = index(ent, start).map_err(actx)?;
                    let en = inclusive(index(ent, end).map_err(actx)?, *end_exclusive).map_err(actx)?;
                    arguments.push(ArgRecord {
                        role: role_name(&r),
                        start: s,
                        end: en,
                    });
                }
            }
            events.push(EventRecord {
                event_type,
                trigger: [ts, te],
                arguments,
            });
        }

        if let ArgumentSource::Links {
            path,
            trigger_start,
            trigger_end,
            start,
            end,
            end_exclusive,
            role,
        } = &self.arguments
        {
            for (l, link) in array(record, path)?.iter().enumerate() {
                let lctx = |m: String| format!("{path}[{l}]: {m}");
                let ts = index(link, trigger_start).map_err(lctx)?;
                let te = index(link, trigger_end).map_err(lctx)?;
                let s = index(link, start).map_err(lctx)?;
                let en = inclusive(index(link, end).map_err(lctx)?, *end_exclusive).map_err(lctx)?;
                let r = string(link, role).map_err(lctx)?;
                let te = inclusive(te, self.trigger_end_exclusive).map_err(lctx)?;
                let ev = events
                    .iter_mut()
                    .find(|ev| ev.trigger == [ts, te])
                    .ok_or_else(|| lctx(format!("no event with trigger [{ts}, {te}]")))?;
                ev.arguments.push(ArgRecord {
                    role: role_name(&r),
                    start: s,
                    end: en,
                });
            }
        }

        Ok(DocRecord {
            doc_id,
            tokens,
            sentences,
            events,
        })
    }
}

fn get<'v>(v: &'v Value, pointer: &str) -> std::result::Result<&'v Value, String> {
    v.pointer(pointer).ok_or_else(|| format!("missing field {pointer}"))
}

fn array<'v>(v: &'v Value, pointer: &str) -> std::result::Result<&'v Vec<Value>, String> {
    get(v, pointer)?.as_array().ok_or_else(|| format!("{pointer} is not an array"))
}

fn index(v: &Value, pointer: &str) -> std::result::Result<usize, String> {
    get(v, pointer)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| format!("{pointer} is not a token index"))
}

fn string(v: &Value, pointer: &str) -> std::result::Result<String, String> {
    get(v, pointer)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| format!("{pointer} is not a string"))
}

/// Reads a corpus file with the named profile; `canonical` reads the native JSONL.
pub fn read_with_profile(path: &Path, profile: &str, ontology: Option<&Ontology>) -> Result<Vec<AnnotatedDocument>> {
    if profile == CANONICAL {
        return corpus_io::read_corpus(path, ontology);
    }
    let profile = Profile::load(profile)?;
    let text = io::read_to_string(path)?;
    let mut out = Vec::new();
    for (line, raw) in io::lines(&text) {
        let value: Value = io::parse_line(path, line, raw)?;
        let record_err = |message: String| Error::Record {
            path: path.to_path_buf(),
            line,
            message,
        };
        let record = profile.convert(&value).map_err(record_err)?;
        out.push(record.into_document(ontology).map_err(record_err)?);
    }
    Ok(out)
}
