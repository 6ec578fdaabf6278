//! Documents, event-argument annotations, the event ontology and
//! coreference chains, plus validation and distance statistics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("token index {index} out of range for document {doc_id} with {token_count} tokens")]
    TokenOutOfRange {
        doc_id: String,
        index: usize,
        token_count: usize,
    },
    #[error("token {index} of document {doc_id} is not covered by any sentence")]
    Uncovered { doc_id: String, index: usize },
    #[error("invalid ontology: {0}")]
    Ontology(String),
    #[error("coreference chain for unknown document {0}")]
    UnknownDocument(String),
    #[error("coreference mention {span} outside document {doc_id}")]
    MentionOutOfBounds { doc_id: String, span: Span },
    #[error("empty coreference chain in document {0}")]
    EmptyChain(String),
}

/// A tokenized document with its sentence partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<String>,
    /// Half-open token ranges, one per sentence.
    pub sentences: Vec<Range<usize>>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, tokens: Vec<String>, sentences: Vec<Range<usize>>) -> Self {
        Document {
            doc_id: doc_id.into(),
            tokens,
            sentences,
        }
    }

    /// Builds a document from pre-split sentences.
    pub fn from_sentences<S: AsRef<str>>(doc_id: impl Into<String>, sentences: &[Vec<S>]) -> Self {
        let mut tokens = Vec::new();
        let mut ranges = Vec::with_capacity(sentences.len());
        for sentence in sentences {
            let start = tokens.len();
            tokens.extend(sentence.iter().map(|t| t.as_ref().to_string()));
            ranges.push(start..tokens.len());
        }
        Document::new(doc_id, tokens, ranges)
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Tokens of `span`, which must fit the document.
    pub fn span_tokens(&self, span: Span) -> &[String] {
        &self.tokens[span.to_range()]
    }

    /// Space-joined surface text of `span`.
    pub fn span_text(&self, span: Span) -> String {
        self.span_tokens(span).join(" ")
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    /// Index of the sentence containing `token_index`.
    pub fn sentence_of(&self, token_index: usize) -> Result<usize, CorpusError> {
        if token_index >= self.tokens.len() {
            return Err(CorpusError::TokenOutOfRange {
                doc_id: self.doc_id.clone(),
                index: token_index,
                token_count: self.tokens.len(),
            });
        }
        let candidate = self
            .sentences
            .partition_point(|range| range.start <= token_index);
        match candidate.checked_sub(1) {
            Some(i) if self.sentences[i].contains(&token_index) => Ok(i),
            _ => Err(CorpusError::Uncovered {
                doc_id: self.doc_id.clone(),
                index: token_index,
            }),
        }
    }

    /// Signed sentence distance from `anchor` to `target` (target minus anchor).
    pub fn span_distance(&self, anchor: Span, target: Span) -> Result<i64, CorpusError> {
        let from = self.sentence_of(anchor.start)?;
        let to = self.sentence_of(target.start)?;
        Ok(to as i64 - from as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArgumentAnnotation {
    pub role: String,
    pub span: Span,
}

impl ArgumentAnnotation {
    pub fn new(role: impl Into<String>, span: Span) -> Self {
        ArgumentAnnotation {
            role: role.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventInstance {
    pub event_type: String,
    pub trigger: Span,
    pub arguments: Vec<ArgumentAnnotation>,
}

impl EventInstance {
    pub fn new(event_type: impl Into<String>, trigger: Span, arguments: Vec<ArgumentAnnotation>) -> Self {
        EventInstance {
            event_type: event_type.into(),
            trigger,
            arguments,
        }
    }

    /// Gold spans for `role` in annotation order.
    pub fn spans_for<'a>(&'a self, role: &'a str) -> impl Iterator<Item = Span> + 'a {
        self.arguments
            .iter()
            .filter(move |a| a.role == role)
            .map(|a| a.span)
    }
}

/// A document together with its event annotations; the unit every corpus file holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub document: Document,
    pub events: Vec<EventInstance>,
}

impl AnnotatedDocument {
    pub fn new(document: Document, events: Vec<EventInstance>) -> Self {
        AnnotatedDocument { document, events }
    }

    pub fn doc_id(&self) -> &str {
        &self.document.doc_id
    }

    pub fn argument_distance(&self, event: usize, argument: usize) -> Result<i64, CorpusError> {
        let ev = &self.events[event];
        argument_distance(&self.document, ev, &ev.arguments[argument])
    }

    pub fn validate(&self, ontology: Option<&Ontology>) -> Vec<Violation> {
        validate_document(&self.document, &self.events, ontology)
    }
}

/// Sentence index of the argument's first token minus that of the trigger's.
/// Zero means intra-sentential.
pub fn argument_distance(
    doc: &Document,
    event: &EventInstance,
    arg: &ArgumentAnnotation,
) -> Result<i64, CorpusError> {
    doc.span_distance(event.trigger, arg.span)
}

/// Event type to ordered role list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ontology {
    roles: BTreeMap<String, Vec<String>>,
}

impl Ontology {
    pub fn new(roles: BTreeMap<String, Vec<String>>) -> Result<Self, CorpusError> {
        for (event_type, list) in &roles {
            if event_type.is_empty() {
                return Err(CorpusError::Ontology("empty event type".into()));
            }
            if list.is_empty() {
                return Err(CorpusError::Ontology(format!("{event_type} has no roles")));
            }
            let mut seen = BTreeSet::new();
            for role in list {
                if role.is_empty() {
                    return Err(CorpusError::Ontology(format!("{event_type} has an empty role")));
                }
                if !seen.insert(role.as_str()) {
                    return Err(CorpusError::Ontology(format!(
                        "{event_type} lists role {role} twice"
                    )));
                }
            }
        }
        Ok(Ontology { roles })
    }

    pub fn roles_for(&self, event_type: &str) -> Option<&[String]> {
        self.roles.get(event_type).map(Vec::as_slice)
    }

    pub fn event_types(&self) -> impl Iterator<Item = &str> {
        self.roles.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.roles.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn event_type_count(&self) -> usize {
        self.roles.len()
    }

    /// Distinct role names across all event types, sorted.
    pub fn all_roles(&self) -> BTreeSet<&str> {
        self.roles
            .values()
            .flat_map(|v| v.iter().map(String::as_str))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub span: Span,
    pub text: String,
}

/// One coreference chain, produced by an external resolver and read as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefChain {
    pub doc_id: String,
    pub mentions: Vec<Mention>,
}

impl CorefChain {
    /// Validates spans against `doc` and caches mention text.
    pub fn resolve(doc: &Document, spans: &[Span]) -> Result<Self, CorpusError> {
        if spans.is_empty() {
            return Err(CorpusError::EmptyChain(doc.doc_id.clone()));
        }
        let mut mentions = Vec::with_capacity(spans.len());
        for &span in spans {
            if !span.fits(doc.token_count()) {
                return Err(CorpusError::MentionOutOfBounds {
                    doc_id: doc.doc_id.clone(),
                    span,
                });
            }
            mentions.push(Mention {
                span,
                text: doc.span_text(span),
            });
        }
        Ok(CorefChain {
            doc_id: doc.doc_id.clone(),
            mentions,
        })
    }

    pub fn contains_span(&self, span: Span) -> bool {
        self.mentions.iter().any(|m| m.span == span)
    }
}

/// Builds the per-document chain map from raw span lists, validating every
/// chain against the corpus.
pub fn resolve_coref_chains(
    corpus: &[AnnotatedDocument],
    raw: &[(String, Vec<Vec<Span>>)],
) -> Result<BTreeMap<String, Vec<CorefChain>>, CorpusError> {
    let by_id: BTreeMap<&str, &Document> =
        corpus.iter().map(|d| (d.doc_id(), &d.document)).collect();
    let mut out: BTreeMap<String, Vec<CorefChain>> = BTreeMap::new();
    for (doc_id, chains) in raw {
        let doc = by_id
            .get(doc_id.as_str())
            .ok_or_else(|| CorpusError::UnknownDocument(doc_id.clone()))?;
        let entry = out.entry(doc_id.clone()).or_default();
        for spans in chains {
            entry.push(CorefChain::resolve(doc, spans)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    EmptyTokens,
    EmptySentence,
    SentenceOrder,
    SentenceCoverage,
    SpanOutOfBounds,
    UnknownEventType,
    RoleNotInOntology,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::EmptyTokens => "non-empty tokens",
            ViolationKind::EmptySentence => "non-empty sentence",
            ViolationKind::SentenceOrder => "sentence order",
            ViolationKind::SentenceCoverage => "sentence coverage",
            ViolationKind::SpanOutOfBounds => "span bounds",
            ViolationKind::UnknownEventType => "event type in ontology",
            ViolationKind::RoleNotInOntology => "role not in ontology",
        }
    }
}

impl core::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One broken invariant and where it was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.kind, self.location)
    }
}

/// Checks every document, span and ontology invariant. An empty result means
/// the document is well formed.
pub fn validate_document(
    doc: &Document,
    events: &[EventInstance],
    ontology: Option<&Ontology>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, location: String| out.push(Violation { kind, location });
    let n = doc.token_count();
    let id = &doc.doc_id;
    if n == 0 {
        push(ViolationKind::EmptyTokens, format!("{id}"));
    }

    let mut cursor = 0usize;
    for (i, range) in doc.sentences.iter().enumerate() {
        if range.start >= range.end {
            push(
                ViolationKind::EmptySentence,
                format!("{id} sentence {i} [{}, {})", range.start, range.end),
            );
            continue;
        }
        if range.start > cursor {
            push(
                ViolationKind::SentenceCoverage,
                format!("{id} tokens [{cursor}, {}) before sentence {i}", range.start),
            );
        } else if range.start < cursor {
            push(
                ViolationKind::SentenceOrder,
                format!("{id} sentence {i} starts at {} before {cursor}", range.start),
            );
        }
        cursor = cursor.max(range.end);
    }
    if cursor < n {
        push(
            ViolationKind::SentenceCoverage,
            format!("{id} tokens [{cursor}, {n}) after last sentence"),
        );
    } else if cursor > n {
        push(
            ViolationKind::SpanOutOfBounds,
            format!("{id} sentences reach token {cursor} of {n}"),
        );
    }

    for (e, event) in events.iter().enumerate() {
        if !event.trigger.fits(n) {
            push(
                ViolationKind::SpanOutOfBounds,
                format!("{id} event {e} trigger {}", event.trigger),
            );
        }
        let roles = ontology.map(|o| o.roles_for(&event.event_type));
        if let Some(None) = roles {
            push(
                ViolationKind::UnknownEventType,
                format!("{id} event {e} type {}", event.event_type),
            );
        }
        for (a, arg) in event.arguments.iter().enumerate() {
            if !arg.span.fits(n) {
                push(
                    ViolationKind::SpanOutOfBounds,
                    format!("{id} event {e} argument {a} ({}) {}", arg.role, arg.span),
                );
            }
            if let Some(Some(list)) = roles {
                if !list.iter().any(|r| *r == arg.role) {
                    push(
                        ViolationKind::RoleNotInOntology,
                        format!(
                            "{id} event {e} argument {a}: {} not a role of {}",
                            arg.role, event.event_type
                        ),
                    );
                }
            }
        }
    }
    out
}

/// Distance window used by the per-distance analyses (sentences before/after the trigger).
pub const ANALYSIS_WINDOW: i64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub documents: usize,
    pub events: usize,
    pub arguments: usize,
    pub event_types: usize,
    pub role_types: usize,
    /// Ontology sizes, when an ontology was supplied.
    pub ontology_event_types: Option<usize>,
    pub ontology_roles: Option<usize>,
    pub by_distance: BTreeMap<i64, usize>,
    pub intra_sentential: usize,
    pub inter_sentential: usize,
    /// Arguments whose distance falls outside `-ANALYSIS_WINDOW..=ANALYSIS_WINDOW`.
    pub outside_analysis_window: usize,
}

/// Aggregate counts over a corpus. Arguments whose spans cannot be placed in
/// a sentence are skipped; validate first to surface them.
pub fn corpus_stats(corpus: &[AnnotatedDocument], ontology: Option<&Ontology>) -> CorpusStats {
    let mut stats = CorpusStats {
        documents: corpus.len(),
        ontology_event_types: ontology.map(Ontology::event_type_count),
        ontology_roles: ontology.map(|o| o.all_roles().len()),
        ..CorpusStats::default()
    };
    let mut types = BTreeSet::new();
    let mut roles = BTreeSet::new();
    for item in corpus {
        for event in &item.events {
            stats.events += 1;
            types.insert(event.event_type.as_str());
            for arg in &event.arguments {
                roles.insert(arg.role.as_str());
                let Ok(d) = argument_distance(&item.document, event, arg) else {
                    continue;
                };
                stats.arguments += 1;
                *stats.by_distance.entry(d).or_default() += 1;
                if d == 0 {
                    stats.intra_sentential += 1;
                } else {
                    stats.inter_sentential += 1;
                }
                if d.abs() > ANALYSIS_WINDOW {
                    stats.outside_analysis_window += 1;
                }
            }
        }
    }
    stats.event_types = types.len();
    stats.role_types = roles.len();
    stats
}

/// An argument whose distance lies outside the analysis window. Such
/// arguments are reported, never removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceFlag {
    pub doc_id: String,
    pub event_index: usize,
    pub argument_index: usize,
    pub distance: i64,
}

pub fn flag_distances(corpus: &[AnnotatedDocument], window: i64) -> Vec<DistanceFlag> {
    let mut out = Vec::new();
    for item in corpus {
        for (e, event) in item.events.iter().enumerate() {
            for (a, arg) in event.arguments.iter().enumerate() {
                if let Ok(d) = argument_distance(&item.document, event, arg) {
                    if d.abs() > window {
                        out.push(DistanceFlag {
                            doc_id: item.doc_id().to_string(),
                            event_index: e,
                            argument_index: a,
                            distance: d,
                        });
                    }
                }
            }
        }
    }
    out
}
