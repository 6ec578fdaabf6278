//! Training-data augmentation that turns intra-sentential arguments into
//! inter-sentential ones.
//!
//! Three families:
//! - swapping: move the argument tokens (simple) or a templated sentence
//!   stating the argument (verbose) to a sentence boundary;
//! - coreference: relocate the annotation to another mention of the same
//!   entity, leaving the text untouched;
//! - paraphrase alignment: re-anchor every annotation in externally
//!   paraphrased text.
//!
//! Grammaticality of the output is not a goal.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

use crate::corpus::{AnnotatedDocument, CorefChain, CorpusError, Document, EventInstance};
use crate::rng::SeededRng;
use crate::span::Span;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("event {event} argument {argument} does not exist in {doc_id}")]
    NoSuchArgument {
        doc_id: String,
        event: usize,
        argument: usize,
    },
    #[error("argument is already inter-sentential (distance {0})")]
    NotIntraSentential(i64),
    #[error("argument {0} overlaps the trigger")]
    OverlapsTrigger(Span),
    #[error("argument {0} spans a sentence boundary")]
    CrossesSentence(Span),
    #[error("argument {moved} partially overlaps annotation {other}")]
    OverlapsAnnotation { moved: Span, other: Span },
    #[error("no admissible boundary position")]
    NoCandidatePosition,
    #[error("no coreference chain contains argument {0}")]
    NoChain(Span),
    #[error("coreference chain for {0} has no mention besides the argument")]
    SingleMentionChain(Span),
    #[error("paraphrase text is empty")]
    EmptyParaphrase,
    #[error("sentence {0} does not exist")]
    NoSuchSentence(usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AugmentMethod {
    SimpleSwap,
    VerboseSwap,
    CorefRandom,
    CorefMeaningful,
    ParaSentence,
    ParaDocument,
}

impl AugmentMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AugmentMethod::SimpleSwap => "swap",
            AugmentMethod::VerboseSwap => "verbose-swap",
            AugmentMethod::CorefRandom => "coref-random",
            AugmentMethod::CorefMeaningful => "coref-meaningful",
            AugmentMethod::ParaSentence => "para-sentence",
            AugmentMethod::ParaDocument => "para-document",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            AugmentMethod::SimpleSwap,
            AugmentMethod::VerboseSwap,
            AugmentMethod::CorefRandom,
            AugmentMethod::CorefMeaningful,
            AugmentMethod::ParaSentence,
            AugmentMethod::ParaDocument,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
    }
}

impl core::fmt::Display for AugmentMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Distance bookkeeping for one relocated argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovedArgument {
    pub event_index: usize,
    pub argument_index: usize,
    pub role: String,
    pub original_distance: i64,
    pub new_distance: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub method: AugmentMethod,
    pub source_doc_id: String,
    pub seed: Option<u64>,
    pub moved: Vec<MovedArgument>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedInstance {
    pub item: AnnotatedDocument,
    pub provenance: Provenance,
    /// Non-fatal remarks, e.g. alignment collisions.
    pub notes: Vec<String>,
}

/// A sentence boundary: index `i` is the gap before sentence `i`, and index
/// `S` (the sentence count) is the document end. The end of sentence `i` and
/// the start of sentence `i + 1` are the same position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryPosition(pub usize);

impl BoundaryPosition {
    /// Token index at which material is inserted.
    pub fn token_index(self, doc: &Document) -> usize {
        doc.sentences
            .get(self.0)
            .map(|r| r.start)
            .unwrap_or(doc.token_count())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwapOptions {
    /// Keep only boundaries that leave the argument in a different sentence
    /// than its trigger.
    pub strict_inter: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SwapKind {
    Simple,
    Verbose,
}

fn locate(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
) -> Result<(&EventInstance, Span), AugmentError> {
    item.events
        .get(event)
        .and_then(|ev| ev.arguments.get(argument).map(|a| (ev, a.span)))
        .ok_or_else(|| AugmentError::NoSuchArgument {
            doc_id: item.doc_id().to_string(),
            event,
            argument,
        })
}

fn all_spans(item: &AnnotatedDocument) -> impl Iterator<Item = Span> + '_ {
    item.events
        .iter()
        .flat_map(|ev| core::iter::once(ev.trigger).chain(ev.arguments.iter().map(|a| a.span)))
}

/// Checks that an argument can be swapped; returns the sentence holding it.
fn check_swappable(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
) -> Result<usize, AugmentError> {
    let (ev, span) = locate(item, event, argument)?;
    let doc = &item.document;
    let distance = doc.span_distance(ev.trigger, span)?;
    if span.overlaps(ev.trigger) {
        return Err(AugmentError::OverlapsTrigger(span));
    }
    let sentence = doc.sentence_of(span.start)?;
    if doc.sentence_of(span.end)? != sentence {
        return Err(AugmentError::CrossesSentence(span));
    }
    if distance != 0 {
        return Err(AugmentError::NotIntraSentential(distance));
    }
    for other in all_spans(item) {
        if other != span && other.overlaps(span) {
            return Err(AugmentError::OverlapsAnnotation { moved: span, other });
        }
    }
    Ok(sentence)
}

fn swap_distance(kind: SwapKind, position: usize, sentence_count: usize, home: usize) -> i64 {
    match kind {
        SwapKind::Simple => {
            let target = position.min(sentence_count - 1);
            target as i64 - home as i64
        }
        SwapKind::Verbose => {
            let trigger_sentence = if position <= home { home + 1 } else { home };
            position as i64 - trigger_sentence as i64
        }
    }
}

fn positions_for(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
    kind: SwapKind,
    options: SwapOptions,
) -> Result<Vec<BoundaryPosition>, AugmentError> {
    let home = check_swappable(item, event, argument)?;
    let doc = &item.document;
    let s = doc.sentence_count();
    let positions: Vec<BoundaryPosition> = (0..=s)
        .map(BoundaryPosition)
        .filter(|p| {
            let t = p.token_index(doc);
            !all_spans(item).any(|sp| sp.start < t && t <= sp.end)
        })
        .filter(|p| !options.strict_inter || swap_distance(kind, p.0, s, home) != 0)
        .collect();
    if positions.is_empty() {
        return Err(AugmentError::NoCandidatePosition);
    }
    Ok(positions)
}

/// Boundaries a simple or verbose swap may choose from: every sentence
/// boundary of the document (S + 1 of them), minus any that would split an
/// existing annotation.
pub fn candidate_positions(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
    options: SwapOptions,
) -> Result<Vec<BoundaryPosition>, AugmentError> {
    positions_for(item, event, argument, SwapKind::Simple, options)
}

/// Moves the argument's tokens verbatim to a uniformly chosen boundary.
pub fn simple_swap(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
    rng: &mut SeededRng,
    options: SwapOptions,
) -> Result<AugmentedInstance, AugmentError> {
    swap(item, event, argument, rng, options, SwapKind::Simple)
}

/// Replaces the argument with a new sentence
/// "The {role} of the event {trigger} is {argument} ." at a uniformly chosen
/// boundary.
pub fn verbose_swap(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
    rng: &mut SeededRng,
    options: SwapOptions,
) -> Result<AugmentedInstance, AugmentError> {
    swap(item, event, argument, rng, options, SwapKind::Verbose)
}

/// Tokens of the verbose-swap sentence and the offset of the argument inside it.
pub fn verbose_sentence(role: &str, trigger: &[String], argument: &[String]) -> (Vec<String>, usize) {
    let mut out: Vec<String> = Vec::new();
    out.push("The".into());
    out.extend(role.split_whitespace().map(String::from));
    out.extend(["of", "the", "event"].map(String::from));
    out.extend(trigger.iter().cloned());
    out.push("is".into());
    let offset = out.len();
    out.extend(argument.iter().cloned());
    out.push(".".into());
    (out, offset)
}

fn swap(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
    rng: &mut SeededRng,
    options: SwapOptions,
    kind: SwapKind,
) -> Result<AugmentedInstance, AugmentError> {
    let positions = positions_for(item, event, argument, kind, options)?;
    let position = positions[rng.index(positions.len())];
    let doc = &item.document;
    let ev = &item.events[event];
    let moved = ev.arguments[argument].span;
    let original_distance = doc.span_distance(ev.trigger, moved)?;
    let arg_tokens = doc.span_tokens(moved).to_vec();

    let (inserted, arg_offset, placement) = match kind {
        SwapKind::Simple => {
            let attach = position.0.min(doc.sentence_count() - 1);
            (arg_tokens, 0, Placement::Attach(attach))
        }
        SwapKind::Verbose => {
            let role = ev.arguments[argument].role.as_str();
            let (sentence, offset) = verbose_sentence(role, doc.span_tokens(ev.trigger), &arg_tokens);
            (sentence, offset, Placement::NewSentence(position.0))
        }
    };
    let splice = Splice {
        removed: moved,
        insert_at: position.token_index(doc),
        inserted,
        placement,
    };
    let (derived, inserted_start) = splice.apply(item);
    let relocated = Span::new(
        inserted_start + arg_offset,
        inserted_start + arg_offset + moved.len() - 1,
    );
    let mut derived = derived;
    relocate_identical(&mut derived, item, moved, relocated);
    let method = match kind {
        SwapKind::Simple => AugmentMethod::SimpleSwap,
        SwapKind::Verbose => AugmentMethod::VerboseSwap,
    };
    derived.document.doc_id = derived_id(doc.doc_id.as_str(), method, event, argument);
    let new_ev = &derived.events[event];
    let new_distance = derived.document.span_distance(new_ev.trigger, relocated)?;
    Ok(AugmentedInstance {
        provenance: Provenance {
            method,
            source_doc_id: doc.doc_id.clone(),
            seed: Some(rng.seed()),
            moved: alloc::vec![MovedArgument {
                event_index: event,
                argument_index: argument,
                role: ev.arguments[argument].role.clone(),
                original_distance,
                new_distance,
            }],
        },
        item: derived,
        notes: Vec::new(),
    })
}

pub fn derived_id(source: &str, method: AugmentMethod, event: usize, argument: usize) -> String {
    format!("{source}#{method}-{event}-{argument}")
}

/// Every annotation whose span equals the moved span follows it.
fn relocate_identical(derived: &mut AnnotatedDocument, source: &AnnotatedDocument, moved: Span, to: Span) {
    for (new_ev, old_ev) in derived.events.iter_mut().zip(&source.events) {
        if old_ev.trigger == moved {
            new_ev.trigger = to;
        }
        for (new_arg, old_arg) in new_ev.arguments.iter_mut().zip(&old_ev.arguments) {
            if old_arg.span == moved {
                new_arg.span = to;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Placement {
    /// Inserted tokens join sentence `i`.
    Attach(usize),
    /// Inserted tokens form a new sentence placed before original sentence `i`.
    NewSentence(usize),
}

/// Remove one span and insert a token run at a sentence boundary, re-indexing
/// every annotation. `insert_at` is in original coordinates and never falls
/// strictly inside the removed span.
struct Splice {
    removed: Span,
    insert_at: usize,
    inserted: Vec<String>,
    placement: Placement,
}

impl Splice {
    fn map(&self, i: usize) -> usize {
        let mut j = i;
        if i > self.removed.end {
            j -= self.removed.len();
        }
        if i >= self.insert_at {
            j += self.inserted.len();
        }
        j
    }

    fn map_span(&self, span: Span) -> Span {
        Span::new(self.map(span.start), self.map(span.end))
    }

    fn apply(&self, item: &AnnotatedDocument) -> (AnnotatedDocument, usize) {
        let doc = &item.document;
        let removed = self.removed.to_range();
        let home = doc
            .sentences
            .iter()
            .position(|r| r.contains(&self.removed.start))
            .expect("removed span lies in a sentence");

        let mut tokens = Vec::with_capacity(doc.token_count() + self.inserted.len());
        for (i, token) in doc.tokens.iter().enumerate() {
            if i == self.insert_at {
                tokens.extend(self.inserted.iter().cloned());
            }
            if !removed.contains(&i) {
                tokens.push(token.clone());
            }
        }
        if self.insert_at == doc.token_count() {
            tokens.extend(self.inserted.iter().cloned());
        }

        let mut lengths: Vec<usize> = doc.sentences.iter().map(|r| r.end - r.start).collect();
        lengths[home] -= self.removed.len();
        match self.placement {
            Placement::Attach(i) => lengths[i] += self.inserted.len(),
            Placement::NewSentence(i) => lengths.insert(i, self.inserted.len()),
        }
        let sentences = cumulative(&lengths);

        let events = item
            .events
            .iter()
            .map(|ev| EventInstance {
                event_type: ev.event_type.clone(),
                trigger: self.map_span(ev.trigger),
                arguments: ev
                    .arguments
                    .iter()
                    .map(|a| crate::corpus::ArgumentAnnotation::new(a.role.clone(), self.map_span(a.span)))
                    .collect(),
            })
            .collect();
        let inserted_start = if self.insert_at > self.removed.end {
            self.insert_at - self.removed.len()
        } else {
            self.insert_at
        };
        (
            AnnotatedDocument::new(
                Document::new(doc.doc_id.clone(), tokens, sentences),
                events,
            ),
            inserted_start,
        )
    }
}

fn cumulative(lengths: &[usize]) -> Vec<Range<usize>> {
    let mut start = 0;
    lengths
        .iter()
        .map(|&n| {
            let r = start..start + n;
            start += n;
            r
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorefMode {
    Random,
    Meaningful,
}

/// Relocates the argument annotation to another mention of its coreference
/// chain. Tokens are untouched.
///
/// `Random` draws uniformly among the other mentions; `Meaningful` takes the
/// mention with the most tokens, earliest on ties.
pub fn coref_replace(
    item: &AnnotatedDocument,
    event: usize,
    argument: usize,
    chains: &[CorefChain],
    mode: CorefMode,
    rng: &mut SeededRng,
) -> Result<AugmentedInstance, AugmentError> {
    let (ev, span) = locate(item, event, argument)?;
    let chain = chains
        .iter()
        .find(|c| c.doc_id == item.doc_id() && c.contains_span(span))
        .ok_or(AugmentError::NoChain(span))?;
    let candidates: Vec<Span> = chain
        .mentions
        .iter()
        .map(|m| m.span)
        .filter(|&s| s != span)
        .collect();
    if candidates.is_empty() {
        return Err(AugmentError::SingleMentionChain(span));
    }
    let chosen = match mode {
        CorefMode::Random => candidates[rng.index(candidates.len())],
        CorefMode::Meaningful => {
            let best = candidates.iter().map(|s| s.len()).max().unwrap_or(0);
            candidates
                .iter()
                .copied()
                .filter(|s| s.len() == best)
                .min_by_key(|s| (s.start, s.end))
                .unwrap_or(candidates[0])
        }
    };
    let doc = &item.document;
    let original_distance = doc.span_distance(ev.trigger, span)?;
    let new_distance = doc.span_distance(ev.trigger, chosen)?;
    let method = match mode {
        CorefMode::Random => AugmentMethod::CorefRandom,
        CorefMode::Meaningful => AugmentMethod::CorefMeaningful,
    };
    let mut derived = item.clone();
    derived.events[event].arguments[argument].span = chosen;
    derived.document.doc_id = derived_id(item.doc_id(), method, event, argument);
    Ok(AugmentedInstance {
        item: derived,
        provenance: Provenance {
            method,
            source_doc_id: item.doc_id().to_string(),
            seed: match mode {
                CorefMode::Random => Some(rng.seed()),
                CorefMode::Meaningful => None,
            },
            moved: alloc::vec![MovedArgument {
                event_index: event,
                argument_index: argument,
                role: ev.arguments[argument].role.clone(),
                original_distance,
                new_distance,
            }],
        },
        notes: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParaphraseScope {
    /// The text replaces one sentence; the rest of the document is kept.
    Sentence(usize),
    /// The text replaces the whole document.
    Document,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignOutcome {
    Aligned(AugmentedInstance),
    /// A trigger or argument surface form could not be found.
    Unalignable { missing: String },
}

/// Re-anchors every trigger and argument in paraphrased text.
///
/// The paraphrase is tokenized on whitespace (with edge punctuation split
/// off) and split into sentences after terminal punctuation. Each surface
/// form is located by exact token-subsequence match, falling back to a
/// case-insensitive match; the first occurrence wins.
pub fn align_paraphrase(
    item: &AnnotatedDocument,
    paraphrase: &str,
    scope: ParaphraseScope,
) -> Result<AlignOutcome, AugmentError> {
    let para_tokens = text::tokenize(paraphrase);
    if para_tokens.is_empty() {
        return Err(AugmentError::EmptyParaphrase);
    }
    let doc = &item.document;
    let (replaced, method) = match scope {
        ParaphraseScope::Document => (0..doc.token_count(), AugmentMethod::ParaDocument),
        ParaphraseScope::Sentence(i) => (
            doc.sentences
                .get(i)
                .cloned()
                .ok_or(AugmentError::NoSuchSentence(i))?,
            AugmentMethod::ParaSentence,
        ),
    };
    let delta = para_tokens.len() as isize - replaced.len() as isize;

    let mut tokens: Vec<String> = doc.tokens[..replaced.start].to_vec();
    tokens.extend(para_tokens.iter().cloned());
    tokens.extend(doc.tokens[replaced.end..].iter().cloned());

    let mut sentences: Vec<Range<usize>> = Vec::new();
    match scope {
        ParaphraseScope::Document => sentences = text::split_sentences(&para_tokens),
        ParaphraseScope::Sentence(i) => {
            sentences.extend(doc.sentences[..i].iter().cloned());
            let base = replaced.start;
            sentences.extend(
                text::split_sentences(&para_tokens)
                    .into_iter()
                    .map(|r| r.start + base..r.end + base),
            );
            sentences.extend(doc.sentences[i + 1..].iter().map(|r| {
                (r.start as isize + delta) as usize..(r.end as isize + delta) as usize
            }));
        }
    }
    let region = replaced.start..replaced.start + para_tokens.len();

    let mut notes = Vec::new();
    let mut claimed: BTreeMap<Span, Span> = BTreeMap::new();
    let mut realign = |span: Span| -> Result<Span, String> {
        if span.end < replaced.start {
            return Ok(span);
        }
        if span.start >= replaced.end {
            return Ok(span.shifted(delta));
        }
        let surface = doc.span_tokens(span);
        if span.start < replaced.start || span.end >= replaced.end {
            return Err(surface.join(" "));
        }
        let (found, _) = text::find_with_fallback(&tokens[region.clone()], surface);
        let Some(first) = found.first() else {
            return Err(surface.join(" "));
        };
        let anchored = first.shifted(region.start as isize);
        if let Some(previous) = claimed.insert(anchored, span) {
            if previous != span {
                notes.push(format!(
                    "{:?} at {anchored} also claimed by original span {previous}",
                    surface.join(" ")
                ));
            }
        }
        Ok(anchored)
    };

    let mut events = Vec::with_capacity(item.events.len());
    for ev in &item.events {
        let trigger = match realign(ev.trigger) {
            Ok(s) => s,
            Err(missing) => return Ok(AlignOutcome::Unalignable { missing }),
        };
        let mut arguments = Vec::with_capacity(ev.arguments.len());
        for arg in &ev.arguments {
            match realign(arg.span) {
                Ok(s) => arguments.push(crate::corpus::ArgumentAnnotation::new(arg.role.clone(), s)),
                Err(missing) => return Ok(AlignOutcome::Unalignable { missing }),
            }
        }
        events.push(EventInstance::new(ev.event_type.clone(), trigger, arguments));
    }

    let derived_doc = Document::new(format!("{}#{}", doc.doc_id, method), tokens, sentences);
    let mut moved = Vec::new();
    for (e, (old, new)) in item.events.iter().zip(&events).enumerate() {
        for (a, (old_arg, new_arg)) in old.arguments.iter().zip(&new.arguments).enumerate() {
            moved.push(MovedArgument {
                event_index: e,
                argument_index: a,
                role: old_arg.role.clone(),
                original_distance: doc.span_distance(old.trigger, old_arg.span)?,
                new_distance: derived_doc.span_distance(new.trigger, new_arg.span)?,
            });
        }
    }
    Ok(AlignOutcome::Aligned(AugmentedInstance {
        item: AnnotatedDocument::new(derived_doc, events),
        provenance: Provenance {
            method,
            source_doc_id: doc.doc_id.clone(),
            seed: None,
            moved,
        },
        notes,
    }))
}

/// Fraction of arguments whose sentence differs from their trigger's.
/// Arguments that cannot be placed in a sentence are not counted.
pub fn inter_sentential_rate<'a>(items: impl IntoIterator<Item = &'a AnnotatedDocument>) -> f64 {
    let mut total = 0usize;
    let mut inter = 0usize;
    for item in items {
        for ev in &item.events {
            for arg in &ev.arguments {
                if let Ok(d) = item.document.span_distance(ev.trigger, arg.span) {
                    total += 1;
                    if d != 0 {
                        inter += 1;
                    }
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        inter as f64 / total as f64
    }
}

/// Why an argument produced no augmented instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub doc_id: String,
    pub event_index: usize,
    pub argument_index: usize,
    pub reason: AugmentError,
}

/// Settings for corpus-level swap/coreference augmentation.
#[derive(Debug, Clone, Copy)]
pub struct AugmentPlan<'a> {
    pub method: AugmentMethod,
    pub seed: u64,
    pub options: SwapOptions,
    pub chains: Option<&'a BTreeMap<String, Vec<CorefChain>>>,
}

/// Stable 64-bit id for seeding per-document streams independent of corpus order.
pub fn doc_key(doc_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in doc_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One augmented instance per eligible argument of one document. Each
/// argument draws from its own stream derived from (seed, doc id, event, argument).
pub fn augment_document(
    item: &AnnotatedDocument,
    plan: &AugmentPlan<'_>,
) -> (Vec<AugmentedInstance>, Vec<Skipped>) {
    let mut made = Vec::new();
    let mut skipped = Vec::new();
    let no_chains: Vec<CorefChain> = Vec::new();
    let chains = plan
        .chains
        .and_then(|c| c.get(item.doc_id()))
        .unwrap_or(&no_chains);
    for (e, ev) in item.events.iter().enumerate() {
        for a in 0..ev.arguments.len() {
            let mut rng = SeededRng::derive(plan.seed, &[doc_key(item.doc_id()), e as u64, a as u64]);
            let result = match plan.method {
                AugmentMethod::SimpleSwap => simple_swap(item, e, a, &mut rng, plan.options),
                AugmentMethod::VerboseSwap => verbose_swap(item, e, a, &mut rng, plan.options),
                AugmentMethod::CorefRandom | AugmentMethod::CorefMeaningful => {
                    let mode = if plan.method == AugmentMethod::CorefRandom {
                        CorefMode::Random
                    } else {
                        CorefMode::Meaningful
                    };
                    coref_replace(item, e, a, chains, mode, &mut rng)
                }
                AugmentMethod::ParaSentence | AugmentMethod::ParaDocument => continue,
            };
            match result {
                Ok(instance) => made.push(instance),
                Err(reason) => skipped.push(Skipped {
                    doc_id: item.doc_id().to_string(),
                    event_index: e,
                    argument_index: a,
                    reason,
                }),
            }
        }
    }
    (made, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ArgumentAnnotation, Document};
    use alloc::vec;

    fn words(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    /// Four sentences; "agreement" (token 5) with violator "Clinton" and
    /// otherparticipant "Iran" in the same sentence.
    fn agreement_doc() -> AnnotatedDocument {
        let sentences = [
            "Hillary Clinton spoke on Tuesday .",
            "She criticized the agreement with Iran .",
            "Clinton said Iran and its allies would cheat and the country could not be trusted .",
            "Iran rejected the claim .",
        ];
        let doc = Document::from_sentences(
            "rams-1",
            &sentences.iter().map(|s| words(s)).collect::<Vec<_>>(),
        );
        // tokens: 0 Hillary 1 Clinton 2 spoke 3 on 4 Tuesday 5 . | 6 She 7 criticized 8 the
        // 9 agreement 10 with 11 Iran 12 . | 13 Clinton ...
        let event = EventInstance::new(
            "contact.negotiate",
            Span::single(9),
            vec![
                ArgumentAnnotation::new("violator", Span::single(6)),
                ArgumentAnnotation::new("otherparticipant", Span::single(11)),
            ],
        );
        AnnotatedDocument::new(doc, vec![event])
    }

    #[test]
    fn four_sentences_give_five_positions() {
        let item = agreement_doc();
        let positions = candidate_positions(&item, 0, 1, SwapOptions::default()).unwrap();
        assert_eq!(positions.len(), 5);
    }

    #[test]
    fn simple_swap_moves_tokens_and_reindexes() {
        let item = agreement_doc();
        for seed in 0..20 {
            let mut rng = SeededRng::new(seed);
            let out = simple_swap(&item, 0, 1, &mut rng, SwapOptions::default()).unwrap();
            let d = &out.item;
            assert!(d.validate(None).is_empty());
            let mut a = item.document.tokens.clone();
            let mut b = d.document.tokens.clone();
            a.sort();
            b.sort();
            assert_eq!(a, b);
            assert_eq!(d.document.span_text(d.events[0].trigger), "agreement");
            assert_eq!(d.document.span_text(d.events[0].arguments[0].span), "She");
            assert_eq!(d.document.span_text(d.events[0].arguments[1].span), "Iran");
            let moved = &out.provenance.moved[0];
            assert_eq!(moved.new_distance, d.argument_distance(0, 1).unwrap());
        }
    }

    #[test]
    fn verbose_swap_inserts_template_sentence() {
        let item = agreement_doc();
        let mut rng = SeededRng::new(7);
        let out = verbose_swap(&item, 0, 0, &mut rng, SwapOptions::default()).unwrap();
        let d = &out.item.document;
        assert_eq!(d.sentence_count(), item.document.sentence_count() + 1);
        let arg = out.item.events[0].arguments[0].span;
        assert_eq!(d.span_text(arg), "She");
        let s = d.sentence_of(arg.start).unwrap();
        assert_eq!(
            d.tokens[d.sentences[s].clone()].join(" "),
            "The violator of the event agreement is She ."
        );
        assert_ne!(out.provenance.moved[0].new_distance, 0);
    }

    #[test]
    fn verbose_sentence_matches_example() {
        let (tokens, offset) = verbose_sentence("violator", &words("agreement"), &words("Clinton"));
        assert_eq!(tokens, words("The violator of the event agreement is Clinton ."));
        assert_eq!(offset, 7);
    }

    #[test]
    fn swap_rejects_trigger_overlap_and_inter() {
        let mut item = agreement_doc();
        item.events[0].arguments.push(ArgumentAnnotation::new("place", Span::new(8, 9)));
        item.events[0].arguments.push(ArgumentAnnotation::new("x", Span::single(0)));
        let mut rng = SeededRng::new(1);
        assert!(matches!(
            simple_swap(&item, 0, 2, &mut rng, SwapOptions::default()),
            Err(AugmentError::OverlapsTrigger(_))
        ));
        assert!(matches!(
            simple_swap(&item, 0, 3, &mut rng, SwapOptions::default()),
            Err(AugmentError::NotIntraSentential(-1))
        ));
    }

    #[test]
    fn strict_inter_excludes_home_positions() {
        let item = agreement_doc();
        let p = candidate_positions(&item, 0, 1, SwapOptions { strict_inter: true }).unwrap();
        assert_eq!(p, vec![BoundaryPosition(0), BoundaryPosition(2), BoundaryPosition(3), BoundaryPosition(4)]);
    }

    fn chains_for(item: &AnnotatedDocument) -> Vec<CorefChain> {
        let doc = &item.document;
        vec![
            CorefChain::resolve(doc, &[Span::new(0, 1), Span::single(6), Span::single(13)]).unwrap(),
            // Iran, Iran, its, the country, Iran
            CorefChain::resolve(
                doc,
                &[Span::single(11), Span::single(15), Span::single(17), Span::new(22, 23), Span::single(29)],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn coref_meaningful_prefers_longest_mention() {
        let mut item = agreement_doc();
        item.events[0].arguments[0].span = Span::single(13);
        let chains = chains_for(&item);
        assert_eq!(item.document.span_text(Span::new(22, 23)), "the country");
        let mut rng = SeededRng::new(0);
        let out = coref_replace(&item, 0, 0, &chains, CorefMode::Meaningful, &mut rng).unwrap();
        assert_eq!(out.item.document.span_text(out.item.events[0].arguments[0].span), "Hillary Clinton");
        assert_eq!(out.item.document.tokens, item.document.tokens);
        let out = coref_replace(&item, 0, 1, &chains, CorefMode::Meaningful, &mut rng).unwrap();
        assert_eq!(out.item.document.span_text(out.item.events[0].arguments[1].span), "the country");
    }

    #[test]
    fn coref_single_mention_chain_is_error() {
        let item = agreement_doc();
        let chains = vec![CorefChain::resolve(&item.document, &[Span::single(11)]).unwrap()];
        let mut rng = SeededRng::new(0);
        assert!(matches!(
            coref_replace(&item, 0, 1, &chains, CorefMode::Random, &mut rng),
            Err(AugmentError::SingleMentionChain(_))
        ));
        assert!(matches!(
            coref_replace(&item, 0, 0, &chains, CorefMode::Random, &mut rng),
            Err(AugmentError::NoChain(_))
        ));
    }

    #[test]
    fn coref_random_never_picks_original() {
        let item = agreement_doc();
        let chains = chains_for(&item);
        for seed in 0..50 {
            let mut rng = SeededRng::new(seed);
            let out = coref_replace(&item, 0, 1, &chains, CorefMode::Random, &mut rng).unwrap();
            assert_ne!(out.item.events[0].arguments[1].span, Span::single(11));
        }
    }

    #[test]
    fn document_paraphrase_realigns() {
        let item = agreement_doc();
        let para = "Hillary Clinton spoke on Tuesday. She talked a lot. \
                    Later she criticized the agreement. Iran was part of it. \
                    Clinton said Iran and its allies would cheat and the country could not be trusted. \
                    Iran rejected the claim.";
        let AlignOutcome::Aligned(out) = align_paraphrase(&item, para, ParaphraseScope::Document).unwrap() else {
            panic!("expected alignment");
        };
        assert!(out.item.validate(None).is_empty());
        assert_eq!(out.item.document.span_text(out.item.events[0].arguments[1].span), "Iran");
        assert_eq!(out.provenance.moved[1].original_distance, 0);
        assert_eq!(out.provenance.moved[1].new_distance, 1);
        assert_eq!(out.provenance.moved[0].new_distance, -1);
    }

    #[test]
    fn paraphrase_missing_argument_is_unalignable() {
        let item = agreement_doc();
        let out = align_paraphrase(&item, "The deal was criticized. Iran objected.", ParaphraseScope::Document).unwrap();
        assert_eq!(out, AlignOutcome::Unalignable { missing: "agreement".into() });
    }

    #[test]
    fn sentence_paraphrase_keeps_other_distances() {
        let mut item = agreement_doc();
        item.events[0].arguments.push(ArgumentAnnotation::new("x", Span::single(13)));
        let out = align_paraphrase(
            &item,
            "Iran and the agreement were criticized by She.",
            ParaphraseScope::Sentence(1),
        )
        .unwrap();
        let AlignOutcome::Aligned(out) = out else { panic!() };
        assert!(out.item.validate(None).is_empty());
        assert_eq!(out.provenance.moved[2].original_distance, out.provenance.moved[2].new_distance);
        assert_eq!(out.item.document.span_text(out.item.events[0].arguments[2].span), "Clinton");
    }

    #[test]
    fn rate_counts_nonzero_distances() {
        let item = agreement_doc();
        assert_eq!(inter_sentential_rate([&item]), 0.0);
        let mut rng = SeededRng::new(3);
        let out = verbose_swap(&item, 0, 0, &mut rng, SwapOptions::default()).unwrap();
        assert_eq!(inter_sentential_rate([&out.item]), 0.5);
    }

    #[test]
    fn augment_document_is_deterministic() {
        let item = agreement_doc();
        let plan = AugmentPlan {
            method: AugmentMethod::SimpleSwap,
            seed: 42,
            options: SwapOptions::default(),
            chains: None,
        };
        let (a, skipped) = augment_document(&item, &plan);
        let (b, _) = augment_document(&item, &plan);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(skipped.is_empty());
    }
}
