//! Span-level evaluation.
//!
//! Strict scoring compares first/last token indexes plus role. Lenient
//! scoring accepts generated text that contains the gold argument text.
//! Each event may receive at most one prediction per role; when gold holds
//! several arguments with one role, a matching prediction consumes one of
//! them (first in annotation order) and the rest count as misses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::corpus::{AnnotatedDocument, CorefChain, ANALYSIS_WINDOW};
use crate::span::Span;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("prediction references unknown document {0}")]
    UnknownDocument(String),
    #[error("prediction references {doc_id} event {event_index}, which does not exist")]
    UnknownEvent { doc_id: String, event_index: usize },
    #[error("duplicate prediction for {doc_id} event {event_index} role {role} system {system_id}")]
    DuplicatePrediction {
        doc_id: String,
        event_index: usize,
        role: String,
        system_id: String,
    },
    #[error("predictions from several systems ({0}, {1}) scored together")]
    MixedSystems(String, String),
    #[error("prediction span {span} outside document {doc_id}")]
    SpanOutOfBounds { doc_id: String, span: Span },
    #[error("lenient scoring needs predicted text for {doc_id} event {event_index} role {role}")]
    MissingText {
        doc_id: String,
        event_index: usize,
        role: String,
    },
    #[error("duplicate document id {0} in gold corpus")]
    DuplicateDocument(String),
}

/// One predicted span (or abstention) for a (document, event, role).
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredictionRecord {
    pub doc_id: String,
    pub event_index: usize,
    pub role: String,
    pub span: Option<Span>,
    /// Generated answer text, for generative predictors and lenient scoring.
    pub text: Option<String>,
    pub system_id: String,
}

impl PredictionRecord {
    pub fn new(doc_id: &str, event_index: usize, role: &str, span: Option<Span>, system_id: &str) -> Self {
        PredictionRecord {
            doc_id: doc_id.to_string(),
            event_index,
            role: role.to_string(),
            span,
            text: None,
            system_id: system_id.to_string(),
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }
}

/// Fills `text` from the predicted span for predictions that lack it.
pub fn attach_span_text(preds: &mut [PredictionRecord], gold: &[AnnotatedDocument]) {
    let index: BTreeMap<&str, &AnnotatedDocument> = gold.iter().map(|d| (d.doc_id(), d)).collect();
    for p in preds {
        if p.text.is_some() {
            continue;
        }
        if let (Some(span), Some(doc)) = (p.span, index.get(p.doc_id.as_str())) {
            if span.fits(doc.document.token_count()) {
                p.text = Some(doc.document.span_text(span));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counts {
    pub predicted: usize,
    pub gold: usize,
    pub correct: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.predicted += other.predicted;
        self.gold += other.gold;
        self.correct += other.correct;
    }
}

/// Precision, recall and F1 for one set of counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Score {
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Score {
    pub fn from_counts(counts: Counts) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(counts.correct, counts.predicted);
        let recall = ratio(counts.correct, counts.gold);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Score {
            counts,
            precision,
            recall,
            f1,
        }
    }
}

/// Distance bucket: individual buckets inside the analysis window, pooled
/// sentinels outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceBucket {
    FarBefore,
    At(i64),
    FarAfter,
}

impl DistanceBucket {
    pub fn of(distance: i64) -> Self {
        if distance < -ANALYSIS_WINDOW {
            DistanceBucket::FarBefore
        } else if distance > ANALYSIS_WINDOW {
            DistanceBucket::FarAfter
        } else {
            DistanceBucket::At(distance)
        }
    }

    pub fn label(self) -> String {
        match self {
            DistanceBucket::FarBefore => format!("<{}", -ANALYSIS_WINDOW),
            DistanceBucket::At(d) => format!("{d}"),
            DistanceBucket::FarAfter => format!(">{ANALYSIS_WINDOW}"),
        }
    }
}

impl core::str::FromStr for DistanceBucket {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == DistanceBucket::FarBefore.label() {
            Ok(DistanceBucket::FarBefore)
        } else if s == DistanceBucket::FarAfter.label() {
            Ok(DistanceBucket::FarAfter)
        } else {
            s.parse::<i64>()
                .ok()
                .filter(|d| d.abs() <= ANALYSIS_WINDOW)
                .map(DistanceBucket::At)
                .ok_or_else(|| format!("bad distance bucket {s:?}"))
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for DistanceBucket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for DistanceBucket {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-key score with the key's gold frequency (events for the event
/// breakdown, gold arguments for the role breakdown).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Breakdown {
    pub score: Score,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventBreakdown {
    /// The `top_k` most frequent event types.
    pub top: BTreeMap<String, Breakdown>,
    /// Everything outside the top `k`, pooled; `None` when nothing was cut.
    pub other: Option<Breakdown>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub score: Score,
    pub by_distance: Option<BTreeMap<DistanceBucket, Score>>,
    pub by_role: Option<BTreeMap<String, Breakdown>>,
    pub by_event: Option<EventBreakdown>,
    pub confusion: Option<ConfusionMatrix>,
    pub errors: Option<ErrorAnalysis>,
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        self.score.precision
    }
    pub fn recall(&self) -> f64 {
        self.score.recall
    }
    pub fn f1(&self) -> f64 {
        self.score.f1
    }
    pub fn counts(&self) -> Counts {
        self.score.counts
    }
}

/// Gold and predictions aligned per event.
#[derive(Debug, Clone)]
pub struct EventAlignment<'a> {
    pub doc: &'a AnnotatedDocument,
    pub event_index: usize,
    /// Predictions for this event that carry a span, in input order, with
    /// the index of the gold argument each one matched.
    pub predictions: Vec<(&'a PredictionRecord, Option<usize>)>,
    /// Roles predicted with an explicit abstention.
    pub abstained: Vec<&'a PredictionRecord>,
    /// Which gold arguments were matched.
    pub gold_matched: Vec<bool>,
}

impl EventAlignment<'_> {
    pub fn event(&self) -> &crate::corpus::EventInstance {
        &self.doc.events[self.event_index]
    }

    pub fn counts(&self) -> Counts {
        Counts {
            predicted: self.predictions.len(),
            gold: self.gold_matched.len(),
            correct: self.predictions.iter().filter(|(_, m)| m.is_some()).count(),
        }
    }
}

type MatchFn<'f> = dyn Fn(&AnnotatedDocument, usize, &PredictionRecord, usize) -> bool + 'f;

fn align<'a>(
    preds: &'a [PredictionRecord],
    gold: &'a [AnnotatedDocument],
    matches: &MatchFn<'_>,
    needs_text: bool,
) -> Result<Vec<EventAlignment<'a>>, ScoreError> {
    let mut index: BTreeMap<&str, &AnnotatedDocument> = BTreeMap::new();
    for d in gold {
        if index.insert(d.doc_id(), d).is_some() {
            return Err(ScoreError::DuplicateDocument(d.doc_id().to_string()));
        }
    }
    let mut system: Option<&str> = None;
    let mut seen = BTreeSet::new();
    let mut per_event: BTreeMap<(&str, usize), Vec<&PredictionRecord>> = BTreeMap::new();
    for p in preds {
        match system {
            None => system = Some(&p.system_id),
            Some(s) if s != p.system_id => {
                return Err(ScoreError::MixedSystems(s.to_string(), p.system_id.clone()))
            }
            _ => {}
        }
        let doc = index
            .get(p.doc_id.as_str())
            .ok_or_else(|| ScoreError::UnknownDocument(p.doc_id.clone()))?;
        if p.event_index >= doc.events.len() {
            return Err(ScoreError::UnknownEvent {
                doc_id: p.doc_id.clone(),
                event_index: p.event_index,
            });
        }
        if let Some(span) = p.span {
            if !span.fits(doc.document.token_count()) {
                return Err(ScoreError::SpanOutOfBounds {
                    doc_id: p.doc_id.clone(),
                    span,
                });
            }
            if needs_text && p.text.is_none() {
                return Err(ScoreError::MissingText {
                    doc_id: p.doc_id.clone(),
                    event_index: p.event_index,
                    role: p.role.clone(),
                });
            }
        }
        if !seen.insert((p.doc_id.as_str(), p.event_index, p.role.as_str())) {
            return Err(ScoreError::DuplicatePrediction {
                doc_id: p.doc_id.clone(),
                event_index: p.event_index,
                role: p.role.clone(),
                system_id: p.system_id.clone(),
            });
        }
        per_event.entry((doc.doc_id(), p.event_index)).or_default().push(p);
    }

    let mut out = Vec::new();
    for doc in gold {
        for (e, event) in doc.events.iter().enumerate() {
            let mut gold_matched = alloc::vec![false; event.arguments.len()];
            let mut predictions = Vec::new();
            let mut abstained = Vec::new();
            for p in per_event.remove(&(doc.doc_id(), e)).unwrap_or_default() {
                let answers = p.span.is_some() || (needs_text && p.text.as_deref().is_some_and(|t| !t.trim().is_empty()));
                if !answers {
                    abstained.push(p);
                    continue;
                }
                let hit = (0..event.arguments.len())
                    .find(|&g| !gold_matched[g] && matches(doc, e, p, g));
                if let Some(g) = hit {
                    gold_matched[g] = true;
                }
                predictions.push((p, hit));
            }
            out.push(EventAlignment {
                doc,
                event_index: e,
                predictions,
                abstained,
                gold_matched,
            });
        }
    }
    Ok(out)
}

fn strict_match(doc: &AnnotatedDocument, event: usize, p: &PredictionRecord, g: usize) -> bool {
    let arg = &doc.events[event].arguments[g];
    arg.role == p.role && Some(arg.span) == p.span
}

fn lenient_match(doc: &AnnotatedDocument, event: usize, p: &PredictionRecord, g: usize) -> bool {
    let arg = &doc.events[event].arguments[g];
    if arg.role != p.role {
        return false;
    }
    let Some(generated) = p.text.as_deref() else {
        return false;
    };
    let needle = text::normalize(&doc.document.span_text(arg.span));
    text::normalize(generated).contains(needle.as_str())
}

/// Aligns predictions to gold under strict matching.
pub fn align_strict<'a>(
    preds: &'a [PredictionRecord],
    gold: &'a [AnnotatedDocument],
) -> Result<Vec<EventAlignment<'a>>, ScoreError> {
    align(preds, gold, &strict_match, false)
}

fn total(alignments: &[EventAlignment<'_>]) -> Score {
    let mut c = Counts::default();
    for a in alignments {
        c.add(a.counts());
    }
    Score::from_counts(c)
}

/// Exact first/last token index and role match.
pub fn score_strict(preds: &[PredictionRecord], gold: &[AnnotatedDocument]) -> Result<EvalReport, ScoreError> {
    let alignments = align_strict(preds, gold)?;
    Ok(EvalReport {
        score: total(&alignments),
        ..EvalReport::default()
    })
}

/// Correct when the gold argument text (whitespace-collapsed, casefolded) is
/// a substring of the predicted text. Predictions with a span need text;
/// fill it with [`attach_span_text`] for extractive systems.
pub fn score_lenient(preds: &[PredictionRecord], gold: &[AnnotatedDocument]) -> Result<EvalReport, ScoreError> {
    let alignments = align(preds, gold, &lenient_match, true)?;
    Ok(EvalReport {
        score: total(&alignments),
        ..EvalReport::default()
    })
}

fn distance_of(a: &EventAlignment<'_>, span: Span) -> Option<i64> {
    a.doc.document.span_distance(a.event().trigger, span).ok()
}

/// Gold arguments bucketed by sentence distance to their trigger;
/// predictions by the distance of the predicted span.
pub fn breakdown_by_distance(alignments: &[EventAlignment<'_>]) -> BTreeMap<DistanceBucket, Score> {
    let mut counts: BTreeMap<DistanceBucket, Counts> = BTreeMap::new();
    for a in alignments {
        for arg in &a.event().arguments {
            if let Some(d) = distance_of(a, arg.span) {
                counts.entry(DistanceBucket::of(d)).or_default().gold += 1;
            }
        }
        for (p, hit) in &a.predictions {
            let span = p.span.expect("strict predictions carry spans");
            if let Some(d) = distance_of(a, span) {
                let c = counts.entry(DistanceBucket::of(d)).or_default();
                c.predicted += 1;
                if hit.is_some() {
                    c.correct += 1;
                }
            }
        }
    }
    counts.into_iter().map(|(k, c)| (k, Score::from_counts(c))).collect()
}

pub fn breakdown_by_role(alignments: &[EventAlignment<'_>]) -> BTreeMap<String, Breakdown> {
    let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
    for a in alignments {
        for arg in &a.event().arguments {
            counts.entry(arg.role.clone()).or_default().gold += 1;
        }
        for (p, hit) in &a.predictions {
            let c = counts.entry(p.role.clone()).or_default();
            c.predicted += 1;
            if hit.is_some() {
                c.correct += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|(k, c)| {
            (
                k,
                Breakdown {
                    score: Score::from_counts(c),
                    frequency: c.gold,
                },
            )
        })
        .collect()
}

/// Per event type, restricted to the `top_k` most frequent types (by event
/// count, ties by name); the remainder is pooled into `other`.
pub fn breakdown_by_event(alignments: &[EventAlignment<'_>], top_k: usize) -> EventBreakdown {
    let mut counts: BTreeMap<&str, (Counts, usize)> = BTreeMap::new();
    for a in alignments {
        let entry = counts.entry(a.event().event_type.as_str()).or_default();
        entry.0.add(a.counts());
        entry.1 += 1;
    }
    let mut ranked: Vec<(&str, (Counts, usize))> = counts.into_iter().collect();
    ranked.sort_by(|x, y| y.1 .1.cmp(&x.1 .1).then(x.0.cmp(y.0)));
    let mut top = BTreeMap::new();
    let mut rest = Counts::default();
    let mut rest_events = 0;
    for (i, (name, (c, freq))) in ranked.iter().enumerate() {
        if i < top_k {
            top.insert(
                name.to_string(),
                Breakdown {
                    score: Score::from_counts(*c),
                    frequency: *freq,
                },
            );
        } else {
            rest.add(*c);
            rest_events += freq;
        }
    }
    let other = (ranked.len() > top_k).then(|| Breakdown {
        score: Score::from_counts(rest),
        frequency: rest_events,
    });
    EventBreakdown { top, other }
}

/// Relative F1 change of `system` over `baseline`, in percent.
pub fn relative_f1_change(baseline: &Score, system: &Score) -> Option<f64> {
    (baseline.f1 > 0.0).then(|| (system.f1 - baseline.f1) / baseline.f1 * 100.0)
}

/// Bucket-wise [`relative_f1_change`] over the union of buckets.
pub fn distance_delta(
    baseline: &BTreeMap<DistanceBucket, Score>,
    system: &BTreeMap<DistanceBucket, Score>,
) -> BTreeMap<DistanceBucket, Option<f64>> {
    let keys: BTreeSet<DistanceBucket> = baseline.keys().chain(system.keys()).copied().collect();
    let zero = Score::default();
    keys.into_iter()
        .map(|k| {
            let b = baseline.get(&k).unwrap_or(&zero);
            let s = system.get(&k).unwrap_or(&zero);
            (k, relative_f1_change(b, s))
        })
        .collect()
}

/// Gold role (rows) against predicted role (columns) for predictions whose
/// span equals some gold span of their event.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// `counts[gold][predicted]`, indexed like `labels`.
    pub counts: Vec<Vec<usize>>,
}

pub const OTHER_LABEL: &str = "other";

impl ConfusionMatrix {
    pub fn diagonal(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, gold: &str, predicted: &str) -> usize {
        let i = self.labels.iter().position(|l| l == gold);
        let j = self.labels.iter().position(|l| l == predicted);
        match (i, j) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    /// Keeps the first `k` labels (most frequent first) and pools the rest
    /// into an `other` row and column.
    pub fn collapsed(&self, k: usize) -> ConfusionMatrix {
        if self.labels.len() <= k {
            return self.clone();
        }
        let mut labels: Vec<String> = self.labels[..k].to_vec();
        labels.push(OTHER_LABEL.to_string());
        let slot = |i: usize| i.min(k);
        let mut counts = alloc::vec![alloc::vec![0; k + 1]; k + 1];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                counts[slot(i)][slot(j)] += n;
            }
        }
        ConfusionMatrix { labels, counts }
    }
}

/// Full role confusion matrix; labels ordered by gold frequency, then name.
pub fn role_confusion(alignments: &[EventAlignment<'_>]) -> ConfusionMatrix {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for a in alignments {
        let event = a.event();
        for arg in &event.arguments {
            *freq.entry(arg.role.as_str()).or_default() += 1;
        }
        for (p, _) in &a.predictions {
            freq.entry(p.role.as_str()).or_default();
            let span = p.span.expect("strict predictions carry spans");
            let same_span: Vec<&str> = event
                .arguments
                .iter()
                .filter(|g| g.span == span)
                .map(|g| g.role.as_str())
                .collect();
            if same_span.is_empty() {
                continue;
            }
            let gold_role = same_span
                .iter()
                .copied()
                .find(|r| *r == p.role)
                .unwrap_or(same_span[0]);
            pairs.push((gold_role, p.role.as_str()));
        }
    }
    let mut labels: Vec<&str> = freq.keys().copied().collect();
    labels.sort_by(|a, b| freq[b].cmp(&freq[a]).then(a.cmp(b)));
    let pos: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut counts = alloc::vec![alloc::vec![0; labels.len()]; labels.len()];
    for (g, p) in pairs {
        counts[pos[g]][pos[p]] += 1;
    }
    ConfusionMatrix {
        labels: labels.into_iter().map(String::from).collect(),
        counts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ErrorCategory {
    AlternativeSpan,
    PartialSpan,
    WrongSpan,
    MultiInstanceRole,
    Missing,
    Spurious,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 6] = [
        ErrorCategory::AlternativeSpan,
        ErrorCategory::PartialSpan,
        ErrorCategory::WrongSpan,
        ErrorCategory::MultiInstanceRole,
        ErrorCategory::Missing,
        ErrorCategory::Spurious,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::AlternativeSpan => "alternative_span",
            ErrorCategory::PartialSpan => "partial_span",
            ErrorCategory::WrongSpan => "wrong_span",
            ErrorCategory::MultiInstanceRole => "multi_instance_role",
            ErrorCategory::Missing => "missing",
            ErrorCategory::Spurious => "spurious",
        }
    }
}

impl core::fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", content = "value", rename_all = "snake_case"))]
pub enum ErrorEvidence {
    None,
    /// Predicted span is this mention of the gold argument's chain.
    CorefMention { chain_index: usize, mention: Span },
    /// Tokens shared between prediction and gold.
    Overlap { tokens: usize },
    /// Number of gold arguments sharing the role.
    GoldInstances(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorCase {
    pub doc_id: String,
    pub event_index: usize,
    pub role: String,
    pub category: ErrorCategory,
    pub predicted: Option<Span>,
    pub gold: Option<Span>,
    pub evidence: ErrorEvidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorAnalysis {
    pub cases: Vec<ErrorCase>,
    pub histogram: BTreeMap<ErrorCategory, usize>,
    /// False when no coreference chains were supplied; alternative spans
    /// then fall into the partial/wrong categories.
    pub chains_available: bool,
}

impl ErrorAnalysis {
    /// Category shares in percent of all error cases.
    pub fn percentages(&self) -> BTreeMap<ErrorCategory, f64> {
        let n = self.cases.len();
        self.histogram
            .iter()
            .map(|(k, &v)| (*k, if n == 0 { 0.0 } else { v as f64 * 100.0 / n as f64 }))
            .collect()
    }
}

/// Assigns every strict error exactly one category.
///
/// Per (event, role) with gold spans `G` and prediction `p`:
/// - no prediction: one `Missing` per gold span;
/// - prediction, `G` empty: `Spurious`;
/// - prediction matches: one `MultiInstanceRole` per remaining gold span;
/// - prediction misses: one case for the prediction, by priority
///   multi-instance > alternative (coreferent) > partial (overlap) > wrong,
///   plus `MultiInstanceRole` for each further gold span.
pub fn classify_errors(
    alignments: &[EventAlignment<'_>],
    chains: Option<&BTreeMap<String, Vec<CorefChain>>>,
) -> ErrorAnalysis {
    let mut cases = Vec::new();
    for a in alignments {
        let event = a.event();
        let doc_id = a.doc.doc_id();
        let doc_chains = chains.and_then(|c| c.get(doc_id)).map(Vec::as_slice).unwrap_or(&[]);
        let mut roles: BTreeSet<&str> = event.arguments.iter().map(|g| g.role.as_str()).collect();
        roles.extend(a.predictions.iter().map(|(p, _)| p.role.as_str()));
        for role in roles {
            let gold: Vec<usize> = (0..event.arguments.len())
                .filter(|&g| event.arguments[g].role == role)
                .collect();
            let pred = a.predictions.iter().find(|(p, _)| p.role == role);
            let mut case = |category, predicted, gold, evidence| {
                cases.push(ErrorCase {
                    doc_id: doc_id.to_string(),
                    event_index: a.event_index,
                    role: role.to_string(),
                    category,
                    predicted,
                    gold,
                    evidence,
                })
            };
            match pred {
                None => {
                    for &g in &gold {
                        case(ErrorCategory::Missing, None, Some(event.arguments[g].span), ErrorEvidence::None);
                    }
                }
                Some((p, hit)) => {
                    let span = p.span.expect("strict predictions carry spans");
                    if gold.is_empty() {
                        case(ErrorCategory::Spurious, Some(span), None, ErrorEvidence::None);
                        continue;
                    }
                    let rest: Vec<usize> = match hit {
                        Some(h) => gold.iter().copied().filter(|g| g != h).collect(),
                        None => {
                            let target = gold[0];
                            let gspan = event.arguments[target].span;
                            let (category, evidence) = if gold.len() >= 2 {
                                (ErrorCategory::MultiInstanceRole, ErrorEvidence::GoldInstances(gold.len()))
                            } else if let Some(ci) = doc_chains
                                .iter()
                                .position(|c| c.contains_span(gspan) && c.contains_span(span))
                            {
                                (
                                    ErrorCategory::AlternativeSpan,
                                    ErrorEvidence::CorefMention { chain_index: ci, mention: span },
                                )
                            } else if span.overlaps(gspan) {
                                (ErrorCategory::PartialSpan, ErrorEvidence::Overlap { tokens: span.overlap(gspan) })
                            } else {
                                (ErrorCategory::WrongSpan, ErrorEvidence::None)
                            };
                            case(category, Some(span), Some(gspan), evidence);
                            gold[1..].to_vec()
                        }
                    };
                    for g in rest {
                        case(
                            ErrorCategory::MultiInstanceRole,
                            None,
                            Some(event.arguments[g].span),
                            ErrorEvidence::GoldInstances(gold.len()),
                        );
                    }
                }
            }
        }
    }
    let mut histogram = BTreeMap::new();
    for c in &cases {
        *histogram.entry(c.category).or_default() += 1;
    }
    ErrorAnalysis {
        cases,
        histogram,
        chains_available: chains.is_some_and(|c| !c.is_empty()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub top_k_events: usize,
    pub top_k_roles: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            top_k_events: 15,
            top_k_roles: 15,
        }
    }
}

/// Strict score with every breakdown, the confusion matrix and the error taxonomy.
pub fn analyze(
    preds: &[PredictionRecord],
    gold: &[AnnotatedDocument],
    chains: Option<&BTreeMap<String, Vec<CorefChain>>>,
    options: AnalysisOptions,
) -> Result<EvalReport, ScoreError> {
    let alignments = align_strict(preds, gold)?;
    Ok(EvalReport {
        score: total(&alignments),
        by_distance: Some(breakdown_by_distance(&alignments)),
        by_role: Some(breakdown_by_role(&alignments)),
        by_event: Some(breakdown_by_event(&alignments, options.top_k_events)),
        confusion: Some(role_confusion(&alignments)),
        errors: Some(classify_errors(&alignments, chains)),
    })
}
