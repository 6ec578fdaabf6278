//! Prompted extraction: prompt assembly, completion parsing and mapping
//! answer strings back to document spans. No IO happens here.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::corpus::{AnnotatedDocument, Document, EventInstance};
use crate::prompt::{self, PromptAssets};
use crate::questiongen::Question;
use crate::rng::SeededRng;
use crate::scoring::PredictionRecord;
use crate::span::Span;
use crate::text::{self, MatchMode};

/// Exemplars per few-shot prompt.
pub const FEW_SHOT_EXEMPLARS: usize = 2;

/// Rendering of an unanswerable question in exemplars and completions.
pub const NO_ANSWER: &str = "None";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionError {
    #[error("no questions to ask")]
    NoQuestions,
    #[error("question for role {0} is contextualized; extraction prompts use uncontextualized questions")]
    Contextualized(String),
    #[error("more than one question for role {0}")]
    DuplicateRole(String),
    #[error("few-shot prompts take exactly {FEW_SHOT_EXEMPLARS} exemplars, got {0}")]
    ExemplarCount(usize),
    #[error("event index {0} out of range")]
    UnknownEvent(usize),
    #[error("exemplar pool has {0} entries; need {FEW_SHOT_EXEMPLARS}")]
    PoolTooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PromptWarning {
    /// No exemplar question has an empty answer.
    NoUnanswerableExemplar,
}

/// A finished extraction prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionPromptBundle {
    pub prompt: String,
    /// (role, question) pairs in prompt order.
    pub questions: Vec<(String, String)>,
    /// `doc_id:event_index` of each exemplar; empty for zero-shot.
    pub exemplar_ids: Vec<String>,
    pub warnings: Vec<PromptWarning>,
}

impl ExtractionPromptBundle {
    pub fn roles(&self) -> Vec<&str> {
        self.questions.iter().map(|(r, _)| r.as_str()).collect()
    }
}

/// A training event shown with its gold answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotExemplar {
    pub id: String,
    pub document: Document,
    pub trigger: String,
    pub event_type: String,
    /// (role, question, gold answer text or `None`).
    pub qa: Vec<(String, String, Option<String>)>,
}

impl FewShotExemplar {
    /// Pairs each question with the first gold span for its role.
    pub fn from_gold(
        item: &AnnotatedDocument,
        event_index: usize,
        questions: &[Question],
    ) -> Result<Self, ExtractionError> {
        let event = item
            .events
            .get(event_index)
            .ok_or(ExtractionError::UnknownEvent(event_index))?;
        let ordered = ordered_questions(questions)?;
        let qa = ordered
            .into_iter()
            .map(|(role, q)| {
                let answer = event.spans_for(&role).next().map(|s| item.document.span_text(s));
                (role, q, answer)
            })
            .collect();
        Ok(FewShotExemplar {
            id: format!("{}:{}", item.doc_id(), event_index),
            document: item.document.clone(),
            trigger: item.document.span_text(event.trigger),
            event_type: event.event_type.clone(),
            qa,
        })
    }

    pub fn has_unanswerable(&self) -> bool {
        self.qa.iter().any(|(_, _, a)| a.is_none())
    }
}

fn ordered_questions(questions: &[Question]) -> Result<Vec<(String, String)>, ExtractionError> {
    if questions.is_empty() {
        return Err(ExtractionError::NoQuestions);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(questions.len());
    for q in questions {
        if q.strategy.is_contextualized() {
            return Err(ExtractionError::Contextualized(q.role.clone()));
        }
        if !seen.insert(q.role.as_str()) {
            return Err(ExtractionError::DuplicateRole(q.role.clone()));
        }
        out.push((q.role.clone(), q.text.clone()));
    }
    Ok(out)
}

fn document_block(out: &mut String, doc: &Document) {
    for range in &doc.sentences {
        out.push_str(&text::join(&doc.tokens[range.clone()]));
        out.push('\n');
    }
}

fn sample_body(
    out: &mut String,
    header: &str,
    doc: &Document,
    trigger: &str,
    event_type: &str,
    questions: &[(String, String)],
    assets: &PromptAssets,
) {
    out.push_str(header);
    out.push('\n');
    document_block(out, doc);
    out.push('\n');
    out.push_str(&prompt::render(
        &assets.extract_instruction,
        &[("trigger", trigger), ("event_type", event_type)],
    ));
    out.push_str("\n\n");
    out.push_str(&assets.extract_questions_header);
    out.push('\n');
    for (i, (role, q)) in questions.iter().enumerate() {
        out.push_str(&format!("{}. {role}: {q}\n", i + 1));
    }
}

fn zero_shot_body(
    out: &mut String,
    doc: &Document,
    event: &EventInstance,
    questions: &[(String, String)],
    assets: &PromptAssets,
) {
    let trigger = doc.span_text(event.trigger);
    sample_body(out, &assets.extract_test_header, doc, &trigger, &event.event_type, questions, assets);
    out.push('\n');
    out.push_str(&assets.extract_answers_header);
    out.push('\n');
}

/// Test document, instruction and every question of the event in one prompt.
pub fn build_zero_shot_prompt(
    doc: &Document,
    event: &EventInstance,
    questions: &[Question],
    assets: &PromptAssets,
) -> Result<ExtractionPromptBundle, ExtractionError> {
    let ordered = ordered_questions(questions)?;
    let mut out = String::new();
    zero_shot_body(&mut out, doc, event, &ordered, assets);
    Ok(ExtractionPromptBundle {
        prompt: out,
        questions: ordered,
        exemplar_ids: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Two answered training samples followed by the zero-shot body.
pub fn build_few_shot_prompt(
    doc: &Document,
    event: &EventInstance,
    questions: &[Question],
    exemplars: &[FewShotExemplar],
    assets: &PromptAssets,
) -> Result<ExtractionPromptBundle, ExtractionError> {
    if exemplars.len() != FEW_SHOT_EXEMPLARS {
        return Err(ExtractionError::ExemplarCount(exemplars.len()));
    }
    let ordered = ordered_questions(questions)?;
    let mut out = String::new();
    for (i, ex) in exemplars.iter().enumerate() {
        let index = format!("{}", i + 1);
        let header = prompt::render(&assets.extract_training_header, &[("index", &index)]);
        let qs: Vec<(String, String)> = ex.qa.iter().map(|(r, q, _)| (r.clone(), q.clone())).collect();
        sample_body(&mut out, &header, &ex.document, &ex.trigger, &ex.event_type, &qs, assets);
        out.push('\n');
        out.push_str(&assets.extract_answers_header);
        out.push('\n');
        for (role, _, answer) in &ex.qa {
            out.push_str(&format!("{role}: {}\n", answer.as_deref().unwrap_or(NO_ANSWER)));
        }
        out.push('\n');
    }
    zero_shot_body(&mut out, doc, event, &ordered, assets);
    let mut warnings = Vec::new();
    if !exemplars.iter().any(FewShotExemplar::has_unanswerable) {
        warnings.push(PromptWarning::NoUnanswerableExemplar);
    }
    Ok(ExtractionPromptBundle {
        prompt: out,
        questions: ordered,
        exemplar_ids: exemplars.iter().map(|e| e.id.clone()).collect(),
        warnings,
    })
}

/// Draws two distinct pool entries.
pub fn pick_exemplars<'a, T>(pool: &'a [T], rng: &mut SeededRng) -> Result<[&'a T; 2], ExtractionError> {
    if pool.len() < FEW_SHOT_EXEMPLARS {
        return Err(ExtractionError::PoolTooSmall(pool.len()));
    }
    let first = rng.index(pool.len());
    let mut second = rng.index(pool.len() - 1);
    if second >= first {
        second += 1;
    }
    Ok([&pool[first], &pool[second]])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Text(String),
    NoAnswer,
}

impl Answer {
    pub fn text(&self) -> Option<&str> {
        match self {
            Answer::Text(t) => Some(t),
            Answer::NoAnswer => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParseWarning {
    /// No usable line for this role.
    Missing(String),
    /// Lines beyond the expected answers, ignored.
    ExtraLines(usize),
    /// A labeled line for a role that was not asked.
    UnexpectedRole(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedCompletion {
    /// One entry per expected role.
    pub answers: BTreeMap<String, Answer>,
    pub warnings: Vec<ParseWarning>,
}

impl ParsedCompletion {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

fn no_answer_marker(text: &str) -> bool {
    let t = text.trim().trim_end_matches('.').to_lowercase();
    matches!(
        t.as_str(),
        "" | "none" | "no answer" | "n/a" | "na" | "unknown" | "-" | "not mentioned" | "not given"
    )
}

fn to_answer(raw: &str) -> Answer {
    let trimmed = raw.trim().trim_matches('"').trim();
    if no_answer_marker(trimmed) {
        Answer::NoAnswer
    } else {
        Answer::Text(trimmed.to_string())
    }
}

/// Strips a leading "1." / "1)" / "-" list marker.
fn strip_marker(line: &str) -> &str {
    let t = line.trim();
    let digits = t.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(r) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return r.trim_start();
        }
    }
    t.strip_prefix("- ").unwrap_or(t)
}

/// Maps completion lines to the expected roles. Labeled `role: answer`
/// lines are preferred; when none carry an expected role label the lines
/// are aligned to roles in order. Never fails: gaps become `NoAnswer`
/// with a warning.
pub fn parse_completion(text: &str, expected: &[&str]) -> ParsedCompletion {
    let lines: Vec<&str> = text
        .lines()
        .map(strip_marker)
        .filter(|l| !l.is_empty())
        .collect();
    let expected_set: BTreeSet<&str> = expected.iter().copied().collect();
    let mut labeled: BTreeMap<&str, Answer> = BTreeMap::new();
    let mut unexpected = Vec::new();
    let mut unlabeled = 0;
    for line in &lines {
        match line.split_once(':') {
            Some((label, value)) => {
                let label = label.trim();
                if let Some(role) = expected_set.iter().find(|r| r.eq_ignore_ascii_case(label)) {
                    labeled.entry(role).or_insert_with(|| to_answer(value));
                } else if label.split_whitespace().count() == 1 && !label.is_empty() {
                    unexpected.push(label.to_string());
                } else {
                    unlabeled += 1;
                }
            }
            None => unlabeled += 1,
        }
    }

    let mut out = ParsedCompletion::default();
    if !labeled.is_empty() {
        for role in expected {
            match labeled.remove(role) {
                Some(a) => {
                    out.answers.insert(role.to_string(), a);
                }
                None => {
                    out.answers.insert(role.to_string(), Answer::NoAnswer);
                    out.warnings.push(ParseWarning::Missing(role.to_string()));
                }
            }
        }
        for role in unexpected {
            out.warnings.push(ParseWarning::UnexpectedRole(role));
        }
        if unlabeled > 0 {
            out.warnings.push(ParseWarning::ExtraLines(unlabeled));
        }
    } else {
        for (i, role) in expected.iter().enumerate() {
            match lines.get(i) {
                Some(line) => {
                    let value = line.split_once(':').map(|(_, v)| v).unwrap_or(line);
                    out.answers.insert(role.to_string(), to_answer(value));
                }
                None => {
                    out.answers.insert(role.to_string(), Answer::NoAnswer);
                    out.warnings.push(ParseWarning::Missing(role.to_string()));
                }
            }
        }
        if lines.len() > expected.len() {
            out.warnings.push(ParseWarning::ExtraLines(lines.len() - expected.len()));
        }
    }
    out
}

/// Every occurrence of the tokenized answer in the document, exact match
/// first and case-folded when exact finds nothing.
pub fn map_answer_to_spans(doc: &Document, answer: &str) -> (Vec<Span>, MatchMode) {
    let needle = text::tokenize(answer);
    if needle.is_empty() {
        return (Vec::new(), MatchMode::Exact);
    }
    text::find_with_fallback(&doc.tokens, &needle)
}

/// Turns parsed answers into one prediction per role. The span is the first
/// occurrence nearest the trigger sentence; the raw answer text is kept for
/// lenient scoring.
pub fn predictions_from_answers(
    item: &AnnotatedDocument,
    event_index: usize,
    parsed: &ParsedCompletion,
    system_id: &str,
) -> Vec<PredictionRecord> {
    let trigger = item.events.get(event_index).map(|e| e.trigger);
    parsed
        .answers
        .iter()
        .map(|(role, answer)| match answer {
            Answer::NoAnswer => PredictionRecord::new(item.doc_id(), event_index, role, None, system_id),
            Answer::Text(t) => {
                let (spans, _) = map_answer_to_spans(&item.document, t);
                let span = match trigger {
                    Some(tr) => spans.iter().copied().min_by_key(|s| {
                        item.document
                            .span_distance(tr, *s)
                            .map(|d| d.unsigned_abs())
                            .unwrap_or(u64::MAX)
                    }),
                    None => spans.first().copied(),
                };
                PredictionRecord::new(item.doc_id(), event_index, role, span, system_id).with_text(t.clone())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArgumentAnnotation;
    use crate::questiongen::QuestionStrategy;
    use alloc::vec;

    fn item() -> AnnotatedDocument {
        let doc = Document::from_sentences(
            "d",
            &[
                vec!["Iran", "sold", "oil", "to", "China", "."],
                vec!["The", "oil", "arrived", "."],
            ],
        );
        AnnotatedDocument::new(
            doc,
            vec![EventInstance::new(
                "transaction.sale",
                Span::single(1),
                vec![
                    ArgumentAnnotation::new("seller", Span::single(0)),
                    ArgumentAnnotation::new("buyer", Span::single(4)),
                ],
            )],
        )
    }

    fn qs(roles: &[&str]) -> Vec<Question> {
        roles
            .iter()
            .map(|r| {
                Question::uncontextualized(
                    format!("What is the {r} of the event [X]?"),
                    QuestionStrategy::Template,
                    "transaction.sale",
                    "sold",
                    r,
                )
            })
            .collect()
    }

    #[test]
    fn zero_shot_contains_all_questions_in_order() {
        let it = item();
        let a = PromptAssets::default();
        let b = build_zero_shot_prompt(&it.document, &it.events[0], &qs(&["seller", "buyer", "artifact"]), &a).unwrap();
        let s = b.prompt.find("1. seller").unwrap();
        let by = b.prompt.find("2. buyer").unwrap();
        let ar = b.prompt.find("3. artifact").unwrap();
        assert!(s < by && by < ar);
        let again = build_zero_shot_prompt(&it.document, &it.events[0], &qs(&["seller", "buyer", "artifact"]), &a).unwrap();
        assert_eq!(b, again);
        assert_eq!(
            build_zero_shot_prompt(&it.document, &it.events[0], &[], &a),
            Err(ExtractionError::NoQuestions)
        );
    }

    #[test]
    fn few_shot_needs_two_exemplars() {
        let it = item();
        let a = PromptAssets::default();
        let ex = FewShotExemplar::from_gold(&it, 0, &qs(&["seller", "artifact"])).unwrap();
        assert!(ex.has_unanswerable());
        let one = build_few_shot_prompt(&it.document, &it.events[0], &qs(&["seller"]), &[ex.clone()], &a);
        assert_eq!(one, Err(ExtractionError::ExemplarCount(1)));
        let b = build_few_shot_prompt(&it.document, &it.events[0], &qs(&["seller"]), &[ex.clone(), ex], &a).unwrap();
        assert!(b.warnings.is_empty());
        assert_eq!(b.prompt.matches("Iran sold oil").count(), 3);
        assert!(b.prompt.contains("artifact: None"));
        let answered = FewShotExemplar::from_gold(&it, 0, &qs(&["seller"])).unwrap();
        let b = build_few_shot_prompt(&it.document, &it.events[0], &qs(&["seller"]), &[answered.clone(), answered], &a)
            .unwrap();
        assert_eq!(b.warnings, vec![PromptWarning::NoUnanswerableExemplar]);
    }

    #[test]
    fn parse_labeled_and_ordinal() {
        let p = parse_completion("seller: Iran\nbuyer: China\nartifact: None", &["seller", "buyer", "artifact"]);
        assert!(p.is_clean());
        assert_eq!(p.answers["buyer"], Answer::Text("China".into()));
        assert_eq!(p.answers["artifact"], Answer::NoAnswer);

        let p = parse_completion("seller: Iran\nartifact: oil", &["seller", "buyer", "artifact"]);
        assert_eq!(p.answers["buyer"], Answer::NoAnswer);
        assert_eq!(p.warnings, vec![ParseWarning::Missing("buyer".into())]);

        let p = parse_completion("1. Iran\n2. China\n3. oil\nHope this helps", &["seller", "buyer", "artifact"]);
        assert_eq!(p.answers.len(), 3);
        assert_eq!(p.answers["artifact"], Answer::Text("oil".into()));
        assert_eq!(p.warnings, vec![ParseWarning::ExtraLines(1)]);
    }

    #[test]
    fn spans_for_answers() {
        let it = item();
        assert_eq!(map_answer_to_spans(&it.document, "Iran").0, vec![Span::single(0)]);
        assert_eq!(map_answer_to_spans(&it.document, "oil").0, vec![Span::single(2), Span::single(7)]);
        assert!(map_answer_to_spans(&it.document, "Russia").0.is_empty());
        let (spans, mode) = map_answer_to_spans(&it.document, "the oil");
        assert_eq!((spans, mode), (vec![Span::new(6, 7)], MatchMode::CaseInsensitive));
    }

    #[test]
    fn exemplar_draw_is_distinct() {
        let pool = [1, 2, 3];
        for seed in 0..50 {
            let [a, b] = pick_exemplars(&pool, &mut SeededRng::new(seed)).unwrap();
            assert_ne!(a, b);
        }
        assert!(pick_exemplars(&pool[..1], &mut SeededRng::new(0)).is_err());
    }
}
