//! QA instance assembly.
//!
//! Every (document, event, ontology role) yields one instance per
//! uncontextualized strategy in scope, answerable or not. Contextualized
//! questions are added to the training split only: at test time only
//! uncontextualized questions are asked, and SQuAD-derived questions need
//! the answer to be generated at all.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use thiserror::Error;

use crate::corpus::{AnnotatedDocument, Ontology};
use crate::questiongen::{
    generate_template_question, instantiate_bank_question, ContextualizedQuestions, Question,
    QuestionError, QuestionStrategy, RoleQuestionBank, WhLexicon,
};
use crate::span::Span;
use crate::text;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QaError {
    #[error("policy violation: {0}")]
    Policy(String),
    #[error("event type {0} has no roles in the ontology")]
    UnknownEventType(String),
    #[error("no question bank for strategy {0}")]
    MissingBank(QuestionStrategy),
    #[error(transparent)]
    Question(#[from] QuestionError),
    #[error("contextualized questions reference {doc_id} event {event_index}, which is not in any split")]
    UnresolvableKey { doc_id: String, event_index: usize },
    #[error("conflicting answers for {0}")]
    ConflictingAnswers(String),
    #[error("answer {span} outside context of {len} tokens in {instance_id}")]
    AnswerOutOfContext {
        instance_id: String,
        span: Span,
        len: usize,
    },
    #[error("unknown split {0}")]
    UnknownSplit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl core::fmt::Display for Split {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = QaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(QaError::UnknownSplit(other.to_string())),
        }
    }
}

/// Character offsets into the single-space join of the context tokens;
/// `end` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QAInstance {
    pub instance_id: String,
    pub doc_id: String,
    pub event_index: usize,
    pub role: String,
    pub question: Question,
    pub context: Vec<String>,
    /// Token span inside `context`; `None` is the no-answer case.
    pub answer: Option<Span>,
    pub char_answer: Option<CharSpan>,
    pub split: Split,
    /// The gold event has more than one argument with this role.
    pub multi_instance: bool,
}

impl QAInstance {
    fn dedup_key(&self) -> (String, usize, String, String, Split) {
        (
            self.doc_id.clone(),
            self.event_index,
            self.role.clone(),
            self.question.text.clone(),
            self.split,
        )
    }
}

/// Checks the per-instance invariants: answer inside the context, no
/// contextualized question outside train.
pub fn check_instance(inst: &QAInstance) -> Result<(), QaError> {
    if let Some(span) = inst.answer {
        if !span.fits(inst.context.len()) {
            return Err(QaError::AnswerOutOfContext {
                instance_id: inst.instance_id.clone(),
                span,
                len: inst.context.len(),
            });
        }
    }
    let strategy = inst.question.strategy;
    if inst.split == Split::Test && strategy.is_contextualized() {
        return Err(QaError::Policy(format!(
            "{}: test split holds {strategy} question",
            inst.instance_id
        )));
    }
    if strategy == QuestionStrategy::SquadQG && inst.split != Split::Train {
        return Err(QaError::Policy(format!(
            "{}: {strategy} question in {} split",
            inst.instance_id, inst.split
        )));
    }
    if !inst.question.is_consistent() {
        return Err(QaError::Policy(format!(
            "{}: question context flag disagrees with strategy {strategy}",
            inst.instance_id
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaDataset {
    pub schema_version: u32,
    pub instances: Vec<QAInstance>,
}

impl Default for QaDataset {
    fn default() -> Self {
        QaDataset {
            schema_version: SCHEMA_VERSION,
            instances: Vec::new(),
        }
    }
}

impl QaDataset {
    pub fn new(instances: Vec<QAInstance>) -> Self {
        QaDataset {
            schema_version: SCHEMA_VERSION,
            instances,
        }
    }

    pub fn validate(&self) -> Result<(), QaError> {
        self.instances.iter().try_for_each(check_instance)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Which question strategies feed which split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixPolicy {
    pub train_strategies: BTreeSet<QuestionStrategy>,
    /// Strategy for dev and test; must be uncontextualized.
    pub test_strategy: QuestionStrategy,
    /// Maximum contextualized questions per (event, role) in training.
    pub contextualized_per_role_cap: usize,
    /// When set, contexts are cut to this many sentences centred on the trigger.
    pub context_window: Option<usize>,
}

impl Default for MixPolicy {
    fn default() -> Self {
        MixPolicy {
            train_strategies: [QuestionStrategy::Template].into_iter().collect(),
            test_strategy: QuestionStrategy::Template,
            contextualized_per_role_cap: crate::questiongen::CONTEXTUALIZED_QUESTIONS_PER_ROLE,
            context_window: None,
        }
    }
}

impl MixPolicy {
    pub fn validate(&self) -> Result<(), QaError> {
        if self.test_strategy.is_contextualized() {
            return Err(QaError::Policy(format!(
                "test strategy {} is contextualized",
                self.test_strategy
            )));
        }
        if self.train_strategies.is_empty() {
            return Err(QaError::Policy("no training strategies".into()));
        }
        if self.context_window == Some(0) {
            return Err(QaError::Policy("context window of zero sentences".into()));
        }
        Ok(())
    }

    fn strategies_for(&self, split: Split) -> Vec<QuestionStrategy> {
        match split {
            Split::Train => self.train_strategies.iter().copied().collect(),
            Split::Dev | Split::Test => alloc::vec![self.test_strategy],
        }
    }
}

/// All question material a build may draw on.
#[derive(Debug, Clone, Default)]
pub struct QuestionSources {
    pub lexicon: WhLexicon,
    pub banks: BTreeMap<QuestionStrategy, RoleQuestionBank>,
    /// Contextualized questions, with the split their documents belong to.
    pub contextualized: Vec<(Split, ContextualizedQuestions)>,
}

/// One corpus split to turn into QA instances.
#[derive(Debug, Clone, Copy)]
pub struct SplitCorpus<'a> {
    pub split: Split,
    pub documents: &'a [AnnotatedDocument],
}

struct Context {
    tokens: Vec<String>,
    offset: usize,
}

fn context_for(item: &AnnotatedDocument, trigger: Span, window: Option<usize>) -> Context {
    let doc = &item.document;
    let Some(n) = window else {
        return Context {
            tokens: doc.tokens.clone(),
            offset: 0,
        };
    };
    let s = doc.sentence_count();
    if n >= s {
        return Context {
            tokens: doc.tokens.clone(),
            offset: 0,
        };
    }
    let home = doc.sentence_of(trigger.start).unwrap_or(0);
    let first = home.saturating_sub((n - 1) / 2).min(s - n);
    let range = doc.sentences[first].start..doc.sentences[first + n - 1].end;
    Context {
        tokens: doc.tokens[range.clone()].to_vec(),
        offset: range.start,
    }
}

fn localize(span: Span, ctx: &Context) -> Option<Span> {
    if span.start < ctx.offset || span.end >= ctx.offset + ctx.tokens.len() {
        return None;
    }
    Some(span.shifted(-(ctx.offset as isize)))
}

fn make_instance(
    item: &AnnotatedDocument,
    event_index: usize,
    role: &str,
    question: Question,
    ctx: &Context,
    gold: &[Span],
    split: Split,
    ordinal: usize,
) -> QAInstance {
    let answer = gold.first().and_then(|&s| localize(s, ctx));
    let char_answer = answer.map(|s| {
        let (start, end) = text::char_offsets(&ctx.tokens, s);
        CharSpan { start, end }
    });
    QAInstance {
        instance_id: format!(
            "{}:{}:{}:{}:{}",
            item.doc_id(),
            event_index,
            role,
            question.strategy,
            ordinal
        ),
        doc_id: item.doc_id().to_string(),
        event_index,
        role: role.to_string(),
        question,
        context: ctx.tokens.clone(),
        answer,
        char_answer,
        split,
        multi_instance: gold.len() > 1,
    }
}

/// Builds the QA dataset for all splits under `policy`.
///
/// Contextualized questions are attached only to roles with a gold answer,
/// and only in the training split; a contextualized source tagged with any
/// other split is a policy violation.
pub fn build_qa_dataset(
    splits: &[SplitCorpus<'_>],
    ontology: &Ontology,
    sources: &QuestionSources,
    policy: &MixPolicy,
) -> Result<QaDataset, QaError> {
    policy.validate()?;
    for (split, set) in &sources.contextualized {
        if *split != Split::Train && !set.is_empty() {
            return Err(QaError::Policy(format!(
                "contextualized questions supplied for the {split} split"
            )));
        }
        if let Some(q) = set.entries.values().flatten().next() {
            if !policy.train_strategies.contains(&q.strategy) {
                return Err(QaError::Policy(format!(
                    "{} questions supplied but not enabled for training",
                    q.strategy
                )));
            }
        }
    }
    let train_ids: BTreeSet<(&str, usize)> = splits
        .iter()
        .filter(|s| s.split == Split::Train)
        .flat_map(|s| {
            s.documents
                .iter()
                .flat_map(|d| (0..d.events.len()).map(move |e| (d.doc_id(), e)))
        })
        .collect();
    for (_, set) in &sources.contextualized {
        for (doc_id, event_index, _) in set.entries.keys() {
            if !train_ids.contains(&(doc_id.as_str(), *event_index)) {
                return Err(QaError::UnresolvableKey {
                    doc_id: doc_id.clone(),
                    event_index: *event_index,
                });
            }
        }
    }

    let mut instances = Vec::new();
    for part in splits {
        let strategies = policy.strategies_for(part.split);
        let uncontextualized: Vec<QuestionStrategy> = strategies
            .iter()
            .copied()
            .filter(|s| !s.is_contextualized())
            .collect();
        for &s in &uncontextualized {
            if s != QuestionStrategy::Template && !sources.banks.contains_key(&s) {
                return Err(QaError::MissingBank(s));
            }
        }
        let contextual_enabled = part.split == Split::Train
            && strategies.iter().any(|s| s.is_contextualized())
            && policy.contextualized_per_role_cap > 0;

        for item in part.documents {
            for (e, event) in item.events.iter().enumerate() {
                let roles = ontology
                    .roles_for(&event.event_type)
                    .ok_or_else(|| QaError::UnknownEventType(event.event_type.clone()))?;
                let trigger = item.document.span_text(event.trigger);
                let ctx = context_for(item, event.trigger, policy.context_window);
                for role in roles {
                    let gold: Vec<Span> = event.spans_for(role).collect();
                    for &strategy in &uncontextualized {
                        let question = match strategy {
                            QuestionStrategy::Template => generate_template_question(
                                &trigger,
                                role,
                                &event.event_type,
                                &sources.lexicon,
                            ),
                            _ => instantiate_bank_question(
                                &sources.banks[&strategy],
                                &trigger,
                                role,
                                &event.event_type,
                            )?,
                        };
                        instances.push(make_instance(item, e, role, question, &ctx, &gold, part.split, 0));
                    }
                    if !contextual_enabled || gold.is_empty() {
                        continue;
                    }
                    let mut taken = 0;
                    for (_, set) in &sources.contextualized {
                        let Some(list) = set.get(item.doc_id(), e, role) else {
                            continue;
                        };
                        for q in list {
                            if taken == policy.contextualized_per_role_cap {
                                break;
                            }
                            if !policy.train_strategies.contains(&q.strategy) {
                                continue;
                            }
                            taken += 1;
                            instances.push(make_instance(
                                item,
                                e,
                                role,
                                q.clone(),
                                &ctx,
                                &gold,
                                part.split,
                                taken,
                            ));
                        }
                    }
                }
            }
        }
    }
    let dataset = QaDataset::new(instances);
    dataset.validate()?;
    Ok(dataset)
}

/// Union of datasets, deduplicated on (doc, event, role, question text,
/// split) with first occurrence kept. Identical keys with different answers
/// are an error.
pub fn combine_datasets(parts: &[QaDataset]) -> Result<QaDataset, QaError> {
    let mut seen: BTreeMap<(String, usize, String, String, Split), Option<Span>> = BTreeMap::new();
    let mut out = Vec::new();
    for part in parts {
        for inst in &part.instances {
            check_instance(inst)?;
            let key = inst.dedup_key();
            match seen.get(&key) {
                Some(answer) if *answer == inst.answer => {}
                Some(_) => return Err(QaError::ConflictingAnswers(inst.instance_id.clone())),
                None => {
                    seen.insert(key, inst.answer);
                    out.push(inst.clone());
                }
            }
        }
    }
    Ok(QaDataset::new(out))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetReport {
    pub total: usize,
    pub per_split: BTreeMap<Split, usize>,
    pub per_strategy: BTreeMap<QuestionStrategy, usize>,
    pub answerable: usize,
    pub no_answer: usize,
    pub multi_instance: usize,
}

pub fn dataset_report(dataset: &QaDataset) -> DatasetReport {
    let mut report = DatasetReport {
        total: dataset.len(),
        ..DatasetReport::default()
    };
    for inst in &dataset.instances {
        *report.per_split.entry(inst.split).or_default() += 1;
        *report.per_strategy.entry(inst.question.strategy).or_default() += 1;
        if inst.answer.is_some() {
            report.answerable += 1;
        } else {
            report.no_answer += 1;
        }
        if inst.multi_instance {
            report.multi_instance += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ArgumentAnnotation, Document, EventInstance};
    use crate::questiongen::index_corpus;
    use alloc::vec;

    fn ontology() -> Ontology {
        let mut map = BTreeMap::new();
        map.insert(
            "artifactexistence.shipment".to_string(),
            vec!["artifact".to_string(), "origin".to_string(), "destination".to_string()],
        );
        Ontology::new(map).unwrap()
    }

    fn doc(id: &str) -> AnnotatedDocument {
        let d = Document::from_sentences(
            id,
            &[
                vec!["Russia", "destroyed", "500", "trucks", "."],
                vec!["ISIS", "was", "importing", "oil", "from", "Syria", "."],
            ],
        );
        AnnotatedDocument::new(
            d,
            vec![EventInstance::new(
                "artifactexistence.shipment",
                Span::single(7),
                vec![
                    ArgumentAnnotation::new("artifact", Span::single(8)),
                    ArgumentAnnotation::new("origin", Span::single(10)),
                ],
            )],
        )
    }

    #[test]
    fn missing_role_gets_no_answer() {
        let corpus = vec![doc("d1")];
        let ds = build_qa_dataset(
            &[SplitCorpus {
                split: Split::Test,
                documents: &corpus,
            }],
            &ontology(),
            &QuestionSources::default(),
            &MixPolicy::default(),
        )
        .unwrap();
        assert_eq!(ds.len(), 3);
        let dest = ds.instances.iter().find(|i| i.role == "destination").unwrap();
        assert_eq!(dest.answer, None);
        let art = ds.instances.iter().find(|i| i.role == "artifact").unwrap();
        assert_eq!(art.question.text, "What is the artifact of the event importing?");
        let c = art.char_answer.unwrap();
        assert_eq!(&art.context.join(" ")[c.start..c.end], "oil");
        let r = dataset_report(&ds);
        assert_eq!((r.answerable, r.no_answer), (2, 1));
        assert_eq!(r.per_strategy.len(), 1);
    }

    fn weak_questions(corpus: &[AnnotatedDocument]) -> ContextualizedQuestions {
        let index = index_corpus(corpus);
        let mut set = ContextualizedQuestions::new();
        set.insert(
            &index,
            "d1",
            0,
            "artifact",
            QuestionStrategy::WeakLLMQG,
            vec![
                "What is being imported from ISIS-held territory in Syria and Iraq?".into(),
                "What did ISIS import?".into(),
            ],
        )
        .unwrap();
        set
    }

    #[test]
    fn contextualized_questions_train_only() {
        let train = vec![doc("d1")];
        let test = vec![doc("d2")];
        let sources = QuestionSources {
            contextualized: vec![(Split::Train, weak_questions(&train))],
            ..QuestionSources::default()
        };
        let policy = MixPolicy {
            train_strategies: [QuestionStrategy::Template, QuestionStrategy::WeakLLMQG]
                .into_iter()
                .collect(),
            ..MixPolicy::default()
        };
        let ds = build_qa_dataset(
            &[
                SplitCorpus { split: Split::Train, documents: &train },
                SplitCorpus { split: Split::Test, documents: &test },
            ],
            &ontology(),
            &sources,
            &policy,
        )
        .unwrap();
        let r = dataset_report(&ds);
        assert_eq!(r.per_split[&Split::Train], 5);
        assert_eq!(r.per_split[&Split::Test], 3);
        assert!(ds
            .instances
            .iter()
            .filter(|i| i.split == Split::Test)
            .all(|i| !i.question.strategy.is_contextualized()));

        let capped = MixPolicy {
            contextualized_per_role_cap: 1,
            ..policy.clone()
        };
        let ds = build_qa_dataset(
            &[SplitCorpus { split: Split::Train, documents: &train }],
            &ontology(),
            &sources,
            &capped,
        )
        .unwrap();
        assert_eq!(ds.len(), 4);
    }

    #[test]
    fn contextualized_source_for_test_split_is_rejected() {
        let test = vec![doc("d1")];
        let sources = QuestionSources {
            contextualized: vec![(Split::Test, weak_questions(&test))],
            ..QuestionSources::default()
        };
        let policy = MixPolicy {
            train_strategies: [QuestionStrategy::Template, QuestionStrategy::WeakLLMQG]
                .into_iter()
                .collect(),
            ..MixPolicy::default()
        };
        let err = build_qa_dataset(
            &[SplitCorpus { split: Split::Test, documents: &test }],
            &ontology(),
            &sources,
            &policy,
        )
        .unwrap_err();
        assert!(matches!(err, QaError::Policy(_)));
    }

    #[test]
    fn contextualized_test_policy_rejected() {
        let policy = MixPolicy {
            test_strategy: QuestionStrategy::WeakLLMQG,
            ..MixPolicy::default()
        };
        assert!(matches!(policy.validate(), Err(QaError::Policy(_))));
    }

    #[test]
    fn combine_dedups_and_is_idempotent() {
        let corpus = vec![doc("d1")];
        let parts = [SplitCorpus { split: Split::Train, documents: &corpus }];
        let a = build_qa_dataset(&parts, &ontology(), &QuestionSources::default(), &MixPolicy::default()).unwrap();
        assert_eq!(combine_datasets(&[a.clone(), a.clone()]).unwrap(), a);

        let mut conflicting = a.clone();
        conflicting.instances[0].answer = None;
        assert!(matches!(
            combine_datasets(&[a.clone(), conflicting]),
            Err(QaError::ConflictingAnswers(_))
        ));

        let mut bad = a.clone();
        bad.instances[0].split = Split::Test;
        bad.instances[0].question = Question::contextualized(
            "q?".into(),
            QuestionStrategy::SquadQG,
            "d1",
            "t",
            "importing",
            "artifact",
        );
        assert!(matches!(combine_datasets(&[bad]), Err(QaError::Policy(_))));
    }

    #[test]
    fn multi_instance_role_uses_first_span() {
        let mut item = doc("d1");
        item.events[0]
            .arguments
            .insert(0, ArgumentAnnotation::new("origin", Span::single(0)));
        let corpus = vec![item];
        let ds = build_qa_dataset(
            &[SplitCorpus { split: Split::Test, documents: &corpus }],
            &ontology(),
            &QuestionSources::default(),
            &MixPolicy::default(),
        )
        .unwrap();
        let origin = ds.instances.iter().find(|i| i.role == "origin").unwrap();
        assert!(origin.multi_instance);
        assert_eq!(origin.answer, Some(Span::single(0)));
    }

    #[test]
    fn context_window_reindexes_answers() {
        let corpus = vec![doc("d1")];
        let policy = MixPolicy {
            context_window: Some(1),
            ..MixPolicy::default()
        };
        let ds = build_qa_dataset(
            &[SplitCorpus { split: Split::Test, documents: &corpus }],
            &ontology(),
            &QuestionSources::default(),
            &policy,
        )
        .unwrap();
        let art = ds.instances.iter().find(|i| i.role == "artifact").unwrap();
        assert_eq!(art.context.len(), 7);
        assert_eq!(art.answer, Some(Span::single(3)));
    }
}
