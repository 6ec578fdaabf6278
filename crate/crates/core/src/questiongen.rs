//! Question generation.
//!
//! Uncontextualized questions depend only on the trigger and role: the
//! fixed template, or a per-ontology question bank obtained once from an LLM
//! (zero- or few-shot). Contextualized questions depend on the document and
//! come from an external generator; this module emits the prompt that
//! collects them, ingests the results, and pairs them into a training set for
//! a question-generation model.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use thiserror::Error;

use crate::corpus::{AnnotatedDocument, Document, EventInstance, Ontology};
use crate::prompt::{render, PromptAssets};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuestionError {
    #[error("question bank is missing role {0}")]
    MissingRole(String),
    #[error("question bank lists role {0} more than once")]
    DuplicateRole(String),
    #[error("question bank has role {0} that is not in the ontology")]
    UnknownRole(String),
    #[error("empty question for role {0}")]
    EmptyQuestion(String),
    #[error("role {0} not in question bank")]
    RoleAbsent(String),
    #[error("few-shot role prompt needs exactly {expected} exemplars, got {got}")]
    ExemplarCount { expected: usize, got: usize },
    #[error("strategy {0} cannot back a question bank")]
    NotABankStrategy(QuestionStrategy),
    #[error("unknown document {0}")]
    UnknownDocument(String),
    #[error("document {doc_id} has no event {event_index}")]
    UnknownEvent { doc_id: String, event_index: usize },
    #[error("no questions for {doc_id} event {event_index} role {role}")]
    NoQuestions {
        doc_id: String,
        event_index: usize,
        role: String,
    },
    #[error("{count} questions for {doc_id} event {event_index} role {role}; at most {max} allowed")]
    TooManyQuestions {
        doc_id: String,
        event_index: usize,
        role: String,
        count: usize,
        max: usize,
    },
    #[error("strategy {0} is not contextualized")]
    NotContextualized(QuestionStrategy),
    #[error("unknown question strategy {0}")]
    UnknownStrategy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuestionStrategy {
    Template,
    PromptZero,
    PromptFew,
    SquadQG,
    WeakLLMQG,
}

impl QuestionStrategy {
    pub const ALL: [QuestionStrategy; 5] = [
        QuestionStrategy::Template,
        QuestionStrategy::PromptZero,
        QuestionStrategy::PromptFew,
        QuestionStrategy::SquadQG,
        QuestionStrategy::WeakLLMQG,
    ];

    pub fn is_contextualized(self) -> bool {
        matches!(self, QuestionStrategy::SquadQG | QuestionStrategy::WeakLLMQG)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionStrategy::Template => "template",
            QuestionStrategy::PromptZero => "prompt_zero",
            QuestionStrategy::PromptFew => "prompt_few",
            QuestionStrategy::SquadQG => "squad_qg",
            QuestionStrategy::WeakLLMQG => "weak_llm_qg",
        }
    }
}

impl core::fmt::Display for QuestionStrategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionStrategy {
    type Err = QuestionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QuestionStrategy::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| QuestionError::UnknownStrategy(s.to_string()))
    }
}

/// A question about one role of one event.
///
/// `doc_id` is present exactly for contextualized strategies; use the
/// constructors to keep that invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Question {
    pub text: String,
    pub strategy: QuestionStrategy,
    pub doc_id: Option<String>,
    pub event_type: String,
    pub trigger_text: String,
    pub role: String,
}

impl Question {
    pub fn uncontextualized(
        text: String,
        strategy: QuestionStrategy,
        event_type: &str,
        trigger_text: &str,
        role: &str,
    ) -> Self {
        debug_assert!(!strategy.is_contextualized());
        Question {
            text,
            strategy,
            doc_id: None,
            event_type: event_type.to_string(),
            trigger_text: trigger_text.to_string(),
            role: role.to_string(),
        }
    }

    pub fn contextualized(
        text: String,
        strategy: QuestionStrategy,
        doc_id: &str,
        event_type: &str,
        trigger_text: &str,
        role: &str,
    ) -> Self {
        debug_assert!(strategy.is_contextualized());
        Question {
            text,
            strategy,
            doc_id: Some(doc_id.to_string()),
            event_type: event_type.to_string(),
            trigger_text: trigger_text.to_string(),
            role: role.to_string(),
        }
    }

    /// Whether `doc_id` presence agrees with the strategy.
    pub fn is_consistent(&self) -> bool {
        !self.text.is_empty() && self.doc_id.is_some() == self.strategy.is_contextualized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhWord {
    What,
    Where,
    Who,
    How,
}

impl WhWord {
    pub fn capitalized(self) -> &'static str {
        match self {
            WhWord::What => "What",
            WhWord::Where => "Where",
            WhWord::Who => "Who",
            WhWord::How => "How",
        }
    }
}

impl FromStr for WhWord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "what" => Ok(WhWord::What),
            "where" => Ok(WhWord::Where),
            "who" => Ok(WhWord::Who),
            "how" => Ok(WhWord::How),
            other => Err(format!("unknown wh-word {other}")),
        }
    }
}

const WHERE_ROLES: &[&str] = &[
    "place",
    "destination",
    "origin",
    "hidingplace",
    "placeofemployment",
    "territoryorfacility",
];

const WHO_ROLES: &[&str] = &[
    "agent",
    "attacker",
    "beneficiary",
    "candidate",
    "communicator",
    "deceased",
    "defendant",
    "demonstrator",
    "detainee",
    "driverpassenger",
    "employee",
    "executioner",
    "extraditer",
    "founder",
    "giver",
    "injurer",
    "inspector",
    "investigator",
    "jailer",
    "judgecourt",
    "killer",
    "otherparticipant",
    "participant",
    "passenger",
    "preventer",
    "prosecutor",
    "recipient",
    "retreater",
    "spy",
    "surrenderer",
    "transporter",
    "victim",
    "violator",
    "voter",
    "yielder",
];

const HOW_ROLES: &[&str] = &["manner", "instrument", "means"];

/// Role to wh-word mapping for template questions. Unmapped roles use "what".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhLexicon {
    map: BTreeMap<String, WhWord>,
}

impl Default for WhLexicon {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for (roles, wh) in [
            (WHERE_ROLES, WhWord::Where),
            (WHO_ROLES, WhWord::Who),
            (HOW_ROLES, WhWord::How),
        ] {
            for role in roles {
                map.insert(role.to_string(), wh);
            }
        }
        WhLexicon { map }
    }
}

impl WhLexicon {
    pub fn empty() -> Self {
        WhLexicon {
            map: BTreeMap::new(),
        }
    }

    /// Adds or replaces entries on top of the current mapping.
    pub fn with_overrides(mut self, entries: impl IntoIterator<Item = (String, WhWord)>) -> Self {
        self.map.extend(entries);
        self
    }

    pub fn wh_for(&self, role: &str) -> WhWord {
        self.map
            .get(role)
            .or_else(|| self.map.get(&role.to_ascii_lowercase()))
            .copied()
            .unwrap_or(WhWord::What)
    }
}

/// "{Wh} is the {role} of the event {trigger}?"
pub fn generate_template_question(
    trigger_text: &str,
    role: &str,
    event_type: &str,
    lexicon: &WhLexicon,
) -> Question {
    let text = format!(
        "{} is the {} of the event {}?",
        lexicon.wh_for(role).capitalized(),
        role,
        trigger_text
    );
    Question::uncontextualized(text, QuestionStrategy::Template, event_type, trigger_text, role)
}

const YES_NO_LEADS: &[&str] = &[
    "is", "are", "was", "were", "do", "does", "did", "can", "could", "will", "would", "has", "have",
];

/// Leading-auxiliary heuristic for yes/no questions.
pub fn looks_yes_no(question: &str) -> bool {
    question
        .split_whitespace()
        .next()
        .map(|w| {
            let w = w.to_ascii_lowercase();
            YES_NO_LEADS.contains(&w.as_str())
        })
        .unwrap_or(false)
}

/// Placeholder for the trigger inside bank templates.
pub const TRIGGER_PLACEHOLDER: &str = "[X]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BankWarning {
    YesNo { role: String, question: String },
    NoPlaceholder { role: String },
}

impl core::fmt::Display for BankWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BankWarning::YesNo { role, question } => {
                write!(f, "role {role}: yes/no question {question:?}")
            }
            BankWarning::NoPlaceholder { role } => {
                write!(f, "role {role}: template has no {TRIGGER_PLACEHOLDER}")
            }
        }
    }
}

/// One question template per ontology role, obtained by prompting an LLM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleQuestionBank {
    strategy: QuestionStrategy,
    templates: BTreeMap<String, String>,
}

impl RoleQuestionBank {
    /// Validates raw `(role, template)` entries (in file order, duplicates
    /// included) against the ontology's role set.
    pub fn from_entries(
        strategy: QuestionStrategy,
        entries: Vec<(String, String)>,
        ontology: &Ontology,
    ) -> Result<(Self, Vec<BankWarning>), QuestionError> {
        if !matches!(strategy, QuestionStrategy::PromptZero | QuestionStrategy::PromptFew) {
            return Err(QuestionError::NotABankStrategy(strategy));
        }
        let roles = ontology.all_roles();
        let mut templates = BTreeMap::new();
        let mut warnings = Vec::new();
        for (role, question) in entries {
            let question = question.trim().to_string();
            if question.is_empty() {
                return Err(QuestionError::EmptyQuestion(role));
            }
            if !roles.contains(role.as_str()) {
                return Err(QuestionError::UnknownRole(role));
            }
            if looks_yes_no(&question) {
                warnings.push(BankWarning::YesNo {
                    role: role.clone(),
                    question: question.clone(),
                });
            }
            if !question.contains(TRIGGER_PLACEHOLDER) {
                warnings.push(BankWarning::NoPlaceholder { role: role.clone() });
            }
            if templates.insert(role.clone(), question).is_some() {
                return Err(QuestionError::DuplicateRole(role));
            }
        }
        if let Some(missing) = roles.iter().find(|r| !templates.contains_key(**r)) {
            return Err(QuestionError::MissingRole(missing.to_string()));
        }
        Ok((RoleQuestionBank { strategy, templates }, warnings))
    }

    pub fn strategy(&self) -> QuestionStrategy {
        self.strategy
    }

    pub fn template(&self, role: &str) -> Option<&str> {
        self.templates.get(role).map(String::as_str)
    }

    pub fn roles(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Fills the trigger placeholder of the bank's template for `role`.
pub fn instantiate_bank_question(
    bank: &RoleQuestionBank,
    trigger_text: &str,
    role: &str,
    event_type: &str,
) -> Result<Question, QuestionError> {
    let template = bank
        .template(role)
        .ok_or_else(|| QuestionError::RoleAbsent(role.to_string()))?;
    Ok(Question::uncontextualized(
        template.replace(TRIGGER_PLACEHOLDER, trigger_text),
        bank.strategy,
        event_type,
        trigger_text,
        role,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolePromptMode {
    Zero,
    Few,
}

pub const FEW_SHOT_EXEMPLARS: usize = 10;

/// Prompt asking an LLM for one question template per ontology role.
///
/// Layout: task description, role list, instruction; few mode appends the
/// exemplar `(role, question)` pairs.
pub fn emit_role_prompt(
    ontology: &Ontology,
    mode: RolePromptMode,
    exemplars: &[(String, String)],
    assets: &PromptAssets,
) -> Result<String, QuestionError> {
    let expected = match mode {
        RolePromptMode::Zero => 0,
        RolePromptMode::Few => FEW_SHOT_EXEMPLARS,
    };
    if exemplars.len() != expected {
        return Err(QuestionError::ExemplarCount {
            expected,
            got: exemplars.len(),
        });
    }
    let mut out = String::new();
    out.push_str(&assets.role_qg_task);
    out.push_str("\n\n");
    out.push_str(&assets.role_qg_roles_header);
    out.push('\n');
    for role in ontology.all_roles() {
        out.push_str("- ");
        out.push_str(role);
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&assets.role_qg_instruction);
    out.push('\n');
    if mode == RolePromptMode::Few {
        out.push('\n');
        out.push_str(&assets.role_qg_examples_header);
        out.push('\n');
        for (role, question) in exemplars {
            out.push_str(&format!("\"{role}\": \"{question}\"\n"));
        }
    }
    Ok(out)
}

/// Number of questions requested per (event, role) from the contextualized generator.
pub const CONTEXTUALIZED_QUESTIONS_PER_ROLE: usize = 5;

/// Prompt asking an LLM for event-grounded questions about one role.
///
/// The document is rendered as plain tokens: the gold argument span is never
/// marked, so the generator sees the event and the role only.
pub fn emit_contextualized_qg_prompt(
    doc: &Document,
    event: &EventInstance,
    role: &str,
    assets: &PromptAssets,
) -> String {
    let trigger = doc.span_text(event.trigger);
    let count = format!("{CONTEXTUALIZED_QUESTIONS_PER_ROLE}");
    let mut out = String::new();
    out.push_str(&assets.ctx_qg_task);
    out.push_str("\n\n");
    out.push_str(&assets.ctx_qg_document_header);
    out.push('\n');
    for range in &doc.sentences {
        out.push_str(&doc.tokens[range.clone()].join(" "));
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&render(
        &assets.ctx_qg_instruction,
        &[
            ("trigger", &trigger),
            ("event_type", &event.event_type),
            ("role", role),
            ("count", &count),
        ],
    ));
    out.push('\n');
    out
}

/// Key of a contextualized question list: document, event index, role.
pub type QuestionKey = (String, usize, String);

/// Contextualized questions from one source file, keyed by (doc, event, role).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextualizedQuestions {
    pub entries: BTreeMap<QuestionKey, Vec<Question>>,
}

impl ContextualizedQuestions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resolves one raw entry against the corpus and stores it.
    pub fn insert(
        &mut self,
        corpus_index: &BTreeMap<&str, &AnnotatedDocument>,
        doc_id: &str,
        event_index: usize,
        role: &str,
        strategy: QuestionStrategy,
        questions: Vec<String>,
    ) -> Result<(), QuestionError> {
        if !strategy.is_contextualized() {
            return Err(QuestionError::NotContextualized(strategy));
        }
        let doc = corpus_index
            .get(doc_id)
            .ok_or_else(|| QuestionError::UnknownDocument(doc_id.to_string()))?;
        let event = doc
            .events
            .get(event_index)
            .ok_or_else(|| QuestionError::UnknownEvent {
                doc_id: doc_id.to_string(),
                event_index,
            })?;
        let questions: Vec<String> = questions
            .into_iter()
            .map(|q| q.trim().to_string())
            .filter(|q| !q.is_empty())
            .collect();
        if questions.is_empty() {
            return Err(QuestionError::NoQuestions {
                doc_id: doc_id.to_string(),
                event_index,
                role: role.to_string(),
            });
        }
        if questions.len() > CONTEXTUALIZED_QUESTIONS_PER_ROLE {
            return Err(QuestionError::TooManyQuestions {
                doc_id: doc_id.to_string(),
                event_index,
                role: role.to_string(),
                count: questions.len(),
                max: CONTEXTUALIZED_QUESTIONS_PER_ROLE,
            });
        }
        let trigger = doc.document.span_text(event.trigger);
        let list = self
            .entries
            .entry((doc_id.to_string(), event_index, role.to_string()))
            .or_default();
        list.extend(questions.into_iter().map(|text| {
            Question::contextualized(text, strategy, doc_id, &event.event_type, &trigger, role)
        }));
        Ok(())
    }

    pub fn get(&self, doc_id: &str, event_index: usize, role: &str) -> Option<&[Question]> {
        self.entries
            .get(&(doc_id.to_string(), event_index, role.to_string()))
            .map(Vec::as_slice)
    }

    pub fn question_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Doc-id lookup used when resolving question and prediction keys.
pub fn index_corpus(corpus: &[AnnotatedDocument]) -> BTreeMap<&str, &AnnotatedDocument> {
    corpus.iter().map(|d| (d.doc_id(), d)).collect()
}

/// One weak-supervision pair: (document, trigger, role) in, question out.
/// The input side carries the role name only, never the argument span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QGTrainingExample {
    pub document: String,
    pub trigger: String,
    pub role: String,
    pub target_question: String,
}

/// One example per (document, trigger, role, question), in key order.
pub fn build_qg_training_set(
    corpus: &[AnnotatedDocument],
    questions: &ContextualizedQuestions,
) -> Vec<QGTrainingExample> {
    let index = index_corpus(corpus);
    let mut out = Vec::new();
    for ((doc_id, event_index, role), list) in &questions.entries {
        let Some(doc) = index.get(doc_id.as_str()) else {
            continue;
        };
        let Some(event) = doc.events.get(*event_index) else {
            continue;
        };
        let document = doc.document.text();
        let trigger = doc.document.span_text(event.trigger);
        for q in list {
            out.push(QGTrainingExample {
                document: document.clone(),
                trigger: trigger.clone(),
                role: role.clone(),
                target_question: q.text.clone(),
            });
        }
    }
    out
}

/// Template questions for every role of every event type in the ontology,
/// with the trigger left as the placeholder.
pub fn template_bank(ontology: &Ontology, lexicon: &WhLexicon) -> BTreeMap<String, String> {
    let mut roles = BTreeSet::new();
    for (_, list) in ontology.entries() {
        roles.extend(list.iter().cloned());
    }
    roles
        .into_iter()
        .map(|role| {
            let q = generate_template_question(TRIGGER_PLACEHOLDER, &role, "", lexicon);
            (role, q.text)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArgumentAnnotation;
    use crate::span::Span;
    use alloc::vec;

    fn ontology(roles: &[&str]) -> Ontology {
        let mut map = BTreeMap::new();
        map.insert(
            "artifactexistence.shipment".to_string(),
            roles.iter().map(|r| r.to_string()).collect(),
        );
        Ontology::new(map).unwrap()
    }

    #[test]
    fn template_question_golden() {
        let lex = WhLexicon::default();
        assert_eq!(
            generate_template_question("importing", "artifact", "", &lex).text,
            "What is the artifact of the event importing?"
        );
        assert_eq!(
            generate_template_question("agreement", "place", "", &lex).text,
            "Where is the place of the event agreement?"
        );
        assert_eq!(
            generate_template_question("paying", "recipient", "", &lex).text,
            "Who is the recipient of the event paying?"
        );
    }

    #[test]
    fn lexicon_overrides_win() {
        let lex = WhLexicon::default().with_overrides([("artifact".to_string(), WhWord::How)]);
        assert!(generate_template_question("x", "artifact", "", &lex)
            .text
            .starts_with("How "));
    }

    #[test]
    fn bank_loads_and_instantiates() {
        let onto = ontology(&["artifact"]);
        let (bank, warnings) = RoleQuestionBank::from_entries(
            QuestionStrategy::PromptZero,
            vec![(
                "artifact".into(),
                "What artifact is related to the event [X]?".into(),
            )],
            &onto,
        )
        .unwrap();
        assert!(warnings.is_empty());
        let q = instantiate_bank_question(&bank, "importing", "artifact", "t").unwrap();
        assert_eq!(q.text, "What artifact is related to the event importing?");
        assert_eq!(q.strategy, QuestionStrategy::PromptZero);
        assert!(q.is_consistent());
    }

    #[test]
    fn bank_missing_role_is_named() {
        let onto = ontology(&["artifact", "origin"]);
        let err = RoleQuestionBank::from_entries(
            QuestionStrategy::PromptZero,
            vec![("artifact".into(), "What [X]?".into())],
            &onto,
        )
        .unwrap_err();
        assert_eq!(err, QuestionError::MissingRole("origin".into()));
    }

    #[test]
    fn bank_duplicate_and_empty_rejected() {
        let onto = ontology(&["artifact"]);
        let dup = RoleQuestionBank::from_entries(
            QuestionStrategy::PromptFew,
            vec![
                ("artifact".into(), "What [X]?".into()),
                ("artifact".into(), "Which [X]?".into()),
            ],
            &onto,
        );
        assert_eq!(dup.unwrap_err(), QuestionError::DuplicateRole("artifact".into()));
        let empty = RoleQuestionBank::from_entries(
            QuestionStrategy::PromptFew,
            vec![("artifact".into(), "  ".into())],
            &onto,
        );
        assert_eq!(empty.unwrap_err(), QuestionError::EmptyQuestion("artifact".into()));
    }

    #[test]
    fn yes_no_template_loads_with_warning() {
        let onto = ontology(&["artifact"]);
        let (_, warnings) = RoleQuestionBank::from_entries(
            QuestionStrategy::PromptZero,
            vec![("artifact".into(), "Is the [X] an artifact?".into())],
            &onto,
        )
        .unwrap();
        assert!(matches!(warnings[..], [BankWarning::YesNo { .. }]));
    }

    #[test]
    fn template_without_placeholder_is_unchanged() {
        let onto = ontology(&["artifact"]);
        let (bank, _) = RoleQuestionBank::from_entries(
            QuestionStrategy::PromptZero,
            vec![("artifact".into(), "What was shipped?".into())],
            &onto,
        )
        .unwrap();
        let q = instantiate_bank_question(&bank, "importing", "artifact", "t").unwrap();
        assert_eq!(q.text, "What was shipped?");
        assert!(instantiate_bank_question(&bank, "importing", "origin", "t").is_err());
    }

    #[test]
    fn role_prompt_modes() {
        let onto = ontology(&["artifact", "origin"]);
        let assets = PromptAssets::default();
        let zero = emit_role_prompt(&onto, RolePromptMode::Zero, &[], &assets).unwrap();
        let task = zero.find(&assets.role_qg_task).unwrap();
        let roles = zero.find("- artifact").unwrap();
        let instr = zero.find(&assets.role_qg_instruction).unwrap();
        assert!(task < roles && roles < instr);

        let exemplars: Vec<(String, String)> = (0..10)
            .map(|i| (format!("r{i}"), format!("What is r{i} of [X]?")))
            .collect();
        let few = emit_role_prompt(&onto, RolePromptMode::Few, &exemplars, &assets).unwrap();
        assert!(few.starts_with(&zero));
        assert!(few.contains("\"r9\": \"What is r9 of [X]?\""));

        let err = emit_role_prompt(&onto, RolePromptMode::Few, &exemplars[..9], &assets);
        assert_eq!(
            err.unwrap_err(),
            QuestionError::ExemplarCount {
                expected: 10,
                got: 9
            }
        );
    }

    fn importing_doc() -> AnnotatedDocument {
        let doc = Document::from_sentences(
            "doc1",
            &[vec!["Russia", "destroyed", "500", "trucks", "."], vec![
                "ISIS", "was", "importing", "oil", "from", "Syria", ".",
            ]],
        );
        let event = EventInstance::new(
            "artifactexistence.shipment",
            Span::single(7),
            vec![
                ArgumentAnnotation::new("artifact", Span::single(8)),
                ArgumentAnnotation::new("origin", Span::single(10)),
            ],
        );
        AnnotatedDocument::new(doc, vec![event])
    }

    #[test]
    fn contextualized_prompt_hides_answer() {
        let item = importing_doc();
        let assets = PromptAssets::default();
        let p = emit_contextualized_qg_prompt(&item.document, &item.events[0], "artifact", &assets);
        assert!(p.contains("\"importing\""));
        assert!(p.contains("artifact"));
        assert!(p.contains("Generate 5 distinct"));
        assert!(!p.contains('<') && !p.contains("[8"));
        assert_eq!(
            p,
            emit_contextualized_qg_prompt(&item.document, &item.events[0], "artifact", &assets)
        );
    }

    #[test]
    fn contextualized_questions_and_training_set() {
        let corpus = vec![importing_doc()];
        let index = index_corpus(&corpus);
        let mut set = ContextualizedQuestions::new();
        let qs: Vec<String> = vec![
            "What is being imported from ISIS-held territory in Syria and Iraq?".into(),
            "What did ISIS import?".into(),
            "What goods were imported?".into(),
            "What was brought from Syria?".into(),
            "What commodity was imported?".into(),
        ];
        set.insert(&index, "doc1", 0, "artifact", QuestionStrategy::WeakLLMQG, qs)
            .unwrap();
        assert_eq!(set.question_count(), 5);
        let q = &set.get("doc1", 0, "artifact").unwrap()[0];
        assert_eq!(q.trigger_text, "importing");
        assert!(q.is_consistent());

        let train = build_qg_training_set(&corpus, &set);
        assert_eq!(train.len(), 5);
        assert!(train.iter().all(|t| t.document == train[0].document && t.role == "artifact"));

        assert!(build_qg_training_set(&corpus, &ContextualizedQuestions::new()).is_empty());

        let empty = set.insert(&index, "doc1", 0, "origin", QuestionStrategy::WeakLLMQG, vec![]);
        assert!(matches!(empty, Err(QuestionError::NoQuestions { .. })));
        let unknown = set.insert(&index, "nope", 0, "origin", QuestionStrategy::WeakLLMQG, vec!["q".into()]);
        assert_eq!(unknown.unwrap_err(), QuestionError::UnknownDocument("nope".into()));
    }
}
