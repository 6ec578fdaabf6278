//! Question banks, contextualized question files, the QG training set and
//! the SQuAD triple exporter.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use eaqa_core::questiongen::{
    index_corpus, BankWarning, ContextualizedQuestions, QGTrainingExample, RoleQuestionBank,
};
use eaqa_core::{AnnotatedDocument, Ontology, QuestionStrategy};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::io;

/// A JSON object read as ordered entries, duplicate keys kept.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrderedEntries(pub Vec<(String, String)>);

impl<'de> Deserialize<'de> for OrderedEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedEntries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping role to question")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(OrderedEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

/// Parses a bank from a JSON object, tolerating prose around it (LLM
/// responses are stored verbatim).
pub fn parse_bank_entries(text: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let start = text.find('{').ok_or("no JSON object found")?;
    let end = text.rfind('}').ok_or("no JSON object found")?;
    serde_json::from_str::<OrderedEntries>(&text[start..=end])
        .map(|e| e.0)
        .map_err(|e| e.to_string())
}

pub fn read_question_bank(
    path: &Path,
    strategy: QuestionStrategy,
    ontology: &Ontology,
) -> Result<(RoleQuestionBank, Vec<BankWarning>)> {
    let text = io::read_to_string(path)?;
    let entries = parse_bank_entries(&text).map_err(|m| Error::Data(format!("{}: {m}", path.display())))?;
    RoleQuestionBank::from_entries(strategy, entries, ontology)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn bank_to_string(templates: &BTreeMap<String, String>) -> String {
    io::to_pretty_json(templates)
}

fn default_strategy() -> QuestionStrategy {
    QuestionStrategy::WeakLLMQG
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextualizedRecord {
    pub doc_id: String,
    pub event_index: usize,
    pub role: String,
    #[serde(default = "default_strategy", with = "strategy_name")]
    pub strategy: QuestionStrategy,
    pub questions: Vec<String>,
}

pub mod strategy_name {
    use eaqa_core::QuestionStrategy;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &QuestionStrategy, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(s.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<QuestionStrategy, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reads contextualized questions and resolves every key against `corpus`.
pub fn read_contextualized(path: &Path, corpus: &[AnnotatedDocument]) -> Result<ContextualizedQuestions> {
    let index = index_corpus(corpus);
    let mut out = ContextualizedQuestions::new();
    for (line, rec) in io::read_jsonl::<ContextualizedRecord>(path)? {
        out.insert(&index, &rec.doc_id, rec.event_index, &rec.role, rec.strategy, rec.questions)
            .map_err(|e| Error::Record {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            })?;
    }
    Ok(out)
}

pub fn contextualized_to_string(questions: &ContextualizedQuestions) -> String {
    io::to_jsonl(questions.entries.iter().map(|((doc_id, e, role), qs)| ContextualizedRecord {
        doc_id: doc_id.clone(),
        event_index: *e,
        role: role.clone(),
        strategy: qs.first().map_or(QuestionStrategy::WeakLLMQG, |q| q.strategy),
        questions: qs.iter().map(|q| q.text.clone()).collect(),
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGInput {
    pub document: String,
    pub trigger: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGRecord {
    pub input: QGInput,
    pub target: String,
}

impl From<&QGTrainingExample> for QGRecord {
    fn from(x: &QGTrainingExample) -> Self {
        QGRecord {
            input: QGInput {
                document: x.document.clone(),
                trigger: x.trigger.clone(),
                role: x.role.clone(),
            },
            target: x.target_question.clone(),
        }
    }
}

pub fn qg_training_to_string(examples: &[QGTrainingExample]) -> String {
    io::to_jsonl(examples.iter().map(QGRecord::from))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquadTriple {
    pub context: String,
    pub answer: String,
    pub answer_start: usize,
    pub question: String,
}

#[derive(Deserialize)]
struct SquadFile {
    data: Vec<SquadArticle>,
}
#[derive(Deserialize)]
struct SquadArticle {
    paragraphs: Vec<SquadParagraph>,
}
#[derive(Deserialize)]
struct SquadParagraph {
    context: String,
    qas: Vec<SquadQa>,
}
#[derive(Deserialize)]
struct SquadQa {
    question: String,
    #[serde(default)]
    answers: Vec<SquadAnswer>,
    #[serde(default)]
    is_impossible: bool,
}
#[derive(Deserialize)]
struct SquadAnswer {
    text: String,
    answer_start: usize,
}

/// (context, answer, question) triples from a SQuAD-format file. Questions
/// without an answer are skipped, since answer-conditioned generation needs one.
pub fn squad_triples(text: &str) -> std::result::Result<Vec<SquadTriple>, String> {
    let file: SquadFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for article in file.data {
        for para in article.paragraphs {
            for qa in para.qas {
                if qa.is_impossible {
                    continue;
                }
                if let Some(a) = qa.answers.first() {
                    out.push(SquadTriple {
                        context: para.context.clone(),
                        answer: a.text.clone(),
                        answer_start: a.answer_start,
                        question: qa.question.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_keys_survive_parsing() {
        let e = parse_bank_entries("Sure!\n{\"a\": \"What [X]?\", \"a\": \"Who [X]?\"}").unwrap();
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn squad_export_skips_unanswerable() {
        let t = squad_triples(
            r#"{"data":[{"paragraphs":[{"context":"Oil came from Iraq.","qas":[
                {"question":"Where did oil come from?","answers":[{"text":"Iraq","answer_start":14}]},
                {"question":"Who?","answers":[],"is_impossible":true}]}]}]}"#,
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(&t[0].context[t[0].answer_start..t[0].answer_start + 4], "Iraq");
    }
}
